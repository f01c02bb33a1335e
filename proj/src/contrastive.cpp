#include "sgim/train/contrastive.h"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <random>

#include "sgim/seed.h"

namespace sgim::train {

void TrainConfig::validate() const {
  if (batch < 2) throw ContractError("batch size must be at least 2");
  if (cycle < 1) throw ContractError("cycle length must be at least 1");
  if (!(lr_min >= 0.0 && lr_min <= lr_max)) throw ContractError("need 0 <= lr_min <= lr_max");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ContractError("momentum must lie in [0, 1)");
  if (weight_decay < 0.0) throw ContractError("weight decay must be nonnegative");
  if (!(tau_init >= kTauMin && tau_init <= kTauMax)) {
    throw ContractError("temperature init must lie in [0.01, 1]");
  }
  if (!(freq_mask >= 0.0 && freq_mask < 1.0) || !(time_mask >= 0.0 && time_mask < 1.0)) {
    throw ContractError("mask ratios must lie in [0, 1)");
  }
  if (!(text_aug_prob >= 0.0 && text_aug_prob <= 1.0)) {
    throw ContractError("text augmentation probability must lie in [0, 1]");
  }
}

double cosine_cyclic_lr(std::size_t step, const TrainConfig& cfg) {
  const double phase = static_cast<double>(step % cfg.cycle) / static_cast<double>(cfg.cycle);
  return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(std::numbers::pi * phase));
}

std::string format_log_line(const StepLog& log) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu %.6f %.6f %.6f %.6f %.6g", log.step, log.loss, log.nce_av,
                log.nce_at, log.self, log.lr);
  return buf;
}

TrainState TrainState::init(const model::Encoders& params, double tau_init) {
  TrainState s;
  s.params = params.cast<float>(true);
  s.log_tau = ad::Tensor::scalar(static_cast<float>(std::log(tau_init)), true);
  for (const auto& p : s.params.parameters()) s.velocity.emplace_back(p.size(), 0.0f);
  s.velocity.emplace_back(1, 0.0f);
  return s;
}

namespace {

void check_finite(double value, const char* component, std::size_t step) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string("non-finite ") + component + " loss at step " +
                         std::to_string(step));
  }
}

}  // namespace

StepLog train_step(const TripletBatch& batch, TrainState& state, const TrainConfig& cfg,
                   const text::Vocabulary& vocab) {
  if (batch.size() < 2) throw ContractError("training batches need at least 2 items");
  auto params = state.params.parameters();
  for (auto& p : params) p.zero_grad();
  state.log_tau.zero_grad();

  const auto features = batch_features<float>(batch, state.params, vocab);
  const auto terms = loss_total(features, state.params, state.log_tau, cfg.use_self_loss);

  StepLog log;
  log.step = state.step;
  log.nce_av = terms.nce_av.item();
  log.nce_at = terms.nce_at.item();
  log.self = terms.self.item();
  log.loss = terms.total.item();
  log.lr = cosine_cyclic_lr(state.step, cfg);
  check_finite(log.nce_av, "audio-image", state.step);
  check_finite(log.nce_at, "audio-text", state.step);
  check_finite(log.self, "audio self-supervised", state.step);
  check_finite(log.loss, "total", state.step);

  ad::backward(terms.total);

  const bool frozen = cfg.freeze_text_image && state.step >= cfg.freeze_warmup;
  const std::size_t n_audio = state.params.audio_parameters().size();
  const auto lr = static_cast<float>(log.lr);
  const auto mu = static_cast<float>(cfg.momentum);
  auto update = [&](ad::Tensor& p, std::vector<float>& v, float decay) {
    auto theta = p.mutable_data();
    auto g = p.grad();
    const bool has_grad = p.has_grad();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      v[i] = mu * v[i] + (has_grad ? g[i] : 0.0f) + decay * theta[i];
      theta[i] -= lr * v[i];
    }
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (frozen && i >= n_audio) continue;
    update(params[i], state.velocity[i], static_cast<float>(cfg.weight_decay));
  }
  update(state.log_tau, state.velocity.back(), 0.0f);
  auto lt = state.log_tau.mutable_data();
  lt[0] = std::clamp(lt[0], static_cast<float>(std::log(kTauMin)),
                     static_cast<float>(std::log(kTauMax)));
  ++state.step;
  return log;
}

TripletBatch sample_batch(const std::vector<data::Example>& examples,
                          const std::vector<std::size_t>& pool, std::size_t step,
                          const TrainConfig& cfg, const text::SynonymTable& synonyms,
                          const text::Vocabulary& vocab) {
  if (pool.empty()) throw ContractError("cannot sample a batch from an empty pool");
  TripletBatch b;
  for (std::size_t slot = 0; slot < cfg.batch; ++slot) {
    const std::uint64_t item_seed = derive_seed(cfg.seed, step, slot);
    const auto& ex = examples[pool[item_seed % pool.size()]];
    b.mels.push_back(ex.mel);
    b.augmented.push_back(
        audio::spec_augment(ex.mel, cfg.freq_mask, cfg.time_mask, derive_seed(item_seed, 1)));
    b.texts.push_back(
        text::augment_text(ex.caption, synonyms, vocab, cfg.text_aug_prob, derive_seed(item_seed, 2)));
    b.images.push_back(ex.image);
    b.classes.push_back(ex.class_id);
  }
  return b;
}

TrainResult train_encoders(const std::vector<data::Example>& examples,
                           const std::vector<std::size_t>& pool, const model::Encoders& init,
                           const TrainConfig& cfg, const text::SynonymTable& synonyms,
                           const text::Vocabulary& vocab,
                           const std::function<void(const StepLog&)>& on_step) {
  cfg.validate();
  if (pool.empty()) throw ContractError("training pool is empty");
  std::vector<audio::MelSpectrogram> corpus;
  for (std::size_t i : pool) corpus.push_back(examples.at(i).mel);
  TrainResult result{TrainState::init(init, cfg.tau_init), {}};
  model::fit_audio_normalizer(result.state.params, corpus);
  result.trace.reserve(cfg.steps);
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    const auto batch = sample_batch(examples, pool, s, cfg, synonyms, vocab);
    result.trace.push_back(train_step(batch, result.state, cfg, vocab));
    if (on_step) on_step(result.trace.back());
  }
  return result;
}

}  // namespace sgim::train
