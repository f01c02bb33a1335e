#pragma once

// Multi-modal contrastive training: symmetric InfoNCE between audio and
// image, audio and text, and audio and its SpecAugmented view.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sgim/autodiff/ops.h"
#include "sgim/data/dataset.h"
#include "sgim/model/encoders.h"

namespace sgim::train {

inline constexpr double kTauMin = 0.01;
inline constexpr double kTauMax = 1.0;

struct TrainConfig {
  std::size_t batch = 32;
  std::size_t steps = 2000;
  std::size_t cycle = 500;
  double lr_max = 1e-3;
  double lr_min = 1e-5;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double tau_init = 0.07;
  std::uint64_t seed = 0;
  // Freeze text and image encoders once `freeze_warmup` steps have run.
  bool freeze_text_image = false;
  std::size_t freeze_warmup = 500;
  bool use_self_loss = true;
  double freq_mask = 0.15;
  double time_mask = 0.3;
  double text_aug_prob = 0.5;

  void validate() const;
};

struct TripletBatch {
  std::vector<audio::MelSpectrogram> mels;
  std::vector<audio::MelSpectrogram> augmented;
  std::vector<text::TokenSequence> texts;
  std::vector<Image> images;
  std::vector<std::size_t> classes;

  std::size_t size() const { return classes.size(); }
};

// Feature tensors of a batch; constants with respect to the parameters.
template <typename T>
struct BatchFeatures {
  ad::BasicTensor<T> audio, augmented, text, image;
};

template <typename T>
BatchFeatures<T> batch_features(const TripletBatch& batch, const model::EncoderParams<T>& p,
                                const text::Vocabulary& vocab) {
  return {model::audio_features<T>(batch.mels, p), model::audio_features<T>(batch.augmented, p),
          model::text_features<T>(batch.texts, vocab, p.config.vocab_size),
          model::image_batch<T>(batch.images)};
}

// Symmetric InfoNCE over unit-norm rows: with S = X Y^T / tau,
//   (1/N) sum_i [ -log softmax(S_i.)_i - log softmax(S_.i)_i ].
template <typename T>
ad::BasicTensor<T> loss_nce_pair(const ad::BasicTensor<T>& x, const ad::BasicTensor<T>& y,
                                 const ad::BasicTensor<T>& log_tau) {
  if (x.rank() != 2 || x.shape() != y.shape()) {
    throw DimensionError("contrastive loss needs equal [N x d] batches, got " +
                         ad::shape_string(x.shape()) + " and " + ad::shape_string(y.shape()));
  }
  const std::size_t n = x.rows();
  std::vector<T> eye(n * n, T(0));
  for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = T(1);
  const auto mask = ad::BasicTensor<T>::from({n, n}, std::move(eye));
  const auto s = ad::mul(ad::matmul(x, ad::transpose(y)), ad::exp(ad::affine(log_tau, T(-1))));
  const auto forward = ad::sum(ad::mul(ad::log_softmax_rows(s), mask));
  const auto reverse = ad::sum(ad::mul(ad::log_softmax_rows(ad::transpose(s)), mask));
  return ad::affine(ad::add(forward, reverse), T(-1) / static_cast<T>(n));
}

template <typename T>
ad::BasicTensor<T> loss_nce_pair(const ad::BasicTensor<T>& x, const ad::BasicTensor<T>& y,
                                 double tau) {
  return loss_nce_pair(x, y, ad::BasicTensor<T>::scalar(static_cast<T>(std::log(tau))));
}

// Same form, applied to clean and augmented audio embeddings.
template <typename T>
ad::BasicTensor<T> loss_self(const ad::BasicTensor<T>& a, const ad::BasicTensor<T>& a_aug,
                             const ad::BasicTensor<T>& log_tau) {
  return loss_nce_pair(a, a_aug, log_tau);
}

template <typename T>
struct LossTerms {
  ad::BasicTensor<T> total, nce_av, nce_at, self;
};

template <typename T>
LossTerms<T> loss_total(const BatchFeatures<T>& f, const model::EncoderParams<T>& p,
                        const ad::BasicTensor<T>& log_tau, bool use_self_loss = true) {
  const auto a = model::encode_audio(f.audio, p);
  const auto v = model::encode_image(f.image, p);
  const auto t = model::encode_text(f.text, p);
  LossTerms<T> out;
  out.nce_av = loss_nce_pair(a, v, log_tau);
  out.nce_at = loss_nce_pair(a, t, log_tau);
  out.total = ad::add(out.nce_av, out.nce_at);
  if (use_self_loss) {
    out.self = loss_self(a, model::encode_audio(f.augmented, p), log_tau);
    out.total = ad::add(out.total, out.self);
  } else {
    out.self = ad::BasicTensor<T>::scalar(T(0));
  }
  return out;
}

double cosine_cyclic_lr(std::size_t step, const TrainConfig& cfg);

struct StepLog {
  std::size_t step = 0;
  double loss = 0, nce_av = 0, nce_at = 0, self = 0, lr = 0;
};

std::string format_log_line(const StepLog& log);

// Encoders plus the learnable log-temperature and SGD momentum buffers.
struct TrainState {
  model::Encoders params;
  ad::Tensor log_tau;
  std::vector<std::vector<float>> velocity;  // encoder parameters, then log_tau
  std::size_t step = 0;

  static TrainState init(const model::Encoders& params, double tau_init);
  double tau() const { return std::exp(static_cast<double>(log_tau.item())); }
};

// One SGD-with-momentum update. Returns the loss terms before the update.
// Throws NumericalError naming the component when a loss is not finite.
StepLog train_step(const TripletBatch& batch, TrainState& state, const TrainConfig& cfg,
                   const text::Vocabulary& vocab);

// Batch for one step: items drawn uniformly with replacement from `pool`,
// augmentations seeded per (seed, step, slot).
TripletBatch sample_batch(const std::vector<data::Example>& examples,
                          const std::vector<std::size_t>& pool, std::size_t step,
                          const TrainConfig& cfg, const text::SynonymTable& synonyms,
                          const text::Vocabulary& vocab);

struct TrainResult {
  TrainState state;
  std::vector<StepLog> trace;
};

// Fits the audio normalizer on the training pool, then runs cfg.steps steps.
TrainResult train_encoders(const std::vector<data::Example>& examples,
                           const std::vector<std::size_t>& pool, const model::Encoders& init,
                           const TrainConfig& cfg, const text::SynonymTable& synonyms,
                           const text::Vocabulary& vocab,
                           const std::function<void(const StepLog&)>& on_step = {});

}  // namespace sgim::train
