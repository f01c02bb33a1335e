#include "sgim/eval/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sgim/errors.h"

namespace sgim::eval {

double EvalReport::class_accuracy(std::size_t k) const {
  const auto& c = per_class.at(k);
  return c.n == 0 ? 0.0 : static_cast<double>(c.correct) / static_cast<double>(c.n);
}

void EvalReport::record(std::size_t truth, std::size_t predicted) {
  if (truth >= per_class.size()) per_class.resize(truth + 1);
  ++per_class[truth].n;
  ++n;
  if (truth == predicted) {
    ++per_class[truth].correct;
    ++correct;
  }
}

std::string EvalReport::to_text() const {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "# task %s seed %llu\n", task.c_str(),
                static_cast<unsigned long long>(seed));
  out += buf;
  if (!per_class.empty()) {
    out += "# class        n  correct  accuracy\n";
    for (std::size_t k = 0; k < per_class.size(); ++k) {
      std::snprintf(buf, sizeof buf, "# %5zu %8zu %8zu  %8.4f\n", k, per_class[k].n,
                    per_class[k].correct, class_accuracy(k));
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "# all   %8zu %8zu  %8.4f\n", n, correct, accuracy());
    out += buf;
    if (train_accuracy >= 0.0) {
      std::snprintf(buf, sizeof buf, "# train accuracy %.4f\n", train_accuracy);
      out += buf;
    }
  }
  if (has_direction) {
    std::snprintf(buf, sizeof buf,
                  "# cos(w_s, w_a) mean %.6f variance %.6g\n# cos(w_s, w_t) mean %.6f variance %.6g\n",
                  direction.audio_mean, direction.audio_variance, direction.text_mean,
                  direction.text_variance);
    out += buf;
  }
  for (std::size_t k = 0; k < per_class.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%s %zu %zu %zu\n", task.c_str(), k, per_class[k].n,
                  per_class[k].correct);
    out += buf;
  }
  if (!per_class.empty()) {
    std::snprintf(buf, sizeof buf, "%s all %zu %zu\n", task.c_str(), n, correct);
    out += buf;
  }
  return out;
}

std::size_t argmax_similarity(std::span<const float> query,
                              const std::vector<model::Embedding>& keys) {
  if (keys.empty()) throw ContractError("argmax over an empty key set");
  std::size_t best = 0;
  double best_score = -INFINITY;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const double s = model::dot(query, keys[k]);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

EvalReport zero_shot_classify(const std::vector<model::Embedding>& audio,
                              const std::vector<std::size_t>& labels,
                              const std::vector<model::Embedding>& prompts) {
  if (audio.empty()) throw ContractError("zero-shot evaluation set is empty");
  if (audio.size() != labels.size()) throw ContractError("one label per audio embedding required");
  if (prompts.size() < 2) throw ContractError("zero-shot classification needs at least 2 classes");
  EvalReport r;
  r.task = "zeroshot";
  r.per_class.resize(prompts.size());
  for (std::size_t i = 0; i < audio.size(); ++i) r.record(labels[i], argmax_similarity(audio[i], prompts));
  return r;
}

EvalReport zero_shot_classify(const std::vector<audio::MelSpectrogram>& mels,
                              const std::vector<std::size_t>& labels,
                              const std::vector<std::string>& prompts,
                              const model::Encoders& encoders, const text::Vocabulary& vocab) {
  std::vector<model::Embedding> a, t;
  for (const auto& m : mels) a.push_back(model::embed_audio(m, encoders));
  for (const auto& p : prompts) t.push_back(model::embed_text(text::tokenize(p), vocab, encoders));
  return zero_shot_classify(a, labels, t);
}

std::size_t LinearProbe::predict(std::span<const float> x) const {
  if (x.size() != dim) {
    throw DimensionError("probe expects " + std::to_string(dim) + " features, got " +
                         std::to_string(x.size()));
  }
  std::size_t best = 0;
  double best_score = -INFINITY;
  for (std::size_t k = 0; k < classes; ++k) {
    double s = bias[k];
    for (std::size_t j = 0; j < dim; ++j) s += weights[j * classes + k] * x[j];
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

LinearProbe fit_linear_probe(const std::vector<model::Embedding>& x,
                             const std::vector<std::size_t>& labels, std::size_t steps, double lr) {
  if (x.empty() || x.size() != labels.size()) {
    throw ContractError("linear probe needs one label per non-empty feature row");
  }
  const std::size_t classes = *std::max_element(labels.begin(), labels.end()) + 1;
  if (std::all_of(labels.begin(), labels.end(), [&](std::size_t l) { return l == labels[0]; })) {
    throw ContractError("linear probe needs at least 2 distinct classes");
  }
  LinearProbe p;
  p.classes = classes;
  p.dim = x[0].size();
  p.weights.assign(p.dim * classes, 0.0);
  p.bias.assign(classes, 0.0);
  const double inv_n = 1.0 / static_cast<double>(x.size());
  std::vector<double> gw(p.weights.size()), gb(classes), prob(classes);
  for (std::size_t s = 0; s < steps; ++s) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != p.dim) throw DimensionError("linear probe rows differ in length");
      double mx = -INFINITY;
      for (std::size_t k = 0; k < classes; ++k) {
        double z = p.bias[k];
        for (std::size_t j = 0; j < p.dim; ++j) z += p.weights[j * classes + k] * x[i][j];
        prob[k] = z;
        mx = std::max(mx, z);
      }
      double total = 0.0;
      for (auto& v : prob) total += (v = std::exp(v - mx));
      for (std::size_t k = 0; k < classes; ++k) {
        const double d = (prob[k] / total - (labels[i] == k ? 1.0 : 0.0)) * inv_n;
        gb[k] += d;
        for (std::size_t j = 0; j < p.dim; ++j) gw[j * classes + k] += d * x[i][j];
      }
    }
    for (std::size_t i = 0; i < gw.size(); ++i) p.weights[i] -= lr * gw[i];
    for (std::size_t k = 0; k < classes; ++k) p.bias[k] -= lr * gb[k];
  }
  return p;
}

EvalReport linear_probe(const std::vector<model::Embedding>& x,
                        const std::vector<std::size_t>& labels, const data::Split& split,
                        std::size_t steps, double lr) {
  if (split.train.empty() || split.test.empty()) throw ContractError("probe split is empty");
  std::vector<model::Embedding> tx;
  std::vector<std::size_t> ty;
  for (std::size_t i : split.train) {
    tx.push_back(x.at(i));
    ty.push_back(labels.at(i));
  }
  const auto probe = fit_linear_probe(tx, ty, steps, lr);
  EvalReport r;
  r.task = "probe";
  r.per_class.resize(probe.classes);
  for (std::size_t i : split.test) r.record(labels.at(i), probe.predict(x.at(i)));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < tx.size(); ++i) hits += probe.predict(tx[i]) == ty[i];
  r.train_accuracy = static_cast<double>(hits) / static_cast<double>(tx.size());
  return r;
}

EvalReport semantic_manip_accuracy(const std::vector<model::Embedding>& manipulated,
                                   const std::vector<std::size_t>& guiding_classes,
                                   const LinearProbe& probe) {
  if (manipulated.empty()) throw ContractError("no manipulation runs to score");
  if (manipulated.size() != guiding_classes.size()) {
    throw ContractError("one guiding class per manipulation run required");
  }
  EvalReport r;
  r.task = "semantic";
  r.per_class.resize(probe.classes);
  for (std::size_t i = 0; i < manipulated.size(); ++i) {
    r.record(guiding_classes[i], probe.predict(manipulated[i]));
  }
  return r;
}

namespace {

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  const double ab = model::dot(a, b), aa = model::dot(a, a), bb = model::dot(b, b);
  return ab / std::max(std::sqrt(aa * bb), 1e-30);
}

void mean_variance(const std::vector<double>& v, double& mean, double& var) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
}

}  // namespace

EvalReport direction_stats(const std::vector<std::vector<float>>& sources,
                           const std::vector<std::vector<float>>& audio_guided,
                           const std::vector<std::vector<float>>& text_guided) {
  if (sources.empty()) throw ContractError("direction statistics need at least one pair");
  if (audio_guided.size() != sources.size() || text_guided.size() != sources.size()) {
    throw ContractError("direction statistics need matched source/audio/text sets");
  }
  std::vector<double> ca, ct;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    ca.push_back(cosine(sources[i], audio_guided[i]));
    ct.push_back(cosine(sources[i], text_guided[i]));
  }
  EvalReport r;
  r.task = "direction";
  r.n = sources.size();
  r.has_direction = true;
  mean_variance(ca, r.direction.audio_mean, r.direction.audio_variance);
  mean_variance(ct, r.direction.text_mean, r.direction.text_variance);
  return r;
}

}  // namespace sgim::eval
