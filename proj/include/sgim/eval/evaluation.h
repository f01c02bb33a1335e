#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgim/data/dataset.h"
#include "sgim/model/encoders.h"

namespace sgim::eval {

struct ClassCount {
  std::size_t n = 0;
  std::size_t correct = 0;
};

struct DirectionStats {
  double audio_mean = 0, audio_variance = 0;
  double text_mean = 0, text_variance = 0;
};

struct EvalReport {
  std::string task;
  std::uint64_t seed = 0;
  std::vector<ClassCount> per_class;
  std::size_t n = 0;
  std::size_t correct = 0;
  // Probe only: accuracy on its own training split.
  double train_accuracy = -1.0;
  bool has_direction = false;
  DirectionStats direction;

  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
  double class_accuracy(std::size_t k) const;
  void record(std::size_t truth, std::size_t predicted);
  // Human-readable table followed by `task class n correct` lines.
  std::string to_text() const;
};

// Index of the highest inner product; ties go to the lowest index.
std::size_t argmax_similarity(std::span<const float> query, const std::vector<model::Embedding>& keys);

EvalReport zero_shot_classify(const std::vector<model::Embedding>& audio,
                              const std::vector<std::size_t>& labels,
                              const std::vector<model::Embedding>& prompts);

EvalReport zero_shot_classify(const std::vector<audio::MelSpectrogram>& mels,
                              const std::vector<std::size_t>& labels,
                              const std::vector<std::string>& prompts,
                              const model::Encoders& encoders, const text::Vocabulary& vocab);

// Multinomial logistic regression trained by full-batch gradient descent.
struct LinearProbe {
  std::size_t classes = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // dim x classes
  std::vector<double> bias;

  std::size_t predict(std::span<const float> x) const;
};

LinearProbe fit_linear_probe(const std::vector<model::Embedding>& x,
                             const std::vector<std::size_t>& labels, std::size_t steps = 500,
                             double lr = 0.1);

EvalReport linear_probe(const std::vector<model::Embedding>& x,
                        const std::vector<std::size_t>& labels, const data::Split& split,
                        std::size_t steps = 500, double lr = 0.1);

// Fraction of manipulated-image embeddings the probe assigns to the guiding class.
EvalReport semantic_manip_accuracy(const std::vector<model::Embedding>& manipulated,
                                   const std::vector<std::size_t>& guiding_classes,
                                   const LinearProbe& probe);

// Cosine similarity of flattened latent codes: cos(w_s, w_a) and cos(w_s, w_t).
// Variances are population variances.
EvalReport direction_stats(const std::vector<std::vector<float>>& sources,
                           const std::vector<std::vector<float>>& audio_guided,
                           const std::vector<std::vector<float>>& text_guided);

}  // namespace sgim::eval
