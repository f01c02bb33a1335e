#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgim/audio/features.h"
#include "sgim/image.h"
#include "sgim/text/text.h"

namespace sgim::data {

// One aligned audio/text/image item.
struct Example {
  std::size_t class_id = 0;
  std::uint64_t seed = 0;
  audio::Waveform wave;
  audio::MelSpectrogram mel;
  text::TokenSequence caption;
  Image image;
};

struct DatasetConfig {
  std::size_t classes = 8;
  std::size_t per_class = 50;
  double duration = 1.0;
  std::size_t image_size = 32;
  audio::MelParams mel;
};

// Deterministic synthetic corpus, ordered class-major. Item seeds are derived
// from (seed, class, index) so any subset can be regenerated independently.
std::vector<Example> synth_dataset(const DatasetConfig& cfg, std::uint64_t seed);
Example synth_example(std::size_t class_id, std::uint64_t item_seed, const DatasetConfig& cfg);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1, the first round(train_fraction * n) go to train.
Split split_indices(std::size_t n, std::uint64_t seed, double train_fraction = 0.8);

// Words of all captions and class prompts, plus their synonyms, in first-seen order.
text::Vocabulary build_vocabulary(const std::vector<Example>& examples,
                                  const text::SynonymTable& synonyms);

std::vector<std::string> class_prompts(std::size_t classes);

}  // namespace sgim::data
