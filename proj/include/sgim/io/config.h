#pragma once

// Pipeline settings read from `key = value` lines; `#` starts a comment.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sgim/data/dataset.h"
#include "sgim/gen/generator.h"
#include "sgim/manip/manipulator.h"
#include "sgim/model/encoders.h"
#include "sgim/train/contrastive.h"

namespace sgim::io {

struct EvalConfig {
  std::size_t probe_steps = 500;
  double probe_lr = 0.1;
  std::size_t runs_per_class = 25;
  std::size_t direction_pairs = 50;
  double train_fraction = 0.8;
};

struct Config {
  std::uint64_t seed = 0;
  data::DatasetConfig data;
  model::EncoderConfig encoder;
  train::TrainConfig train;
  gen::GenConfig generator;
  gen::PretrainConfig pretrain;
  manip::ManipConfig manip;
  std::size_t mix_split = 0;  // 0 selects ceil(L / 2)
  EvalConfig eval;

  // Throws FormatError with the line number for syntax errors, unknown keys
  // and out-of-range values.
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);
  // Every key with its current value, one per line, in a fixed order.
  std::string serialize() const;
  // Applies the global seed to the per-module seeds.
  void set_seed(std::uint64_t s);
};

struct ConfigKey {
  std::string name;
  std::string help;
};
const std::vector<ConfigKey>& config_keys();

}  // namespace sgim::io
