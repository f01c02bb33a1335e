#pragma once

// End-to-end steps shared by the command-line tool and the acceptance run.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sgim/data/dataset.h"
#include "sgim/eval/evaluation.h"
#include "sgim/gen/generator.h"
#include "sgim/io/config.h"
#include "sgim/manip/manipulator.h"
#include "sgim/model/encoders.h"
#include "sgim/train/contrastive.h"

namespace sgim::pipeline {

// Dataset directory: manifest.txt plus audio/*.wav, text/*.txt and
// images/*.ppm sharing one stem per item. Manifest lines are
// `stem class seed`; lines starting with `#` are comments.
void write_dataset(const std::filesystem::path& dir, const std::vector<data::Example>& examples,
                   const std::string& header);
// Re-derives log-mel features with the given parameters.
std::vector<data::Example> load_dataset(const std::filesystem::path& dir,
                                        const data::DatasetConfig& cfg);

text::SynonymTable default_synonyms();

struct EmbeddingRun {
  text::Vocabulary vocab;
  data::Split split;
  train::TrainResult result;
};

// Vocabulary, seeded split, encoder init and training as configured.
EmbeddingRun train_embedding(const io::Config& cfg, const std::vector<data::Example>& examples,
                             const std::function<void(const train::StepLog&)>& on_step = {});

// encoders.sgim, generator.sgim and vocab.txt in one directory.
struct Models {
  model::Encoders encoders;
  double tau = 0.0;
  text::Vocabulary vocab;
  gen::Generator generator;
};
void save_encoders(const std::filesystem::path& dir, const model::Encoders& e, double tau,
                   const text::Vocabulary& vocab);
void save_generator(const std::filesystem::path& dir, const gen::Generator& g);
// The generator is skipped when with_generator is false.
Models load_models(const std::filesystem::path& dir, bool with_generator = true);

// W-space code of a generated source image.
ad::Tensor source_code(const gen::Generator& g, std::size_t class_id, std::uint64_t seed);

// One manipulation run: a source of another class guided by a fresh clip of
// the guiding class.
struct RunSpec {
  std::size_t guide_class = 0;
  std::size_t source_class = 0;
  std::uint64_t seed = 0;
};
std::vector<RunSpec> run_suite(std::size_t classes, std::size_t runs_per_class, std::uint64_t seed);
ad::Tensor run_source(const gen::Generator& g, const RunSpec& run);
data::Example run_guidance(const RunSpec& run, const data::DatasetConfig& cfg);

// Linear probe over image embeddings of generated samples.
eval::LinearProbe fit_image_probe(const gen::Generator& g, const model::Encoders& e,
                                  std::size_t per_class, const io::EvalConfig& cfg,
                                  std::uint64_t seed);

struct SuiteRun {
  RunSpec spec;
  ad::Tensor w_s;
  manip::ManipResult result;
};

// Runs the audio-guided suite, reporting each finished run to on_run.
eval::EvalReport semantic_suite(const io::Config& cfg, const Models& m,
                                const std::function<void(const SuiteRun&)>& on_run = {});

// Audio- and text-guided manipulations from shared sources. The text target
// is the guiding class prompt.
eval::EvalReport direction_suite(const io::Config& cfg, const Models& m);

}  // namespace sgim::pipeline
