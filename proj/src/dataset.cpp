#include "sgim/data/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sgim/audio/synth.h"
#include "sgim/data/catalog.h"
#include "sgim/errors.h"
#include "sgim/gen/render.h"
#include "sgim/seed.h"

namespace sgim::data {

Example synth_example(std::size_t class_id, std::uint64_t item_seed, const DatasetConfig& cfg) {
  const auto& catalog = class_catalog();
  if (class_id >= catalog.size()) {
    throw ContractError("class id " + std::to_string(class_id) + " out of range");
  }
  Example ex;
  ex.class_id = class_id;
  ex.seed = item_seed;
  ex.wave = audio::synth_class_audio(class_id, derive_seed(item_seed, 0), cfg.duration,
                                     cfg.mel.sample_rate);
  ex.mel = audio::log_mel(ex.wave, cfg.mel);
  const auto& captions = catalog[class_id].captions;
  ex.caption = text::tokenize(captions[derive_seed(item_seed, 1) % captions.size()]);
  ex.image = gen::render_procedural(class_id, derive_seed(item_seed, 2), cfg.image_size);
  return ex;
}

std::vector<Example> synth_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
  if (cfg.classes < 2 || cfg.classes > class_catalog().size()) {
    throw ContractError("dataset needs between 2 and " + std::to_string(class_catalog().size()) +
                        " classes");
  }
  if (cfg.per_class == 0) throw ContractError("dataset needs at least one item per class");
  std::vector<Example> out;
  out.reserve(cfg.classes * cfg.per_class);
  for (std::size_t k = 0; k < cfg.classes; ++k) {
    for (std::size_t i = 0; i < cfg.per_class; ++i) {
      out.push_back(synth_example(k, derive_seed(seed, k, i), cfg));
    }
  }
  return out;
}

Split split_indices(std::size_t n, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ContractError("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  const auto cut = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n)));
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  return s;
}

text::Vocabulary build_vocabulary(const std::vector<Example>& examples,
                                  const text::SynonymTable& synonyms) {
  text::Vocabulary vocab;
  auto add_with_synonyms = [&](const text::TokenSequence& tokens) {
    for (const auto& t : tokens) {
      vocab.add(t);
      if (const auto* syn = synonyms.find(t)) {
        for (const auto& s : *syn) vocab.add(s);
      }
    }
  };
  for (const auto& info : class_catalog()) {
    for (const auto& c : info.captions) add_with_synonyms(text::tokenize(c));
    add_with_synonyms(text::tokenize(info.prompt));
  }
  for (const auto& ex : examples) add_with_synonyms(ex.caption);
  return vocab;
}

std::vector<std::string> class_prompts(std::size_t classes) {
  const auto& catalog = class_catalog();
  if (classes > catalog.size()) throw ContractError("more classes than the catalog holds");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < classes; ++k) out.push_back(catalog[k].prompt);
  return out;
}

}  // namespace sgim::data
