#pragma once

#include <filesystem>

#include "sgim/gen/generator.h"
#include "sgim/io/checkpoint.h"
#include "sgim/model/encoders.h"
#include "sgim/text/text.h"

namespace sgim::io {

Checkpoint encoders_to_checkpoint(const model::Encoders& e, double tau);
model::Encoders encoders_from_checkpoint(const Checkpoint& ck, double* tau = nullptr);

Checkpoint generator_to_checkpoint(const gen::Generator& g);
gen::Generator generator_from_checkpoint(const Checkpoint& ck);

// One token per line, in id order, starting with the OOV marker.
void save_vocabulary(const std::filesystem::path& path, const text::Vocabulary& vocab);
text::Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace sgim::io
