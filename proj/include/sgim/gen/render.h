#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgim/image.h"

namespace sgim::gen {

inline constexpr std::size_t kRenderClasses = 8;

// Noise vector paired with a render seed: uniform in [-1, 1]^dim. The first
// three entries drive the renderer's jitter (x offset, y offset, hue), so a
// generator fed this vector can reproduce the seed's image.
std::vector<float> latent_noise(std::uint64_t seed, std::size_t dim);

// Class-specific pattern: background color, foreground shape and stripe
// texture, with seed-controlled jitter of position and hue.
// Throws ContractError for class ids >= kRenderClasses or size not a multiple of 4.
Image render_procedural(std::size_t class_id, std::uint64_t seed, std::size_t size = 32);

// Same, from an explicit jitter vector (entries beyond the first three ignored).
Image render_with_jitter(std::size_t class_id, const std::vector<float>& jitter,
                         std::size_t size = 32);

}  // namespace sgim::gen
