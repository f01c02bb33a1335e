#pragma once

#include <cstddef>
#include <cstdint>

#include "sgim/audio/waveform.h"

namespace sgim::audio {

// Number of built-in synthetic sound classes.
inline constexpr std::size_t kSynthClasses = 8;

// Deterministic clip for (class_id, seed). Each class mixes its own set of
// sinusoid partials, amplitude envelope and noise level; the seed jitters
// all partial frequencies by a common factor within +-2%, the partial
// phases, the gain and the noise realization. Samples are clamped to [-1, 1].
Waveform synth_class_audio(std::size_t class_id, std::uint64_t seed, double duration = 1.0,
                           int sample_rate = 16000);

// Frequency of the loudest partial of a class before jitter.
double class_base_frequency(std::size_t class_id);

}  // namespace sgim::audio
