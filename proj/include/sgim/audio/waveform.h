#pragma once

#include <filesystem>
#include <vector>

namespace sgim::audio {

struct Waveform {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = 16000;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE file with 16-bit PCM samples, mono or stereo. Stereo is
// averaged to mono and samples are scaled by 1/32768.
// Throws IoError if the file cannot be read and FormatError for anything
// other than uncompressed 16-bit PCM.
Waveform load_wav(const std::filesystem::path& path);

// Writes mono 16-bit PCM. Values are clamped to [-1, 1] and quantized as
// round(x * 32768), saturating at 32767, so samples on the 1/32768 grid
// survive a write/load round trip exactly.
void write_wav(const std::filesystem::path& path, const Waveform& wave);

// Linear interpolation to target_rate; output length is
// floor(len * target / source). Same rate returns the input unchanged.
Waveform resample_linear(const Waveform& wave, int target_rate);

}  // namespace sgim::audio
