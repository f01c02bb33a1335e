#pragma once

#include <cstddef>
#include <cstdint>

#include "sgim/audio/waveform.h"
#include "sgim/matrix.h"

namespace sgim::audio {

struct MelParams {
  int sample_rate = 16000;
  std::size_t window = 1024;
  std::size_t hop = 256;
  std::size_t mel_bins = 80;
  float log_floor = 1e-10f;
};

// Log-mel energies, bins x frames.
struct MelSpectrogram {
  Matrix values;
  MelParams params;

  std::size_t bins() const { return values.rows; }
  std::size_t frames() const { return values.cols; }
  float floor_value() const;
};

// Hann-windowed magnitude spectrum without padding:
// (window/2 + 1) x (1 + (len - window) / hop).
Matrix stft_magnitude(const Waveform& wave, std::size_t window = 1024, std::size_t hop = 256);

// HTK mel scale: 2595 * log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters (peak 1 at the center bin) with centers uniformly spaced
// on the mel scale between 0 Hz and sample_rate / 2. Returns n_mels x n_fft_bins.
Matrix mel_filterbank(std::size_t n_fft_bins, std::size_t n_mels, int sample_rate);

// log(max(floor, filterbank * |STFT|)). Input at a different rate is
// resampled to params.sample_rate first.
MelSpectrogram log_mel(const Waveform& wave, const MelParams& params = {});

// Sets one band of floor(freq_ratio * bins) rows and one band of
// floor(time_ratio * frames) columns to the log floor. Band starts are
// uniform over the valid range, drawn from seed.
MelSpectrogram spec_augment(const MelSpectrogram& mel, double freq_ratio, double time_ratio,
                            std::uint64_t seed);

}  // namespace sgim::audio
