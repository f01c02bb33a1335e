#include "sgim/audio/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "sgim/errors.h"

namespace sgim::audio {

namespace {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace

float MelSpectrogram::floor_value() const { return std::log(params.log_floor); }

Matrix stft_magnitude(const Waveform& wave, std::size_t window, std::size_t hop) {
  if (!is_power_of_two(window)) {
    throw ContractError("stft_magnitude: window " + std::to_string(window) +
                        " is not a power of two");
  }
  if (hop == 0 || hop > window) {
    throw ContractError("stft_magnitude: hop " + std::to_string(hop) + " must be in [1, window]");
  }
  const std::size_t len = wave.samples.size();
  if (len < window) {
    throw ContractError("stft_magnitude: signal of " + std::to_string(len) +
                        " samples is shorter than the window (" + std::to_string(window) + ")");
  }
  const std::size_t frames = 1 + (len - window) / hop;
  const std::size_t bins = window / 2 + 1;

  std::vector<double> hann(window);
  for (std::size_t n = 0; n < window; ++n) {
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / static_cast<double>(window));
  }

  Matrix out(bins, frames);
  std::vector<std::complex<double>> buf(window);
  for (std::size_t f = 0; f < frames; ++f) {
    const float* frame = wave.samples.data() + f * hop;
    for (std::size_t n = 0; n < window; ++n) buf[n] = {frame[n] * hann[n], 0.0};
    fft(buf);
    for (std::size_t k = 0; k < bins; ++k) out(k, f) = static_cast<float>(std::abs(buf[k]));
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(std::size_t n_fft_bins, std::size_t n_mels, int sample_rate) {
  if (n_mels < 2) throw ContractError("mel_filterbank: need at least 2 mel bins");
  if (n_fft_bins < 2) throw ContractError("mel_filterbank: need at least 2 FFT bins");
  const double nyquist = sample_rate / 2.0;
  const double bin_hz = nyquist / static_cast<double>(n_fft_bins - 1);
  const double mel_max = hz_to_mel(nyquist);

  // n_mels + 2 edge points; filter m spans points m, m+1, m+2.
  std::vector<std::size_t> points(n_mels + 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double hz = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));
    points[i] = std::min(static_cast<std::size_t>(std::lround(hz / bin_hz)), n_fft_bins - 1);
  }

  Matrix fb(n_mels, n_fft_bins);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const std::size_t left = points[m], center = points[m + 1], right = points[m + 2];
    for (std::size_t k = left; k < center; ++k) {
      fb(m, k) = static_cast<float>(k - left) / static_cast<float>(center - left);
    }
    fb(m, center) = 1.0f;
    for (std::size_t k = center + 1; k <= right; ++k) {
      fb(m, k) = static_cast<float>(right - k) / static_cast<float>(right - center);
    }
  }
  return fb;
}

MelSpectrogram log_mel(const Waveform& wave, const MelParams& params) {
  const Waveform& input =
      wave.sample_rate == params.sample_rate ? wave : resample_linear(wave, params.sample_rate);
  const Matrix mag = stft_magnitude(input, params.window, params.hop);
  const Matrix fb = mel_filterbank(mag.rows, params.mel_bins, params.sample_rate);

  MelSpectrogram mel;
  mel.params = params;
  mel.values = Matrix(params.mel_bins, mag.cols);
  for (std::size_t m = 0; m < fb.rows; ++m) {
    for (std::size_t f = 0; f < mag.cols; ++f) {
      double e = 0.0;
      for (std::size_t k = 0; k < fb.cols; ++k) {
        const float w = fb(m, k);
        if (w != 0.0f) e += static_cast<double>(w) * mag(k, f);
      }
      mel.values(m, f) = std::log(std::max(params.log_floor, static_cast<float>(e)));
    }
  }
  return mel;
}

MelSpectrogram spec_augment(const MelSpectrogram& mel, double freq_ratio, double time_ratio,
                            std::uint64_t seed) {
  if (freq_ratio < 0.0 || freq_ratio >= 1.0 || time_ratio < 0.0 || time_ratio >= 1.0) {
    throw ContractError("spec_augment: mask ratios must lie in [0, 1)");
  }
  MelSpectrogram out = mel;
  const std::size_t bins = mel.bins(), frames = mel.frames();
  const auto freq_width = static_cast<std::size_t>(std::floor(freq_ratio * bins + 1e-9));
  const auto time_width = static_cast<std::size_t>(std::floor(time_ratio * frames + 1e-9));
  std::mt19937_64 rng(seed);
  const float fill = mel.floor_value();
  if (freq_width > 0) {
    std::uniform_int_distribution<std::size_t> start(0, bins - freq_width);
    const std::size_t f0 = start(rng);
    for (std::size_t r = f0; r < f0 + freq_width; ++r)
      for (std::size_t c = 0; c < frames; ++c) out.values(r, c) = fill;
  }
  if (time_width > 0) {
    std::uniform_int_distribution<std::size_t> start(0, frames - time_width);
    const std::size_t t0 = start(rng);
    for (std::size_t r = 0; r < bins; ++r)
      for (std::size_t c = t0; c < t0 + time_width; ++c) out.values(r, c) = fill;
  }
  return out;
}

}  // namespace sgim::audio
