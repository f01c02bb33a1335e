#include "sgim/audio/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sgim/errors.h"

namespace sgim::audio {

namespace {

struct Partial {
  double hz;
  double amplitude;
};

enum class Envelope { kSteady, kDecay, kTremolo, kPulses, kSwell };

struct Recipe {
  std::vector<Partial> partials;
  Envelope envelope;
  double rate;         // decay constant (1/s) or modulation frequency (Hz)
  double noise;        // white-noise standard deviation before gain
  double noise_smooth; // one-pole low-pass coefficient for the noise, 0 = white
};

const std::array<Recipe, kSynthClasses>& recipes() {
  static const std::array<Recipe, kSynthClasses> table = {{
      // 0 whistle: a single pure tone.
      {{{1000.0, 0.8}}, Envelope::kSteady, 0.0, 0.01, 0.0},
      // 1 piano: harmonic series with exponential decay.
      {{{220.0, 0.5}, {440.0, 0.25}, {660.0, 0.15}, {880.0, 0.08}, {1100.0, 0.05}},
       Envelope::kDecay, 3.0, 0.01, 0.0},
      // 2 rain: broadband noise over a faint high partial.
      {{{3200.0, 0.05}}, Envelope::kSteady, 0.0, 0.30, 0.0},
      // 3 siren: two partials under fast tremolo.
      {{{600.0, 0.5}, {1200.0, 0.3}}, Envelope::kTremolo, 6.0, 0.02, 0.0},
      // 4 thunder: low partials in low-passed noise, slow decay.
      {{{55.0, 0.4}, {82.0, 0.3}, {110.0, 0.2}}, Envelope::kDecay, 1.2, 0.35, 0.9},
      // 5 clock: short pulses of a high partial.
      {{{2500.0, 0.7}, {5000.0, 0.2}}, Envelope::kPulses, 4.0, 0.01, 0.0},
      // 6 bell: inharmonic partials, decaying.
      {{{523.0, 0.4}, {1320.0, 0.3}, {2150.0, 0.2}, {2900.0, 0.1}}, Envelope::kDecay, 2.0, 0.01,
       0.0},
      // 7 wind: low-passed noise with a slow swell and a weak drone.
      {{{180.0, 0.1}}, Envelope::kSwell, 0.7, 0.45, 0.97},
  }};
  return table;
}

const Recipe& recipe(std::size_t class_id) {
  if (class_id >= kSynthClasses) {
    throw ContractError("synthetic audio class " + std::to_string(class_id) +
                        " out of range (K = " + std::to_string(kSynthClasses) + ")");
  }
  return recipes()[class_id];
}

double envelope(const Recipe& r, double t, double duration, double phase) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  switch (r.envelope) {
    case Envelope::kSteady:
      return 1.0;
    case Envelope::kDecay:
      return std::exp(-r.rate * t);
    case Envelope::kTremolo:
      return 0.5 + 0.5 * std::sin(kTwoPi * r.rate * t + phase);
    case Envelope::kPulses: {
      const double cycle = std::fmod(t * r.rate + phase / kTwoPi, 1.0);
      return cycle < 0.15 ? 1.0 : 0.0;
    }
    case Envelope::kSwell: {
      const double s = std::sin(std::numbers::pi * t / duration + 0.3 * phase);
      return 0.4 + 0.6 * s * s;
    }
  }
  return 1.0;
}

}  // namespace

double class_base_frequency(std::size_t class_id) {
  const auto& parts = recipe(class_id).partials;
  return std::max_element(parts.begin(), parts.end(), [](const Partial& a, const Partial& b) {
           return a.amplitude < b.amplitude;
         })->hz;
}

Waveform synth_class_audio(std::size_t class_id, std::uint64_t seed, double duration,
                           int sample_rate) {
  const Recipe& r = recipe(class_id);
  if (!(duration > 0.0) || sample_rate <= 0) {
    throw ContractError("synth_class_audio: duration and sample rate must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double detune = 1.0 + 0.02 * unit(rng);
  const double gain = 0.6 + 0.4 * (0.5 + 0.5 * unit(rng));
  const double env_phase = angle(rng);
  std::vector<double> phases(r.partials.size());
  for (auto& p : phases) p = angle(rng);

  const auto n = static_cast<std::size_t>(duration * sample_rate);
  Waveform wave;
  wave.sample_rate = sample_rate;
  wave.samples.resize(n);
  double noise_state = 0.0;
  const double noise_norm = r.noise_smooth > 0.0
                                ? std::sqrt((1.0 + r.noise_smooth) / (1.0 - r.noise_smooth))
                                : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double tone = 0.0;
    for (std::size_t k = 0; k < r.partials.size(); ++k) {
      tone += r.partials[k].amplitude *
              std::sin(2.0 * std::numbers::pi * r.partials[k].hz * detune * t + phases[k]);
    }
    noise_state = r.noise_smooth * noise_state + (1.0 - r.noise_smooth) * gauss(rng);
    const double noise = r.noise * noise_state * noise_norm;
    const double x = gain * envelope(r, t, duration, env_phase) * (tone + noise);
    wave.samples[i] = static_cast<float>(std::clamp(x, -1.0, 1.0));
  }
  return wave;
}

}  // namespace sgim::audio
