#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "sgim/audio/features.h"
#include "sgim/audio/synth.h"
#include "sgim/errors.h"

using namespace sgim;
using namespace sgim::audio;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "sgim_audio_test";
  fs::create_directories(dir);
  return dir / name;
}

void put16(std::string& s, unsigned v) {
  s.push_back(char(v & 0xff));
  s.push_back(char((v >> 8) & 0xff));
}
void put32(std::string& s, unsigned v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

// Hand-assembled RIFF file, independent of write_wav.
void write_raw_wav(const fs::path& path, unsigned format, unsigned channels, unsigned rate,
                   unsigned bits, const std::string& payload) {
  std::string s = "RIFF";
  put32(s, 36 + payload.size());
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, format);
  put16(s, channels);
  put32(s, rate);
  put32(s, rate * channels * bits / 8);
  put16(s, channels * bits / 8);
  put16(s, bits);
  s += "data";
  put32(s, payload.size());
  s += payload;
  std::ofstream(path, std::ios::binary) << s;
}

std::vector<double> naive_dft_magnitude(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * k * t / n);
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

Waveform sine(double hz, double seconds, int rate, double amp = 0.5) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * i / rate));
  }
  return w;
}

}  // namespace

TEST(LoadWav, ZerosFile) {
  auto path = temp_path("zeros.wav");
  write_raw_wav(path, 1, 1, 16000, 16, std::string(32000, '\0'));
  auto w = load_wav(path);
  EXPECT_EQ(w.sample_rate, 16000);
  ASSERT_EQ(w.samples.size(), 16000u);
  for (float s : w.samples) EXPECT_EQ(s, 0.0f);
}

TEST(LoadWav, FullScaleSample) {
  auto path = temp_path("max.wav");
  std::string payload;
  put16(payload, 32767);
  put16(payload, 0x8000);
  write_raw_wav(path, 1, 1, 8000, 16, payload);
  auto w = load_wav(path);
  EXPECT_FLOAT_EQ(w.samples[0], 32767.0f / 32768.0f);
  EXPECT_NEAR(w.samples[0], 0.99997, 1e-5);
  EXPECT_FLOAT_EQ(w.samples[1], -1.0f);
}

TEST(LoadWav, StereoIsAveraged) {
  auto path = temp_path("stereo.wav");
  std::string payload;
  put16(payload, 16384);
  put16(payload, 0);
  write_raw_wav(path, 1, 2, 22050, 16, payload);
  auto w = load_wav(path);
  EXPECT_EQ(w.sample_rate, 22050);
  ASSERT_EQ(w.samples.size(), 1u);
  EXPECT_FLOAT_EQ(w.samples[0], 0.25f);
}

TEST(LoadWav, FloatFormatRejectedNamingChunk) {
  auto path = temp_path("float.wav");
  write_raw_wav(path, 3, 1, 16000, 32, std::string(16, '\0'));
  try {
    load_wav(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("'fmt '"), std::string::npos) << e.what();
  }
}

TEST(LoadWav, MissingFileIsIoError) {
  EXPECT_THROW(load_wav(temp_path("does_not_exist.wav")), IoError);
}

TEST(WriteWav, GridSamplesRoundTripExactly) {
  Waveform w;
  w.sample_rate = 16000;
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> q(-32768, 32767);
  for (int i = 0; i < 500; ++i) w.samples.push_back(static_cast<float>(q(rng)) / 32768.0f);
  auto path = temp_path("roundtrip.wav");
  write_wav(path, w);
  auto back = load_wav(path);
  EXPECT_EQ(back.sample_rate, 16000);
  EXPECT_EQ(back.samples, w.samples);
}

TEST(Resample, SameRateIsIdentity) {
  auto w = synth_class_audio(3, 9, 0.1);
  auto r = resample_linear(w, w.sample_rate);
  EXPECT_EQ(r.samples, w.samples);
}

TEST(Resample, ConstantStaysConstant) {
  Waveform w;
  w.sample_rate = 44100;
  w.samples.assign(4410, 0.3f);
  auto r = resample_linear(w, 16000);
  EXPECT_EQ(r.samples.size(), 4410u * 16000 / 44100);
  for (float s : r.samples) EXPECT_FLOAT_EQ(s, 0.3f);
}

TEST(Resample, RampUpsampledMatchesClosedForm) {
  Waveform w;
  w.sample_rate = 8000;
  const std::size_t n = 800;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(static_cast<float>(i) / (n - 1));
  auto r = resample_linear(w, 16000);
  ASSERT_EQ(r.samples.size(), 2 * n);
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const double pos = std::min(i * 0.5, double(n - 1));
    EXPECT_NEAR(r.samples[i], pos / (n - 1), 1e-6) << i;
  }
}

TEST(Stft, ZeroSignal) {
  Waveform w;
  w.samples.assign(4096, 0.0f);
  auto m = stft_magnitude(w);
  EXPECT_EQ(m.rows, 513u);
  EXPECT_EQ(m.cols, 1 + (4096 - 1024) / 256u);
  for (float v : m.values) EXPECT_EQ(v, 0.0f);
}

TEST(Stft, SingleFrameWhenLengthEqualsWindow) {
  auto w = sine(1000, 1024.0 / 16000, 16000);
  ASSERT_EQ(w.samples.size(), 1024u);
  EXPECT_EQ(stft_magnitude(w, 1024, 256).cols, 1u);
}

TEST(Stft, BinCenteredSineConcentrates) {
  const std::size_t window = 256, k = 19;
  const double hz = k * 16000.0 / window;
  auto w = sine(hz, 0.25, 16000);
  auto m = stft_magnitude(w, window, 64);

  // Oracle: naive DFT of the first Hann-windowed frame.
  std::vector<double> frame(window);
  for (std::size_t n = 0; n < window; ++n) {
    frame[n] = w.samples[n] * (0.5 - 0.5 * std::cos(2 * std::numbers::pi * n / window));
  }
  auto oracle = naive_dft_magnitude(frame);
  std::size_t oracle_arg = std::max_element(oracle.begin(), oracle.end()) - oracle.begin();
  EXPECT_EQ(oracle_arg, k);
  for (std::size_t b = 0; b < m.rows; ++b) EXPECT_NEAR(m(b, 0), oracle[b], 1e-3);

  for (std::size_t f = 0; f < m.cols; ++f) {
    std::size_t arg = 0;
    for (std::size_t b = 1; b < m.rows; ++b)
      if (m(b, f) > m(arg, f)) arg = b;
    EXPECT_EQ(arg, k) << "frame " << f;
  }
}

TEST(Stft, ContractErrors) {
  Waveform short_wave;
  short_wave.samples.assign(100, 0.0f);
  EXPECT_THROW(stft_magnitude(short_wave), ContractError);
  Waveform w;
  w.samples.assign(2048, 0.0f);
  EXPECT_THROW(stft_magnitude(w, 1000, 256), ContractError);
  EXPECT_THROW(stft_magnitude(w, 1024, 2048), ContractError);
}

TEST(Mel, ScaleClosedForm) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(hz_to_mel(700.0), 781.17, 0.01);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(1234.5)), 1234.5, 1e-9);
}

TEST(Mel, FilterbankPeaksAtRederivedCenters) {
  const std::size_t bins = 513, mels = 80;
  auto fb = mel_filterbank(bins, mels, 16000);
  ASSERT_EQ(fb.rows, mels);
  ASSERT_EQ(fb.cols, bins);
  for (float v : fb.values) EXPECT_GE(v, 0.0f);
  // Oracle: centers re-derived directly from the mel formula.
  const double top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  for (std::size_t m = 0; m < mels; ++m) {
    const double mel_c = top * (m + 1) / (mels + 1);
    const double hz = 700.0 * (std::pow(10.0, mel_c / 2595.0) - 1.0);
    const auto center = static_cast<std::size_t>(std::lround(hz / (8000.0 / (bins - 1))));
    float mx = 0;
    for (std::size_t k = 0; k < bins; ++k) mx = std::max(mx, fb(m, k));
    EXPECT_EQ(mx, 1.0f) << m;
    EXPECT_EQ(fb(m, center), 1.0f) << m;
  }
}

TEST(LogMel, ZeroSignalHitsFloor) {
  Waveform w;
  w.samples.assign(16000, 0.0f);
  auto mel = log_mel(w);
  EXPECT_EQ(mel.bins(), 80u);
  for (float v : mel.values.values) EXPECT_EQ(v, std::log(1e-10f));
}

TEST(LogMel, TwoSecondFrameCount) {
  auto w = sine(440, 2.0, 16000);
  auto mel = log_mel(w);
  EXPECT_EQ(mel.frames(), 1 + (32000 - 1024) / 256u);
  EXPECT_EQ(mel.frames(), 122u);
}

TEST(LogMel, AmplitudeDoublingAddsLogTwo) {
  auto w = synth_class_audio(1, 5, 0.5);
  Waveform doubled = w;
  for (auto& s : doubled.samples) s *= 2.0f;  // no clamping needed for the check
  auto a = log_mel(w);
  auto b = log_mel(doubled);
  const float floor_v = a.floor_value();
  for (std::size_t i = 0; i < a.values.values.size(); ++i) {
    const float x = a.values.values[i], y = b.values.values[i];
    EXPECT_LE(y - x, std::log(2.0) + 1e-6);
    EXPECT_GE(y, x);
    if (x > floor_v + 1.0f) EXPECT_NEAR(y - x, std::log(2.0), 1e-5);
  }
}

TEST(LogMel, MonotoneUnderScaling) {
  auto w = synth_class_audio(2, 17, 0.4);
  for (float c : {1.1f, 1.7f, 3.0f}) {
    Waveform s = w;
    for (auto& v : s.samples) v *= c;
    auto a = log_mel(w), b = log_mel(s);
    for (std::size_t i = 0; i < a.values.values.size(); ++i) {
      EXPECT_GE(b.values.values[i], a.values.values[i]);
    }
  }
}

TEST(SpecAugment, ZeroRatiosLeaveInputUnchanged) {
  auto mel = log_mel(synth_class_audio(0, 1));
  auto out = spec_augment(mel, 0.0, 0.0, 42);
  EXPECT_EQ(out.values, mel.values);
}

TEST(SpecAugment, MasksExactBandsAndNothingElse) {
  MelSpectrogram mel;
  mel.values = Matrix(80, 100);
  std::mt19937 rng(2);
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  for (auto& v : mel.values.values) v = u(rng);
  const float fill = mel.floor_value();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto out = spec_augment(mel, 0.15, 0.3, seed);
    std::size_t masked_rows = 0, masked_cols = 0;
    std::vector<bool> row_masked(80), col_masked(100);
    for (std::size_t r = 0; r < 80; ++r) {
      bool all = true;
      for (std::size_t c = 0; c < 100; ++c) all &= out.values(r, c) == fill;
      row_masked[r] = all;
      masked_rows += all;
    }
    for (std::size_t c = 0; c < 100; ++c) {
      bool all = true;
      for (std::size_t r = 0; r < 80; ++r) all &= out.values(r, c) == fill;
      col_masked[c] = all;
      masked_cols += all;
    }
    EXPECT_EQ(masked_rows, 12u);
    EXPECT_EQ(masked_cols, 30u);
    for (std::size_t r = 0; r < 80; ++r)
      for (std::size_t c = 0; c < 100; ++c)
        if (!row_masked[r] && !col_masked[c]) ASSERT_EQ(out.values(r, c), mel.values(r, c));
  }
  EXPECT_THROW(spec_augment(mel, 1.0, 0.1, 0), ContractError);
}

TEST(Synth, DeterministicAndBounded) {
  for (std::size_t k = 0; k < kSynthClasses; ++k) {
    auto a = synth_class_audio(k, 77);
    auto b = synth_class_audio(k, 77);
    EXPECT_EQ(a.samples, b.samples);
    for (float s : a.samples) {
      ASSERT_LE(s, 1.0f);
      ASSERT_GE(s, -1.0f);
    }
  }
  EXPECT_NE(synth_class_audio(4, 1).samples, synth_class_audio(4, 2).samples);
  EXPECT_THROW(synth_class_audio(kSynthClasses, 0), ContractError);
}

TEST(Synth, PureToneClassPeaksAtBaseFrequency) {
  const double base = class_base_frequency(0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto w = synth_class_audio(0, seed, 0.25);
    std::vector<double> x(4000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = w.samples[i];
    auto mag = naive_dft_magnitude(x);
    const std::size_t arg = std::max_element(mag.begin() + 1, mag.end()) - mag.begin();
    const double peak_hz = arg * 16000.0 / x.size();
    EXPECT_NEAR(peak_hz, base, 0.02 * base + 16000.0 / x.size()) << seed;
  }
}
