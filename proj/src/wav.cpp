#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "sgim/audio/waveform.h"
#include "sgim/errors.h"

namespace sgim::audio {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " in '" + path.string() + "'";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("missing RIFF/WAVE header" + where);
  }

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::size_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      if (id != "data") throw FormatError("truncated '" + id + "' chunk" + where);
    }
    if (id == "fmt ") {
      if (size < 16) throw FormatError("short 'fmt ' chunk" + where);
      const std::uint16_t format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format != 1) {
        throw FormatError("unsupported WAV encoding in 'fmt ' chunk: format tag " +
                          std::to_string(format) + " (only PCM is supported)" + where);
      }
      if (bits != 16) {
        throw FormatError("unsupported WAV sample width in 'fmt ' chunk: " +
                          std::to_string(bits) + " bits (only 16-bit PCM)" + where);
      }
      if (channels != 1 && channels != 2) {
        throw FormatError("unsupported channel count in 'fmt ' chunk: " +
                          std::to_string(channels) + where);
      }
      if (rate == 0) throw FormatError("zero sample rate in 'fmt ' chunk" + where);
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.data() + body;
      data_size = std::min(size, bytes.size() - body);
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw FormatError("no 'fmt ' chunk" + where);
  if (data == nullptr) throw FormatError("no 'data' chunk" + where);

  const std::size_t frame_bytes = 2 * channels;
  const std::size_t frames = data_size / frame_bytes;
  Waveform wave;
  wave.sample_rate = static_cast<int>(rate);
  wave.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    float acc = 0.0f;
    for (std::size_t c = 0; c < channels; ++c) {
      const auto raw = static_cast<std::int16_t>(read_u16(data + i * frame_bytes + 2 * c));
      acc += static_cast<float>(raw) / 32768.0f;
    }
    wave.samples[i] = std::clamp(acc / static_cast<float>(channels), -1.0f, 1.0f);
  }
  return wave;
}

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(wave.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(wave.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (float x : wave.samples) {
    const double q = std::round(static_cast<double>(std::clamp(x, -1.0f, 1.0f)) * 32768.0);
    const auto s = static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(s));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write WAV file '" + path.string() + "'");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for '" + path.string() + "'");
}

Waveform resample_linear(const Waveform& wave, int target_rate) {
  if (target_rate <= 0) throw ContractError("resample_linear: target rate must be positive");
  if (target_rate == wave.sample_rate) return wave;
  const std::size_t n = wave.samples.size();
  const std::size_t out_len = static_cast<std::size_t>(
      (static_cast<unsigned long long>(n) * target_rate) / wave.sample_rate);
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const double step = static_cast<double>(wave.sample_rate) / target_rate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = std::min(i * step, static_cast<double>(n - 1));
    const auto left = static_cast<std::size_t>(pos);
    const std::size_t right = std::min(left + 1, n - 1);
    const double frac = pos - static_cast<double>(left);
    out.samples[i] = static_cast<float>(wave.samples[left] * (1.0 - frac) + wave.samples[right] * frac);
  }
  return out;
}

}  // namespace sgim::audio
