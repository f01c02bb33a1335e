#include "sgim/io/ppm.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "sgim/errors.h"

namespace sgim::io {

std::uint8_t to_byte(float x) {
  const double v = std::round((static_cast<double>(x) + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 3) throw ContractError("PPM output needs a 3-channel image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  std::vector<char> bytes;
  bytes.reserve(image.size());
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) bytes.push_back(static_cast<char>(to_byte(image.at(c, y, x))));
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

// Next whitespace-delimited header field, skipping # comments.
std::string header_field(std::istream& in, const std::string& where) {
  std::string field;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!field.empty()) return field;
      continue;
    }
    field.push_back(static_cast<char>(ch));
  }
  if (field.empty()) throw FormatError(where + ": truncated PPM header");
  return field;
}

std::size_t header_number(std::istream& in, const std::string& where) {
  const auto f = header_field(in, where);
  if (f.empty() || !std::all_of(f.begin(), f.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw FormatError(where + ": bad PPM header field '" + f + "'");
  }
  return std::stoul(f);
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string where = path.string();
  if (header_field(in, where) != "P6") throw FormatError(where + ": not a binary PPM (P6)");
  const std::size_t width = header_number(in, where);
  const std::size_t height = header_number(in, where);
  const std::size_t maxval = header_number(in, where);
  if (width == 0 || height == 0 || maxval != 255) {
    throw FormatError(where + ": only non-empty 8-bit PPM images are supported");
  }
  std::vector<unsigned char> bytes(width * height * 3);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw FormatError(where + ": truncated PPM pixel data");
  }
  Image img(3, height, width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        img.at(c, y, x) = static_cast<float>(bytes[(y * width + x) * 3 + c] / 127.5 - 1.0);
      }
    }
  }
  return img;
}

}  // namespace sgim::io
