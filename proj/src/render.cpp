#include "sgim/gen/render.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "sgim/errors.h"

namespace sgim::gen {

namespace {

enum class Shape { kCircle, kSquare, kTriangle, kHorizontalBar, kRing, kDiamond, kCross, kVerticalBar };

struct Style {
  std::array<float, 3> background;
  std::array<float, 3> foreground;
  Shape shape;
  double stripe_angle;  // radians
  double stripe_freq;   // cycles per image width
};

const std::array<Style, kRenderClasses> kStyles = {{
    {{-0.8f, -0.7f, -0.1f}, {0.9f, 0.9f, 0.6f}, Shape::kCircle, 0.0, 3.0},
    {{0.5f, 0.3f, 0.0f}, {-0.6f, -0.8f, -0.9f}, Shape::kSquare, std::numbers::pi / 2, 4.0},
    {{-0.3f, -0.2f, -0.3f}, {0.2f, 0.5f, 0.9f}, Shape::kVerticalBar, std::numbers::pi / 2, 6.0},
    {{0.7f, -0.6f, -0.6f}, {0.9f, 0.9f, 0.9f}, Shape::kCross, 0.0, 2.0},
    {{-0.9f, -0.9f, -0.7f}, {0.6f, 0.6f, -0.4f}, Shape::kTriangle, std::numbers::pi / 4, 2.5},
    {{0.8f, 0.8f, 0.8f}, {-0.9f, -0.9f, -0.9f}, Shape::kRing, 0.0, 5.0},
    {{0.4f, 0.1f, -0.6f}, {0.9f, 0.8f, 0.1f}, Shape::kDiamond, -std::numbers::pi / 4, 3.5},
    {{0.1f, 0.5f, 0.6f}, {0.9f, 0.9f, 0.95f}, Shape::kHorizontalBar, 0.0, 1.5},
}};

// Signed distance-like coverage in [0, 1] with a one-pixel soft edge.
double coverage(Shape shape, double dx, double dy, double r) {
  auto soft = [](double d) { return std::clamp(0.5 - d, 0.0, 1.0); };
  switch (shape) {
    case Shape::kCircle:
      return soft(std::hypot(dx, dy) - r);
    case Shape::kSquare:
      return soft(std::max(std::abs(dx), std::abs(dy)) - 0.8 * r);
    case Shape::kTriangle: {
      const double d = std::max(dy - 0.7 * r, (-dy * 0.5 + std::abs(dx) * 0.87) - 0.45 * r);
      return soft(d);
    }
    case Shape::kHorizontalBar:
      return soft(std::max(std::abs(dx) - 1.4 * r, std::abs(dy) - 0.35 * r));
    case Shape::kVerticalBar:
      return soft(std::max(std::abs(dy) - 1.4 * r, std::abs(dx) - 0.35 * r));
    case Shape::kRing:
      return soft(std::abs(std::hypot(dx, dy) - 0.75 * r) - 0.25 * r);
    case Shape::kDiamond:
      return soft((std::abs(dx) + std::abs(dy)) * 0.75 - 0.8 * r);
    case Shape::kCross:
      return std::max(soft(std::max(std::abs(dx) - r, std::abs(dy) - 0.3 * r)),
                      soft(std::max(std::abs(dy) - r, std::abs(dx) - 0.3 * r)));
  }
  return 0.0;
}

// Blends each channel toward its cyclic neighbour; |hue| <= 1 maps to a 20% blend.
std::array<float, 3> shift_hue(const std::array<float, 3>& c, double hue) {
  const double a = 0.2 * std::abs(hue);
  std::array<float, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const int j = hue >= 0 ? (i + 1) % 3 : (i + 2) % 3;
    out[i] = static_cast<float>((1.0 - a) * c[i] + a * c[j]);
  }
  return out;
}

}  // namespace

std::vector<float> latent_noise(std::uint64_t seed, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> z(dim);
  for (auto& v : z) v = u(rng);
  return z;
}

Image render_with_jitter(std::size_t class_id, const std::vector<float>& jitter,
                         std::size_t size) {
  if (class_id >= kRenderClasses) {
    throw ContractError("render class " + std::to_string(class_id) + " out of range (K = " +
                        std::to_string(kRenderClasses) + ")");
  }
  if (size == 0 || size % 4 != 0) throw ContractError("render size must be a positive multiple of 4");
  if (jitter.size() < 3) throw ContractError("render jitter needs at least 3 entries");
  const Style& style = kStyles[class_id];
  const double scale = static_cast<double>(size) / 32.0;
  const double cx = (size - 1) / 2.0 + 4.0 * scale * jitter[0];
  const double cy = (size - 1) / 2.0 + 4.0 * scale * jitter[1];
  const double radius = 8.0 * scale;
  const auto bg = shift_hue(style.background, jitter[2]);
  const auto fg = shift_hue(style.foreground, jitter[2]);
  const double kx = std::cos(style.stripe_angle) * style.stripe_freq / size;
  const double ky = std::sin(style.stripe_angle) * style.stripe_freq / size;

  Image img(3, size, size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double stripe = 0.2 * std::sin(2.0 * std::numbers::pi * (kx * x + ky * y));
      const double cover = coverage(style.shape, x - cx, y - cy, radius);
      for (std::size_t c = 0; c < 3; ++c) {
        const double back = bg[c] + stripe;
        const double v = (1.0 - cover) * back + cover * fg[c];
        img.at(c, y, x) = static_cast<float>(std::clamp(v, -1.0, 1.0));
      }
    }
  }
  return img;
}

Image render_procedural(std::size_t class_id, std::uint64_t seed, std::size_t size) {
  return render_with_jitter(class_id, latent_noise(seed, 3), size);
}

}  // namespace sgim::gen
