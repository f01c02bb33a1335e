#pragma once

// Toy style-based generator. A learned constant passes through L modulated
// layers; layer l reads row l of the latent code w (L x D):
//   h_{l+1} = tanh((h_l W_l) * (w_l A_l + a_l) + w_l B_l + b_l)
// and a final linear map plus tanh produces a 3 x H x W image. A mapping
// perceptron turns (class one-hot, noise z) into one D-vector per sample.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sgim/autodiff/ops.h"
#include "sgim/image.h"
#include "sgim/model/encoders.h"

namespace sgim::gen {

// Fixed gain on mapped styles. Keeps W compact so that latent steps of a
// given size move the image appreciably.
inline constexpr double kStyleScale = 0.1;

struct GenConfig {
  std::size_t layers = 8;
  std::size_t style_dim = 32;
  std::size_t units = 64;
  std::size_t image_size = 32;
  std::size_t channels = 3;
  std::size_t noise_dim = 8;
  std::size_t classes = 8;
  std::size_t mapping_hidden = 64;

  std::size_t pixels() const { return channels * image_size * image_size; }
  void validate() const;
};

template <typename T>
struct GeneratorParams {
  GenConfig config;
  ad::BasicTensor<T> const_input;  // 1 x units
  std::vector<ad::BasicTensor<T>> weight, scale_proj, scale_bias, shift_proj, shift_bias;
  ad::BasicTensor<T> out_w, out_b;

  static GeneratorParams init(const GenConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    GeneratorParams p;
    p.config = cfg;
    std::vector<T> c(cfg.units);
    for (auto& v : c) v = static_cast<T>(normal(rng));
    p.const_input = ad::BasicTensor<T>::from({1, cfg.units}, std::move(c), true);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      p.weight.push_back(model::glorot<T>(cfg.units, cfg.units, rng));
      p.scale_proj.push_back(model::glorot<T>(cfg.style_dim, cfg.units, rng));
      p.scale_bias.push_back(ad::BasicTensor<T>::full({1, cfg.units}, T(1), true));
      p.shift_proj.push_back(model::glorot<T>(cfg.style_dim, cfg.units, rng));
      p.shift_bias.push_back(ad::BasicTensor<T>::zeros({1, cfg.units}, true));
    }
    p.out_w = model::glorot<T>(cfg.units, cfg.pixels(), rng);
    p.out_b = ad::BasicTensor<T>::zeros({1, cfg.pixels()}, true);
    return p;
  }

  std::vector<ad::BasicTensor<T>> parameters() const {
    std::vector<ad::BasicTensor<T>> out{const_input};
    for (std::size_t l = 0; l < weight.size(); ++l) {
      for (const auto* t : {&weight[l], &scale_proj[l], &scale_bias[l], &shift_proj[l], &shift_bias[l]}) {
        out.push_back(*t);
      }
    }
    out.push_back(out_w);
    out.push_back(out_b);
    return out;
  }

  template <typename U>
  GeneratorParams<U> cast(bool requires_grad = false) const {
    GeneratorParams<U> p;
    p.config = config;
    auto conv = [&](const ad::BasicTensor<T>& t) { return t.template cast<U>(requires_grad); };
    p.const_input = conv(const_input);
    for (std::size_t l = 0; l < weight.size(); ++l) {
      p.weight.push_back(conv(weight[l]));
      p.scale_proj.push_back(conv(scale_proj[l]));
      p.scale_bias.push_back(conv(scale_bias[l]));
      p.shift_proj.push_back(conv(shift_proj[l]));
      p.shift_bias.push_back(conv(shift_bias[l]));
    }
    p.out_w = conv(out_w);
    p.out_b = conv(out_b);
    return p;
  }
};

template <typename T>
struct MappingParams {
  ad::BasicTensor<T> w1, b1, w2, b2;

  static MappingParams init(const GenConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MappingParams m;
    m.w1 = model::glorot<T>(cfg.classes + cfg.noise_dim, cfg.mapping_hidden, rng);
    m.b1 = ad::BasicTensor<T>::zeros({1, cfg.mapping_hidden}, true);
    m.w2 = model::glorot<T>(cfg.mapping_hidden, cfg.style_dim, rng);
    m.b2 = ad::BasicTensor<T>::zeros({1, cfg.style_dim}, true);
    return m;
  }

  std::vector<ad::BasicTensor<T>> parameters() const { return {w1, b1, w2, b2}; }

  template <typename U>
  MappingParams<U> cast(bool requires_grad = false) const {
    return {w1.template cast<U>(requires_grad), b1.template cast<U>(requires_grad),
            w2.template cast<U>(requires_grad), b2.template cast<U>(requires_grad)};
  }
};

// styles[l] holds layer l's style rows, N x D. Returns N x (3*H*W).
template <typename T>
ad::BasicTensor<T> synthesize(const std::vector<ad::BasicTensor<T>>& styles,
                              const GeneratorParams<T>& p) {
  const auto& c = p.config;
  if (styles.size() != c.layers) {
    throw DimensionError("generator expects " + std::to_string(c.layers) + " style rows, got " +
                         std::to_string(styles.size()));
  }
  ad::BasicTensor<T> h = p.const_input;
  for (std::size_t l = 0; l < c.layers; ++l) {
    if (styles[l].rank() != 2 || styles[l].cols() != c.style_dim) {
      throw DimensionError("style row must have " + std::to_string(c.style_dim) +
                           " entries, got " + ad::shape_string(styles[l].shape()));
    }
    auto scale = ad::add(ad::matmul(styles[l], p.scale_proj[l]), p.scale_bias[l]);
    auto shift = ad::add(ad::matmul(styles[l], p.shift_proj[l]), p.shift_bias[l]);
    h = ad::tanh(ad::add(ad::mul(scale, ad::matmul(h, p.weight[l])), shift));
  }
  return ad::tanh(ad::add(ad::matmul(h, p.out_w), p.out_b));
}

// w: L x D latent code. Returns 1 x (3*H*W).
template <typename T>
ad::BasicTensor<T> generate(const ad::BasicTensor<T>& w, const GeneratorParams<T>& p) {
  const auto& c = p.config;
  if (w.rank() != 2 || w.rows() != c.layers || w.cols() != c.style_dim) {
    throw DimensionError("latent code must be " + std::to_string(c.layers) + "x" +
                         std::to_string(c.style_dim) + ", got " + ad::shape_string(w.shape()));
  }
  std::vector<ad::BasicTensor<T>> styles;
  for (std::size_t l = 0; l < c.layers; ++l) styles.push_back(ad::slice_rows(w, l, l + 1));
  return synthesize(styles, p);
}

// Rows of (one-hot class, z) -> N x D style vectors.
template <typename T>
ad::BasicTensor<T> map_styles(const std::vector<std::size_t>& classes,
                              const std::vector<std::vector<float>>& noise,
                              const MappingParams<T>& m, const GenConfig& cfg) {
  if (classes.empty() || classes.size() != noise.size()) {
    throw ContractError("mapping needs one noise vector per class id");
  }
  const std::size_t width = cfg.classes + cfg.noise_dim;
  std::vector<T> x(classes.size() * width, T(0));
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] >= cfg.classes) {
      throw ContractError("class id " + std::to_string(classes[i]) + " out of range");
    }
    if (noise[i].size() != cfg.noise_dim) {
      throw DimensionError("noise vector must have " + std::to_string(cfg.noise_dim) +
                           " entries, got " + std::to_string(noise[i].size()));
    }
    x[i * width + classes[i]] = T(1);
    for (std::size_t j = 0; j < cfg.noise_dim; ++j) x[i * width + cfg.classes + j] = noise[i][j];
  }
  const auto input = ad::BasicTensor<T>::from({classes.size(), width}, std::move(x));
  const auto h = ad::tanh(ad::add(ad::matmul(input, m.w1), m.b1));
  return ad::affine(ad::add(ad::matmul(h, m.w2), m.b2), static_cast<T>(kStyleScale));
}

struct Generator {
  GenConfig config;
  GeneratorParams<float> synthesis;
  MappingParams<float> mapping;

  static Generator init(const GenConfig& cfg, std::uint64_t seed);
  // Detached, gradient-free copy for inference and manipulation.
  Generator frozen() const;
};

// One mapped D-vector copied into all L rows (a W-space code).
ad::Tensor map_latent(std::size_t class_id, const std::vector<float>& z, const Generator& g);

Image generate_image(const ad::Tensor& w, const Generator& g);
Image to_image(std::span<const float> row, const GenConfig& cfg);

struct PretrainConfig {
  std::size_t steps = 5000;
  std::size_t batch = 16;
  double lr = 2e-3;
  double mse_threshold = 0.05;
  std::size_t eval_samples = 64;
  std::uint64_t seed = 0;
};

// Mean squared pixel error of generate(map_latent(k, z)) against
// render_procedural(k, s) with z = latent_noise(s), over n seeded samples.
double reconstruction_mse(const Generator& g, std::size_t n, std::uint64_t seed);

struct PretrainResult {
  Generator generator;
  double final_mse = 0.0;
  std::vector<double> trace;  // per-step batch loss
};

// Paired reconstruction against the procedural renderer, optimized with Adam.
// Throws ConvergenceError carrying the final held-out MSE when it is not
// below cfg.mse_threshold after cfg.steps steps.
PretrainResult pretrain_generator(const GenConfig& gcfg, const PretrainConfig& cfg,
                                  const std::function<void(std::size_t, double)>& on_step = {});

}  // namespace sgim::gen
