#include "sgim/gen/generator.h"

#include <cmath>
#include <cstdio>

#include "sgim/gen/render.h"
#include "sgim/seed.h"

namespace sgim::gen {

void GenConfig::validate() const {
  if (layers < 2) throw ContractError("generator needs at least 2 layers");
  if (style_dim == 0 || units == 0 || noise_dim < 3 || classes < 2 || mapping_hidden == 0) {
    throw ContractError("generator sizes must be positive, noise_dim >= 3 and classes >= 2");
  }
  if (image_size == 0 || image_size % model::kImagePool != 0) {
    throw ContractError("image size must be a positive multiple of 4");
  }
  if (classes > kRenderClasses) {
    throw ContractError("at most " + std::to_string(kRenderClasses) + " classes can be rendered");
  }
}

Generator Generator::init(const GenConfig& cfg, std::uint64_t seed) {
  return {cfg, GeneratorParams<float>::init(cfg, derive_seed(seed, 0)),
          MappingParams<float>::init(cfg, derive_seed(seed, 1))};
}

Generator Generator::frozen() const {
  return {config, synthesis.cast<float>(false), mapping.cast<float>(false)};
}

ad::Tensor map_latent(std::size_t class_id, const std::vector<float>& z, const Generator& g) {
  const auto style = map_styles<float>({class_id}, {z}, g.mapping, g.config);
  std::vector<float> rows;
  rows.reserve(g.config.layers * g.config.style_dim);
  for (std::size_t l = 0; l < g.config.layers; ++l) {
    rows.insert(rows.end(), style.data().begin(), style.data().end());
  }
  return ad::Tensor::from({g.config.layers, g.config.style_dim}, std::move(rows));
}

Image to_image(std::span<const float> row, const GenConfig& cfg) {
  if (row.size() != cfg.pixels()) {
    throw DimensionError("image row has " + std::to_string(row.size()) + " values, expected " +
                         std::to_string(cfg.pixels()));
  }
  Image img(cfg.channels, cfg.image_size, cfg.image_size);
  std::copy(row.begin(), row.end(), img.data.begin());
  return img;
}

Image generate_image(const ad::Tensor& w, const Generator& g) {
  return to_image(generate(w, g.synthesis).data(), g.config);
}

namespace {

struct Sample {
  std::size_t class_id;
  std::vector<float> z;
  Image target;
};

Sample draw_sample(const GenConfig& cfg, std::uint64_t seed) {
  const std::size_t k = seed % cfg.classes;
  const std::uint64_t render_seed = derive_seed(seed, 1);
  return {k, latent_noise(render_seed, cfg.noise_dim),
          render_procedural(k, render_seed, cfg.image_size)};
}

ad::Tensor batch_loss(const std::vector<Sample>& samples, const Generator& g) {
  std::vector<std::size_t> classes;
  std::vector<std::vector<float>> noise;
  std::vector<float> target;
  for (const auto& s : samples) {
    classes.push_back(s.class_id);
    noise.push_back(s.z);
    target.insert(target.end(), s.target.data.begin(), s.target.data.end());
  }
  const auto styles = map_styles<float>(classes, noise, g.mapping, g.config);
  const auto images = synthesize<float>(std::vector<ad::Tensor>(g.config.layers, styles), g.synthesis);
  const auto t = ad::Tensor::from({samples.size(), g.config.pixels()}, std::move(target));
  const auto d = ad::sub(images, t);
  return ad::mean(ad::mul(d, d));
}

class Adam {
 public:
  explicit Adam(const std::vector<ad::Tensor>& params) : params_(params) {
    for (const auto& p : params_) {
      m_.emplace_back(p.size(), 0.0f);
      v_.emplace_back(p.size(), 0.0f);
    }
  }

  void step(double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (!params_[i].has_grad()) continue;
      auto theta = params_[i].mutable_data();
      auto g = params_[i].grad();
      for (std::size_t j = 0; j < theta.size(); ++j) {
        m_[i][j] = static_cast<float>(b1 * m_[i][j] + (1 - b1) * g[j]);
        v_[i][j] = static_cast<float>(b2 * v_[i][j] + (1 - b2) * g[j] * g[j]);
        theta[j] -= static_cast<float>(lr * (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + eps));
      }
    }
  }

 private:
  std::vector<ad::Tensor> params_;
  std::vector<std::vector<float>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace

double reconstruction_mse(const Generator& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ContractError("reconstruction MSE needs at least one sample");
  const auto frozen = g.frozen();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = draw_sample(g.config, derive_seed(seed, i));
    total += batch_loss({s}, frozen).item();
  }
  return total / static_cast<double>(n);
}

PretrainResult pretrain_generator(const GenConfig& gcfg, const PretrainConfig& cfg,
                                  const std::function<void(std::size_t, double)>& on_step) {
  gcfg.validate();
  if (cfg.batch == 0) throw ContractError("pretraining batch must be positive");
  PretrainResult result{Generator::init(gcfg, cfg.seed), 0.0, {}};
  auto params = result.generator.synthesis.parameters();
  for (const auto& p : result.generator.mapping.parameters()) params.push_back(p);
  Adam adam(params);
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    std::vector<Sample> batch;
    for (std::size_t i = 0; i < cfg.batch; ++i) {
      batch.push_back(draw_sample(gcfg, derive_seed(cfg.seed, 2 + s, i)));
    }
    for (auto& p : params) p.zero_grad();
    const auto loss = batch_loss(batch, result.generator);
    const double value = loss.item();
    if (!std::isfinite(value)) {
      throw NumericalError("non-finite generator loss at step " + std::to_string(s));
    }
    ad::backward(loss);
    // Cosine decay to a tenth of the base rate.
    const double frac = static_cast<double>(s) / static_cast<double>(cfg.steps);
    adam.step(cfg.lr * (0.55 + 0.45 * std::cos(3.141592653589793 * frac)));
    result.trace.push_back(value);
    if (on_step) on_step(s, value);
  }
  result.final_mse = reconstruction_mse(result.generator, cfg.eval_samples, derive_seed(cfg.seed, 1));
  if (!(result.final_mse < cfg.mse_threshold)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "generator reconstruction MSE %.5f not below %.5f after %zu steps",
                  result.final_mse, cfg.mse_threshold, cfg.steps);
    throw ConvergenceError(buf, result.final_mse);
  }
  return result;
}

}  // namespace sgim::gen
