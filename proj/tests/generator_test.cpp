#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgim/autodiff/grad_check.h"
#include "sgim/gen/generator.h"
#include "sgim/gen/render.h"

using namespace sgim;
using namespace sgim::gen;

namespace {

GenConfig small_config() {
  GenConfig c;
  c.layers = 4;
  c.style_dim = 6;
  c.units = 10;
  c.image_size = 8;
  c.noise_dim = 4;
  c.classes = 3;
  c.mapping_hidden = 12;
  return c;
}

ad::Tensor random_code(const GenConfig& c, std::uint64_t seed, float scale = 0.3f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, scale);
  std::vector<float> v(c.layers * c.style_dim);
  for (auto& x : v) x = n(rng);
  return ad::Tensor::from({c.layers, c.style_dim}, v);
}

double distance(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Trained once for the tests that need structure in W.
const PretrainResult& small_pretrained() {
  static const PretrainResult r = [] {
    PretrainConfig pc;
    pc.steps = 600;
    pc.batch = 12;
    pc.lr = 5e-3;
    pc.mse_threshold = 4.0;
    pc.eval_samples = 16;
    return pretrain_generator(small_config(), pc);
  }();
  return r;
}

}  // namespace

TEST(Generator, DeterministicAndBounded) {
  const auto g = Generator::init(small_config(), 3);
  const auto w = random_code(g.config, 1, 3.0f);
  const auto a = generate_image(w, g);
  EXPECT_EQ(a, generate_image(w, g));
  EXPECT_EQ(a.size(), 3u * 8 * 8);
  for (float v : a.data) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(generate_image(w, Generator::init(small_config(), 3)), a);
}

TEST(Generator, ShapeErrors) {
  const auto g = Generator::init(small_config(), 3);
  EXPECT_THROW(generate(ad::Tensor::zeros({3, 6}), g.synthesis), DimensionError);
  EXPECT_THROW(generate(ad::Tensor::zeros({4, 5}), g.synthesis), DimensionError);
  EXPECT_THROW(map_latent(0, std::vector<float>(3, 0.0f), g), DimensionError);
  EXPECT_THROW(map_latent(3, std::vector<float>(4, 0.0f), g), ContractError);
}

TEST(Generator, ConfigValidation) {
  auto c = small_config();
  c.image_size = 10;
  EXPECT_THROW(c.validate(), ContractError);
  c = small_config();
  c.classes = 9;
  EXPECT_THROW(c.validate(), ContractError);
  c = small_config();
  c.layers = 1;
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(Generator, MappedCodesHaveIdenticalRows) {
  const auto g = Generator::init(small_config(), 4);
  const auto z = latent_noise(9, 4);
  const auto w = map_latent(1, z, g);
  ASSERT_EQ(w.shape(), (ad::Shape{4, 6}));
  for (std::size_t l = 1; l < 4; ++l) {
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(w.at(l, j), w.at(0, j));
  }
  EXPECT_TRUE(std::equal(w.data().begin(), w.data().end(), map_latent(1, z, g).data().begin()));
  EXPECT_FALSE(std::equal(w.data().begin(), w.data().end(), map_latent(2, z, g).data().begin()));
}

TEST(Generator, GradCheckWrtLatent) {
  const auto cfg = small_config();
  const auto p = GeneratorParams<double>::init(cfg, 5);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    std::vector<double> weights(cfg.pixels());
    for (auto& v : weights) v = n(rng);
    const auto c = ad::Tensor64::from({1, cfg.pixels()}, weights);
    auto f = [&](const ad::Tensor64& w) { return ad::sum(ad::mul(generate(w, p), c)); };
    const auto w = random_code(cfg, 100 + trial).cast<double>(true);
    EXPECT_LT(ad::grad_check<double>(f, w), 1e-4);
  }
}

TEST(Generator, GradCheckWrtParameters) {
  const auto cfg = small_config();
  const auto base = GeneratorParams<double>::init(cfg, 6);
  const auto w = random_code(cfg, 7).cast<double>(false);
  const auto c = ad::Tensor64::full({1, cfg.pixels()}, 0.1);
  for (std::size_t which : {std::size_t{0}, std::size_t{1}, std::size_t{2}, std::size_t{3},
                            std::size_t{4}, std::size_t{5}, base.parameters().size() - 2}) {
    auto f = [&](const ad::Tensor64& theta) {
      auto q = base;
      std::vector<ad::Tensor64*> slots{&q.const_input};
      for (std::size_t l = 0; l < cfg.layers; ++l) {
        for (auto* t : {&q.weight[l], &q.scale_proj[l], &q.scale_bias[l], &q.shift_proj[l], &q.shift_bias[l]}) {
          slots.push_back(t);
        }
      }
      slots.push_back(&q.out_w);
      slots.push_back(&q.out_b);
      *slots[which] = theta;
      return ad::sum(ad::mul(generate(w, q), c));
    };
    EXPECT_LT(ad::grad_check<double>(f, base.parameters()[which].detach(true)), 1e-4) << which;
  }
}

TEST(Pretrain, ZeroStepBudgetFails) {
  PretrainConfig pc;
  pc.steps = 0;
  pc.eval_samples = 4;
  try {
    pretrain_generator(small_config(), pc);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.final_value(), pc.mse_threshold);
  }
}

TEST(Pretrain, ReducesReconstructionError) {
  const auto& r = small_pretrained();
  const double untrained = reconstruction_mse(Generator::init(small_config(), 0), 16, 99);
  EXPECT_LT(r.final_mse, 0.5 * untrained);
  EXPECT_LT(reconstruction_mse(r.generator, 16, 99), 0.5 * untrained);
}

TEST(Pretrain, ClassesSeparateInW) {
  const auto& g = small_pretrained().generator;
  std::vector<std::vector<std::vector<float>>> rows(2);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::uint64_t i = 0; i < 100; ++i) {
      const auto w = map_latent(k, latent_noise(1000 * k + i, 4), g);
      rows[k].emplace_back(w.data().begin(), w.data().begin() + 6);
    }
  }
  double intra = 0, inter = 0;
  std::size_t ni = 0, nx = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t j = i + 1; j < 100; ++j) {
      intra += distance(rows[0][i], rows[0][j]) + distance(rows[1][i], rows[1][j]);
      ni += 2;
    }
    for (std::size_t j = 0; j < 100; ++j) {
      inter += distance(rows[0][i], rows[1][j]);
      ++nx;
    }
  }
  EXPECT_GT(inter / nx, intra / ni);
}

TEST(Pretrain, EveryRowAffectsTheImage) {
  const auto& g = small_pretrained().generator;
  const auto w = map_latent(1, latent_noise(3, 4), g);
  const auto base = generate_image(w, g);
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n;
  for (std::size_t l = 0; l < g.config.layers; ++l) {
    std::vector<float> d(g.config.style_dim);
    double norm = 0;
    for (auto& v : d) norm += (v = n(rng)) * v;
    std::vector<float> moved(w.data().begin(), w.data().end());
    for (std::size_t j = 0; j < d.size(); ++j) moved[l * d.size() + j] += d[j] / std::sqrt(norm);
    const auto img = generate_image(ad::Tensor::from(w.shape(), moved), g);
    float delta = 0;
    for (std::size_t i = 0; i < img.size(); ++i) delta = std::max(delta, std::abs(img.data[i] - base.data[i]));
    EXPECT_GT(delta, 1e-4) << "row " << l;
  }
}

TEST(Pretrain, Deterministic) {
  PretrainConfig pc;
  pc.steps = 5;
  pc.batch = 4;
  pc.mse_threshold = 4.0;
  pc.eval_samples = 4;
  const auto a = pretrain_generator(small_config(), pc);
  const auto b = pretrain_generator(small_config(), pc);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.final_mse, b.final_mse);
}
