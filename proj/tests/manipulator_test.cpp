#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgim/autodiff/grad_check.h"
#include "sgim/gen/render.h"
#include "sgim/manip/manipulator.h"

using namespace sgim;
using namespace sgim::manip;

namespace {

gen::GenConfig gen_config() {
  gen::GenConfig c;
  c.layers = 4;
  c.style_dim = 5;
  c.units = 10;
  c.image_size = 8;
  c.noise_dim = 4;
  c.classes = 3;
  c.mapping_hidden = 8;
  return c;
}

model::EncoderConfig enc_config() {
  model::EncoderConfig c;
  c.embed_dim = 6;
  c.hidden = 10;
  c.mel_bins = 4;
  c.vocab_size = 5;
  c.image_size = 8;
  return c;
}

struct Models {
  gen::Generator g = gen::Generator::init(gen_config(), 1);
  model::Encoders e = model::Encoders::init(enc_config(), 2);
};

const Models& models() {
  static const Models m;
  return m;
}

ad::Tensor64 random_code(std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(4 * 5);
  for (auto& x : v) x = n(rng);
  return ad::Tensor64::from({4, 5}, v);
}

ad::Tensor64 random_target(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<double> v(6);
  for (auto& x : v) x = n(rng);
  return ad::l2_normalize_rows(ad::Tensor64::from({1, 6}, v));
}

model::Embedding to_embedding(const ad::Tensor64& t) { return {t.data().begin(), t.data().end()}; }

double frob(const ad::Tensor& a, const ad::Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(a.data()[i] - b.data()[i], 2);
  return std::sqrt(s);
}

}  // namespace

TEST(IdentityLoss, ZeroForIdenticalCodes) {
  const auto g = models().g.synthesis.cast<double>();
  const auto e = models().e.cast<double>();
  const auto w = random_code(1);
  EXPECT_EQ(identity_loss(w, w, g, e).item(), 0.0);
}

TEST(IdentityLoss, TwoForAntiparallelEmbeddings) {
  const auto g = models().g.synthesis.cast<double>();
  const auto e = models().e.cast<double>();
  const auto w = random_code(2);
  const auto flipped = ad::affine(image_embedding(w, g, e), -1.0);
  EXPECT_NEAR(identity_loss_from(flipped, w, g, e).item(), 2.0, 1e-9);
}

TEST(IdentityLoss, MatchesCosineOracle) {
  const auto g = models().g.synthesis.cast<double>();
  const auto e = models().e.cast<double>();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto ws = random_code(10 + s), wa = random_code(20 + s);
    const auto a = image_embedding(ws, g, e), b = image_embedding(wa, g, e);
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += a.data()[i] * b.data()[i];
      aa += a.data()[i] * a.data()[i];
      bb += b.data()[i] * b.data()[i];
    }
    const double value = identity_loss(ws, wa, g, e).item();
    EXPECT_GT(value, 0.0);
    EXPECT_LT(value, 2.0);
    EXPECT_NEAR(value, 1.0 - ab / std::sqrt(aa * bb), 1e-6);
  }
}

TEST(ManipLoss, NoDisplacementLeavesOnlyCosineTerm) {
  const auto g = models().g.synthesis.cast<double>();
  const auto e = models().e.cast<double>();
  ManipConfig cfg;
  cfg.lambda_id = 0.0;
  const auto w = random_code(3);
  const auto t = random_target(3);
  const auto gamma = ad::Tensor64::full({4, 1}, 2.0);
  const auto terms = manip_loss(w, w, t, gamma, cfg, g, e);
  const auto x = image_embedding(w, g, e);
  double cos = 0;
  for (std::size_t i = 0; i < 6; ++i) cos += x.data()[i] * t.data()[i];
  EXPECT_EQ(terms.penalty.item(), 0.0);
  EXPECT_EQ(terms.identity.item(), 0.0);
  EXPECT_EQ(terms.total.item(), terms.cosine.item());
  EXPECT_NEAR(terms.cosine.item(), 1.0 - cos, 1e-12);
}

TEST(ManipLoss, UnitGateEqualsPlainNorm) {
  const auto wa = random_code(4), ws = random_code(5);
  const auto gamma = ad::Tensor64::full({4, 1}, 40.0);
  double plain = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) plain += std::pow(wa.data()[i] - ws.data()[i], 2);
  EXPECT_NEAR(gated_penalty(wa, ws, gamma).item(), std::sqrt(plain), 1e-6);
}

TEST(ManipLoss, ClosedGateBlocksRowGradient) {
  const auto wa = random_code(6).detach(true), ws = random_code(7);
  const auto gamma = ad::Tensor64::from({4, 1}, {1.0, -1000.0, 0.5, 2.0});
  ad::backward(gated_penalty(wa, ws, gamma));
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(wa.grad()[5 + j], 0.0);
    EXPECT_NE(wa.grad()[j], 0.0);
  }
}

TEST(ManipLoss, NonNegative) {
  const auto g = models().g.synthesis.cast<double>();
  const auto e = models().e.cast<double>();
  ManipConfig cfg;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto terms = manip_loss(random_code(30 + s), random_code(40 + s), random_target(s),
                                  ad::Tensor64::full({4, 1}, 0.3), cfg, g, e);
    EXPECT_GE(terms.total.item(), 0.0);
  }
}

TEST(ManipLoss, ShapeErrors) {
  const auto g = models().g.synthesis.cast<double>();
  const auto e = models().e.cast<double>();
  ManipConfig cfg;
  EXPECT_THROW(manip_loss(random_code(1), random_code(2), random_target(1),
                          ad::Tensor64::full({3, 1}, 2.0), cfg, g, e),
               DimensionError);
  EXPECT_THROW(manip_loss(random_code(1), random_code(2), ad::Tensor64::full({1, 5}, 0.1),
                          ad::Tensor64::full({4, 1}, 2.0), cfg, g, e),
               DimensionError);
}

TEST(ManipLoss, GradCheckWrtCodeAndGate) {
  const auto g = models().g.synthesis.cast<double>();
  const auto e = models().e.cast<double>();
  ManipConfig cfg;
  cfg.lambda_id = 0.3;
  cfg.lambda_sim = 0.2;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const auto ws = random_code(50 + trial);
    const auto wa = random_code(60 + trial);
    const auto t = random_target(70 + trial);
    const auto gamma = random_code(80 + trial, 1.0);
    const auto gam = ad::Tensor64::from({4, 1}, {gamma.data()[0], gamma.data()[1], gamma.data()[2], gamma.data()[3]});
    auto f_w = [&](const ad::Tensor64& w) { return manip_loss(w, ws, t, gam, cfg, g, e).total; };
    auto f_g = [&](const ad::Tensor64& gm) { return manip_loss(wa, ws, t, gm, cfg, g, e).total; };
    EXPECT_LT(ad::grad_check<double>(f_w, wa.detach(true)), 1e-4);
    EXPECT_LT(ad::grad_check<double>(f_g, gam.detach(true)), 1e-4);
  }
}

TEST(Prox, ZeroInsideThreshold) {
  const std::vector<float> v = {0.1f, -0.2f, 0.05f, 0.0f};
  const auto out = gated_norm_prox(v, {0.9f, 0.5f}, 2, 1.0);
  for (float x : out) EXPECT_EQ(x, 0.0f);
}

TEST(Prox, UnitGateIsBlockSoftThreshold) {
  const std::vector<float> v = {3.0f, 4.0f};
  const auto out = gated_norm_prox(v, {1.0f}, 2, 1.0);
  EXPECT_NEAR(out[0], 3.0f * 4.0f / 5.0f, 1e-5);
  EXPECT_NEAR(out[1], 4.0f * 4.0f / 5.0f, 1e-5);
}

TEST(Prox, MinimizesObjective) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<float> v(12), gate(4);
    for (auto& x : v) x = static_cast<float>(n(rng));
    for (auto& x : gate) x = static_cast<float>(u(rng));
    const double t = 0.4;
    auto objective = [&](const std::vector<double>& d) {
      double fit = 0, pen = 0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        fit += 0.5 * (d[i] - v[i]) * (d[i] - v[i]);
        pen += std::pow(gate[i / 3] * d[i], 2);
      }
      return fit + t * std::sqrt(pen);
    };
    const auto p = gated_norm_prox(v, gate, 3, t);
    std::vector<double> best(p.begin(), p.end());
    const double at = objective(best);
    for (int k = 0; k < 200; ++k) {
      auto q = best;
      for (auto& x : q) x += 1e-3 * n(rng);
      EXPECT_GE(objective(q), at - 1e-9);
    }
  }
}

TEST(Optimize, ZeroStepKeepsSourceExactly) {
  ManipConfig cfg;
  cfg.steps = 1;
  cfg.step_size = 0.0;
  const auto w_s = random_code(9).cast<float>();
  const auto r = optimize_latent(w_s, to_embedding(random_target(9)), cfg, models().g, models().e);
  EXPECT_TRUE(std::equal(w_s.data().begin(), w_s.data().end(), r.w_a.data().begin()));
  EXPECT_EQ(gen::generate_image(w_s, models().g), gen::generate_image(r.w_a, models().g));
  EXPECT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.gate.size(), 4u);
  EXPECT_NEAR(r.gate[0], 1.0 / (1.0 + std::exp(-2.0)), 1e-6);
}

TEST(Optimize, LargePenaltyPinsCode) {
  ManipConfig cfg;
  cfg.lambda_sim = 1e3;
  cfg.lambda_id = 0.0;
  const auto w_s = random_code(10).cast<float>();
  const auto r = optimize_latent(w_s, to_embedding(random_target(10)), cfg, models().g, models().e);
  EXPECT_LT(frob(r.w_a, w_s), 0.01);
}

TEST(Optimize, ReducesCosineDistance) {
  ManipConfig cfg;
  cfg.steps = 100;
  int improved = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = optimize_latent(random_code(100 + s).cast<float>(), to_embedding(random_target(200 + s)),
                                   cfg, models().g, models().e);
    ASSERT_EQ(r.trace.size(), 101u);
    improved += r.trace.back().cosine < r.trace.front().cosine;
  }
  EXPECT_GE(improved, 9);
}

TEST(Optimize, SmallStepTraceIsMonotone) {
  ManipConfig cfg;
  cfg.step_size = 0.005;
  cfg.steps = 100;
  std::size_t ok = 0, total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = optimize_latent(random_code(300 + s).cast<float>(), to_embedding(random_target(400 + s)),
                                   cfg, models().g, models().e);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      ok += r.trace[i].total <= r.trace[i - 1].total;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(ok) / static_cast<double>(total), 0.99);
}

TEST(Optimize, Deterministic) {
  ManipConfig cfg;
  cfg.steps = 20;
  const auto w = random_code(11).cast<float>();
  const auto t = to_embedding(random_target(11));
  const auto a = optimize_latent(w, t, cfg, models().g, models().e);
  const auto b = optimize_latent(w, t, cfg, models().g, models().e);
  EXPECT_TRUE(std::equal(a.w_a.data().begin(), a.w_a.data().end(), b.w_a.data().begin()));
  EXPECT_EQ(a.gate, b.gate);
}

TEST(StyleMix, EighteenLayerSplit) {
  const auto a = ad::Tensor::full({18, 4}, 1.0f), b = ad::Tensor::full({18, 4}, 2.0f);
  EXPECT_EQ(default_split(18), 9u);
  const auto m = style_mix(a, b, default_split(18));
  for (std::size_t l = 0; l < 18; ++l) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m.at(l, j), l < 9 ? 1.0f : 2.0f);
  }
}

TEST(StyleMix, CopySemantics) {
  const auto a = random_code(1).cast<float>(), b = random_code(2).cast<float>();
  const auto same = style_mix(a, a, 2);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), same.data().begin()));
  const auto m = style_mix(a, b, default_split(4));
  EXPECT_EQ(default_split(4), 2u);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().begin() + 10, m.data().begin()));
  EXPECT_TRUE(std::equal(b.data().begin() + 10, b.data().end(), m.data().begin() + 10));
  EXPECT_EQ(default_split(7), 4u);
}

TEST(StyleMix, SplitOutOfRange) {
  const auto a = random_code(1).cast<float>();
  EXPECT_THROW(style_mix(a, a, 0), ContractError);
  EXPECT_THROW(style_mix(a, a, 4), ContractError);
  EXPECT_THROW(style_mix(a, ad::Tensor::zeros({3, 5}), 2), DimensionError);
}

TEST(ManipConfig, Validation) {
  ManipConfig c;
  EXPECT_NO_THROW(c.validate());
  c.steps = 0;
  EXPECT_THROW(c.validate(), ContractError);
  c = {};
  c.lambda_sim = -1;
  EXPECT_THROW(c.validate(), ContractError);
}
