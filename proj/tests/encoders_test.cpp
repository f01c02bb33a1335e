#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgim/autodiff/grad_check.h"
#include "sgim/gen/render.h"
#include "sgim/model/encoders.h"

using namespace sgim;
using namespace sgim::model;

namespace {

EncoderConfig small_config() {
  EncoderConfig c;
  c.embed_dim = 8;
  c.hidden = 12;
  c.mel_bins = 6;
  c.vocab_size = 10;
  c.image_size = 8;
  return c;
}

audio::MelSpectrogram random_mel(std::size_t bins, std::size_t frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(-5.0f, 2.0f);
  audio::MelSpectrogram m;
  m.params.mel_bins = bins;
  m.values = Matrix(bins, frames);
  for (auto& v : m.values.values) v = n(rng);
  return m;
}

Image random_image(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Image img(3, size, size);
  for (auto& v : img.data) v = u(rng);
  return img;
}

double norm(const Embedding& e) {
  double s = 0.0;
  for (float v : e) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

text::Vocabulary small_vocab() {
  return text::Vocabulary({"rain", "falling", "heavy", "bell", "ringing", "a", "the", "clock", "wind"});
}

}  // namespace

TEST(PoolMel, ConstantSpectrogram) {
  audio::MelSpectrogram m;
  m.values = Matrix(4, 7, -3.5f);
  const auto f = pool_mel(m);
  ASSERT_EQ(f.size(), 8u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_FLOAT_EQ(f[i], -3.5f);
    EXPECT_FLOAT_EQ(f[4 + i], 0.0f);
  }
}

TEST(PoolMel, MatchesTwoPassOracle) {
  const auto m = random_mel(80, 50, 3);
  const auto f = pool_mel(m);
  ASSERT_EQ(f.size(), 160u);
  for (std::size_t b = 0; b < 80; ++b) {
    long double mean = 0;
    for (std::size_t t = 0; t < 50; ++t) mean += m.values(b, t);
    mean /= 50;
    long double var = 0;
    for (std::size_t t = 0; t < 50; ++t) var += (m.values(b, t) - mean) * (m.values(b, t) - mean);
    var /= 50;
    EXPECT_NEAR(f[b], static_cast<double>(mean), 1e-5);
    EXPECT_NEAR(f[80 + b], std::sqrt(static_cast<double>(var)), 1e-5);
  }
}

TEST(Encoders, EmbeddingsAreUnitNormAcrossInputs) {
  auto cfg = small_config();
  const auto p = Encoders::init(cfg, 11);
  const auto vocab = small_vocab();
  std::mt19937_64 rng(5);
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_NEAR(norm(embed_audio(random_mel(6, 5 + i % 7, i), p)), 1.0, 1e-5);
    EXPECT_NEAR(norm(embed_image(random_image(8, 1000 + i), p)), 1.0, 1e-5);
    text::TokenSequence t;
    for (std::size_t k = 0; k < 1 + rng() % 5; ++k) t.push_back(vocab.token(rng() % vocab.size()));
    const auto e = embed_text(t, vocab, p);
    EXPECT_EQ(e.size(), cfg.embed_dim);
    EXPECT_NEAR(norm(e), 1.0, 1e-5);
  }
}

TEST(Encoders, AllModalitiesShareDimension) {
  const auto p = Encoders::init(small_config(), 1);
  const auto vocab = small_vocab();
  EXPECT_EQ(embed_audio(random_mel(6, 4, 1), p).size(), 8u);
  EXPECT_EQ(embed_text({"rain"}, vocab, p).size(), 8u);
  EXPECT_EQ(embed_image(random_image(8, 1), p).size(), 8u);
}

TEST(Encoders, Deterministic) {
  const auto p = Encoders::init(small_config(), 2);
  const auto m = random_mel(6, 9, 4);
  EXPECT_EQ(embed_audio(m, p), embed_audio(m, p));
  Image c(3, 8, 8, 0.25f);
  EXPECT_EQ(embed_image(c, p), embed_image(c, p));
  EXPECT_EQ(Encoders::init(small_config(), 2).audio.w_in.data()[7], p.audio.w_in.data()[7]);
}

TEST(Encoders, TextIsOrderInvariantAndIdempotent) {
  const auto p = Encoders::init(small_config(), 3);
  const auto vocab = small_vocab();
  EXPECT_EQ(embed_text({"heavy", "rain", "falling"}, vocab, p),
            embed_text({"falling", "heavy", "rain"}, vocab, p));
  EXPECT_EQ(embed_text({"bell", "bell", "bell"}, vocab, p), embed_text({"bell"}, vocab, p));
}

TEST(Encoders, UnknownWordsEmbedAsOov) {
  const auto p = Encoders::init(small_config(), 3);
  const auto vocab = small_vocab();
  const auto e = embed_text({"zeppelin"}, vocab, p);
  EXPECT_NEAR(norm(e), 1.0, 1e-5);
  EXPECT_EQ(e, embed_text({"<unk>"}, vocab, p));
}

TEST(Encoders, ContractErrors) {
  const auto p = Encoders::init(small_config(), 3);
  EXPECT_THROW(embed_text({}, small_vocab(), p), ContractError);
  EXPECT_THROW(embed_audio(random_mel(7, 4, 1), p), DimensionError);
  EXPECT_THROW(embed_image(random_image(12, 1), p), DimensionError);
}

TEST(Encoders, GradCheckAudioWrtParams) {
  const auto cfg = small_config();
  auto p = EncoderParams<double>::init(cfg, 9);
  const std::vector<audio::MelSpectrogram> mels = {random_mel(6, 5, 1), random_mel(6, 8, 2)};
  fit_audio_normalizer(p, mels);
  const auto x = audio_features<double>(mels, p);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> c(2 * cfg.embed_dim);
    for (auto& v : c) v = n(rng);
    const auto target = ad::Tensor64::from({2, cfg.embed_dim}, c);
    // Perturb one parameter tensor per trial; the others stay fixed.
    auto params = p.audio.parameters();
    const std::size_t which = trial % params.size();
    auto point = params[which].detach(true);
    for (auto& v : point.mutable_data()) v += 0.1 * n(rng);
    auto f = [&](const ad::Tensor64& theta) {
      auto q = p;
      auto slots = std::array{&q.audio.w_in, &q.audio.b_in, &q.audio.w_hidden,
                              &q.audio.b_hidden, &q.audio.w_out, &q.audio.b_out};
      *slots[which] = theta;
      return ad::sum(ad::mul(encode_audio(x, q), target));
    };
    EXPECT_LT(ad::grad_check<double>(f, point), 1e-4) << "param " << which;
  }
}

TEST(Encoders, GradCheckImageWrtPixels) {
  const auto cfg = small_config();
  const auto p = EncoderParams<double>::init(cfg, 10).cast<double>(false);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const Image img = random_image(8, 50 + trial);
    auto x = image_batch<double>({&img, 1}).detach(true);
    std::vector<double> c(cfg.embed_dim);
    for (auto& v : c) v = n(rng);
    const auto target = ad::Tensor64::from({1, cfg.embed_dim}, c);
    auto f = [&](const ad::Tensor64& pixels) {
      return ad::sum(ad::mul(encode_image(pixels, p), target));
    };
    EXPECT_LT(ad::grad_check<double>(f, x), 1e-4);
  }
}

TEST(Encoders, GradCheckTextWrtTokenEmbeddings) {
  const auto cfg = small_config();
  const auto p = EncoderParams<double>::init(cfg, 12);
  const auto vocab = small_vocab();
  const std::vector<text::TokenSequence> texts = {{"rain", "falling"}, {"bell", "ringing", "zz"}};
  const auto x = text_features<double>(texts, vocab, cfg.vocab_size);
  const auto target = ad::Tensor64::full({2, cfg.embed_dim}, 0.3);
  auto f = [&](const ad::Tensor64& w) {
    auto q = p;
    q.text.w_in = w;
    return ad::sum(ad::mul(encode_text(x, q), target));
  };
  EXPECT_LT(ad::grad_check<double>(f, p.text.w_in.detach(true)), 1e-4);
}

TEST(Encoders, NormalizerStandardizesCorpus) {
  auto p = Encoders::init(small_config(), 1);
  std::vector<audio::MelSpectrogram> corpus;
  for (std::uint64_t i = 0; i < 20; ++i) corpus.push_back(random_mel(6, 10, i));
  fit_audio_normalizer(p, corpus);
  const auto x = audio_features<float>(corpus, p);
  for (std::size_t c = 0; c < 12; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < 20; ++r) mean += x.at(r, c);
    EXPECT_NEAR(mean / 20, 0.0, 1e-4);
  }
}

TEST(Render, DeterministicAndBounded) {
  for (std::size_t k = 0; k < gen::kRenderClasses; ++k) {
    const auto a = gen::render_procedural(k, 77);
    EXPECT_EQ(a, gen::render_procedural(k, 77));
    EXPECT_EQ(a.size(), 3u * 32 * 32);
    for (float v : a.data) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
  EXPECT_NE(gen::render_procedural(0, 1), gen::render_procedural(0, 2));
  EXPECT_THROW(gen::render_procedural(gen::kRenderClasses, 0), ContractError);
}

TEST(Render, ClassMeansDiffer) {
  auto mean = [](const Image& img) {
    double s = 0.0;
    for (float v : img.data) s += v;
    return s / static_cast<double>(img.size());
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_GT(std::abs(mean(gen::render_procedural(0, seed)) - mean(gen::render_procedural(1, seed))),
              0.1);
  }
}

TEST(Render, LatentNoiseDrivesJitter) {
  const auto z = gen::latent_noise(5, 8);
  ASSERT_EQ(z.size(), 8u);
  for (float v : z) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(gen::render_procedural(3, 5), gen::render_with_jitter(3, z));
}
