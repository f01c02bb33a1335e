#pragma once

// Audio, text and image encoders mapping into one d-dimensional embedding
// space. Each is a perceptron over a fixed-size feature vector:
//   h1 = tanh(x W_in + b_in)      (modality-specific input projection)
//   h2 = tanh(h1 W_hidden + b_hidden)
//   e  = normalize(h2 W_out + b_out)
// Audio features are pooled log-mel statistics, text features are mean
// one-hot vectors (so W_in rows act as token embeddings), image features are
// 4x4 average-pooled pixels.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sgim/audio/features.h"
#include "sgim/autodiff/ops.h"
#include "sgim/image.h"
#include "sgim/text/text.h"

namespace sgim::model {

using Embedding = std::vector<float>;

inline constexpr std::size_t kImagePool = 4;

struct EncoderConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden = 128;
  std::size_t mel_bins = 80;
  std::size_t vocab_size = 1;
  std::size_t image_channels = 3;
  std::size_t image_size = 32;

  std::size_t audio_inputs() const { return 2 * mel_bins; }
  std::size_t image_inputs() const {
    return image_channels * (image_size / kImagePool) * (image_size / kImagePool);
  }
};

// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
template <typename T>
ad::BasicTensor<T> glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<T> v(fan_in * fan_out);
  for (auto& x : v) x = static_cast<T>(u(rng));
  return ad::BasicTensor<T>::from({fan_in, fan_out}, std::move(v), true);
}

template <typename T>
struct Mlp {
  ad::BasicTensor<T> w_in, b_in, w_hidden, b_hidden, w_out, b_out;

  static Mlp init(std::size_t inputs, std::size_t hidden, std::size_t outputs,
                  std::mt19937_64& rng) {
    Mlp m;
    m.w_in = glorot<T>(inputs, hidden, rng);
    m.b_in = ad::BasicTensor<T>::zeros({1, hidden}, true);
    m.w_hidden = glorot<T>(hidden, hidden, rng);
    m.b_hidden = ad::BasicTensor<T>::zeros({1, hidden}, true);
    m.w_out = glorot<T>(hidden, outputs, rng);
    m.b_out = ad::BasicTensor<T>::zeros({1, outputs}, true);
    return m;
  }

  std::size_t inputs() const { return w_in.rows(); }
  std::size_t outputs() const { return w_out.cols(); }

  ad::BasicTensor<T> forward(const ad::BasicTensor<T>& x) const {
    if (x.cols() != inputs()) {
      throw DimensionError("encoder expects " + std::to_string(inputs()) +
                           " input features, got " + ad::shape_string(x.shape()));
    }
    auto h1 = ad::tanh(ad::add(ad::matmul(x, w_in), b_in));
    auto h2 = ad::tanh(ad::add(ad::matmul(h1, w_hidden), b_hidden));
    return ad::add(ad::matmul(h2, w_out), b_out);
  }

  std::vector<ad::BasicTensor<T>> parameters() const {
    return {w_in, b_in, w_hidden, b_hidden, w_out, b_out};
  }

  template <typename U>
  Mlp<U> cast(bool requires_grad = false) const {
    Mlp<U> m;
    m.w_in = w_in.template cast<U>(requires_grad);
    m.b_in = b_in.template cast<U>(requires_grad);
    m.w_hidden = w_hidden.template cast<U>(requires_grad);
    m.b_hidden = b_hidden.template cast<U>(requires_grad);
    m.w_out = w_out.template cast<U>(requires_grad);
    m.b_out = b_out.template cast<U>(requires_grad);
    return m;
  }
};

// Trainable parameters of all three encoders plus the fixed standardization
// applied to pooled audio features.
template <typename T>
struct EncoderParams {
  EncoderConfig config;
  Mlp<T> audio, text, image;
  std::vector<float> audio_shift;  // per-feature mean
  std::vector<float> audio_scale;  // per-feature 1 / std

  static EncoderParams init(const EncoderConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    EncoderParams p;
    p.config = cfg;
    p.audio = Mlp<T>::init(cfg.audio_inputs(), cfg.hidden, cfg.embed_dim, rng);
    p.text = Mlp<T>::init(cfg.vocab_size, cfg.hidden, cfg.embed_dim, rng);
    p.image = Mlp<T>::init(cfg.image_inputs(), cfg.hidden, cfg.embed_dim, rng);
    p.audio_shift.assign(cfg.audio_inputs(), 0.0f);
    p.audio_scale.assign(cfg.audio_inputs(), 1.0f);
    return p;
  }

  std::vector<ad::BasicTensor<T>> audio_parameters() const { return audio.parameters(); }
  std::vector<ad::BasicTensor<T>> text_image_parameters() const {
    auto p = text.parameters();
    for (auto& t : image.parameters()) p.push_back(t);
    return p;
  }
  std::vector<ad::BasicTensor<T>> parameters() const {
    auto p = audio_parameters();
    for (auto& t : text_image_parameters()) p.push_back(t);
    return p;
  }

  template <typename U>
  EncoderParams<U> cast(bool requires_grad = false) const {
    EncoderParams<U> p;
    p.config = config;
    p.audio = audio.template cast<U>(requires_grad);
    p.text = text.template cast<U>(requires_grad);
    p.image = image.template cast<U>(requires_grad);
    p.audio_shift = audio_shift;
    p.audio_scale = audio_scale;
    return p;
  }
};

using Encoders = EncoderParams<float>;

// Per-bin mean over time followed by per-bin (population) standard deviation.
std::vector<float> pool_mel(const audio::MelSpectrogram& mel);

// Sets the audio standardization from the pooled features of a corpus.
template <typename T>
void fit_audio_normalizer(EncoderParams<T>& params,
                          const std::vector<audio::MelSpectrogram>& corpus);

// Feature batches (constants, never differentiated).
template <typename T>
ad::BasicTensor<T> audio_features(std::span<const audio::MelSpectrogram> mels,
                                  const EncoderParams<T>& params);
template <typename T>
ad::BasicTensor<T> text_features(std::span<const text::TokenSequence> texts,
                                 const text::Vocabulary& vocab, std::size_t vocab_size);
template <typename T>
ad::BasicTensor<T> image_batch(std::span<const Image> images);

// Differentiable batch encoders returning unit-norm rows.
template <typename T>
ad::BasicTensor<T> encode_audio(const ad::BasicTensor<T>& features, const EncoderParams<T>& p) {
  return ad::l2_normalize_rows(p.audio.forward(features));
}

template <typename T>
ad::BasicTensor<T> encode_text(const ad::BasicTensor<T>& features, const EncoderParams<T>& p) {
  return ad::l2_normalize_rows(p.text.forward(features));
}

// images: one flattened C x H x W image per row.
template <typename T>
ad::BasicTensor<T> encode_image(const ad::BasicTensor<T>& images, const EncoderParams<T>& p) {
  const auto& c = p.config;
  if (images.cols() != c.image_channels * c.image_size * c.image_size) {
    throw DimensionError("image encoder expects " + std::to_string(c.image_channels) + "x" +
                         std::to_string(c.image_size) + "x" + std::to_string(c.image_size) +
                         " images, got rows of " + std::to_string(images.cols()) + " values");
  }
  auto pooled = ad::avg_pool(images, c.image_channels, c.image_size, c.image_size, kImagePool);
  return ad::l2_normalize_rows(p.image.forward(pooled));
}

// Single-item inference.
Embedding embed_audio(const audio::MelSpectrogram& mel, const Encoders& p);
// Throws ContractError on an empty sequence; unknown words map to the OOV id.
Embedding embed_text(const text::TokenSequence& tokens, const text::Vocabulary& vocab,
                     const Encoders& p);
Embedding embed_image(const Image& image, const Encoders& p);

double dot(std::span<const float> a, std::span<const float> b);

}  // namespace sgim::model
