#include "sgim/model/encoders.h"

#include <cmath>

namespace sgim::model {

std::vector<float> pool_mel(const audio::MelSpectrogram& mel) {
  const std::size_t bins = mel.bins(), frames = mel.frames();
  if (frames == 0) throw ContractError("pool_mel: spectrogram has no frames");
  std::vector<float> out(2 * bins);
  for (std::size_t b = 0; b < bins; ++b) {
    double mean = 0.0;
    for (std::size_t f = 0; f < frames; ++f) mean += mel.values(b, f);
    mean /= static_cast<double>(frames);
    double var = 0.0;
    for (std::size_t f = 0; f < frames; ++f) {
      const double d = mel.values(b, f) - mean;
      var += d * d;
    }
    var /= static_cast<double>(frames);
    out[b] = static_cast<float>(mean);
    out[bins + b] = static_cast<float>(std::sqrt(var));
  }
  return out;
}

template <typename T>
void fit_audio_normalizer(EncoderParams<T>& params,
                          const std::vector<audio::MelSpectrogram>& corpus) {
  const std::size_t n = params.config.audio_inputs();
  if (corpus.empty()) throw ContractError("fit_audio_normalizer: empty corpus");
  std::vector<double> sum(n, 0.0), sq(n, 0.0);
  for (const auto& mel : corpus) {
    const auto f = pool_mel(mel);
    if (f.size() != n) {
      throw DimensionError("fit_audio_normalizer: expected " + std::to_string(n) +
                           " pooled features, got " + std::to_string(f.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += f[i];
      sq[i] += static_cast<double>(f[i]) * f[i];
    }
  }
  const double count = static_cast<double>(corpus.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / count;
    const double var = std::max(0.0, sq[i] / count - mean * mean);
    params.audio_shift[i] = static_cast<float>(mean);
    params.audio_scale[i] = static_cast<float>(1.0 / std::sqrt(var + 1e-2));
  }
}

template <typename T>
ad::BasicTensor<T> audio_features(std::span<const audio::MelSpectrogram> mels,
                                  const EncoderParams<T>& params) {
  const std::size_t n = params.config.audio_inputs();
  if (mels.empty()) throw ContractError("audio_features: empty batch");
  std::vector<T> values;
  values.reserve(mels.size() * n);
  for (const auto& mel : mels) {
    const auto f = pool_mel(mel);
    if (f.size() != n) {
      throw DimensionError("audio encoder expects spectrograms with " +
                           std::to_string(params.config.mel_bins) + " mel bins, got " +
                           std::to_string(mel.bins()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      values.push_back(static_cast<T>((f[i] - params.audio_shift[i]) * params.audio_scale[i]));
    }
  }
  return ad::BasicTensor<T>::from({mels.size(), n}, std::move(values));
}

template <typename T>
ad::BasicTensor<T> text_features(std::span<const text::TokenSequence> texts,
                                 const text::Vocabulary& vocab, std::size_t vocab_size) {
  if (texts.empty()) throw ContractError("text_features: empty batch");
  std::vector<T> values(texts.size() * vocab_size, T(0));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw ContractError("text encoder: empty token sequence");
    const T share = T(1) / static_cast<T>(texts[i].size());
    for (std::size_t id : vocab.encode(texts[i])) {
      if (id >= vocab_size) {
        throw DimensionError("token id " + std::to_string(id) + " exceeds the text encoder's " +
                             std::to_string(vocab_size) + " inputs");
      }
      values[i * vocab_size + id] += share;
    }
  }
  return ad::BasicTensor<T>::from({texts.size(), vocab_size}, std::move(values));
}

template <typename T>
ad::BasicTensor<T> image_batch(std::span<const Image> images) {
  if (images.empty()) throw ContractError("image_batch: empty batch");
  const std::size_t n = images[0].size();
  std::vector<T> values;
  values.reserve(images.size() * n);
  for (const auto& img : images) {
    if (img.size() != n) throw DimensionError("image_batch: images differ in size");
    values.insert(values.end(), img.data.begin(), img.data.end());
  }
  return ad::BasicTensor<T>::from({images.size(), n}, std::move(values));
}

namespace {
Embedding to_embedding(const ad::Tensor& row) { return {row.data().begin(), row.data().end()}; }
}  // namespace

Embedding embed_audio(const audio::MelSpectrogram& mel, const Encoders& p) {
  return to_embedding(encode_audio(audio_features<float>({&mel, 1}, p), p));
}

Embedding embed_text(const text::TokenSequence& tokens, const text::Vocabulary& vocab,
                     const Encoders& p) {
  return to_embedding(
      encode_text(text_features<float>({&tokens, 1}, vocab, p.config.vocab_size), p));
}

Embedding embed_image(const Image& image, const Encoders& p) {
  return to_embedding(encode_image(image_batch<float>({&image, 1}), p));
}

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

#define SGIM_INSTANTIATE(T)                                                                   \
  template void fit_audio_normalizer<T>(EncoderParams<T>&,                                    \
                                        const std::vector<audio::MelSpectrogram>&);           \
  template ad::BasicTensor<T> audio_features<T>(std::span<const audio::MelSpectrogram>,      \
                                                const EncoderParams<T>&);                     \
  template ad::BasicTensor<T> text_features<T>(std::span<const text::TokenSequence>,         \
                                               const text::Vocabulary&, std::size_t);         \
  template ad::BasicTensor<T> image_batch<T>(std::span<const Image>);

SGIM_INSTANTIATE(float)
SGIM_INSTANTIATE(double)
#undef SGIM_INSTANTIATE

}  // namespace sgim::model
