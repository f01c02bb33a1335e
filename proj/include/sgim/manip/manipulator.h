#pragma once

// Latent-code optimization toward an audio (or text) embedding:
//   d_cos(E_v(G(w_a)), a) + lambda_id * L_id + lambda_sim * ||diag(g) (w_a - w_s)||_F
// with g = sigmoid(gamma) a per-layer gate and L_id measured by the frozen
// image encoder acting as identity embedder.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sgim/autodiff/ops.h"
#include "sgim/gen/generator.h"
#include "sgim/model/encoders.h"

namespace sgim::manip {

struct ManipConfig {
  double lambda_sim = 0.008;
  double lambda_id = 0.004;
  std::size_t steps = 300;
  double step_size = 0.05;
  double gate_init = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

template <typename T>
ad::BasicTensor<T> image_embedding(const ad::BasicTensor<T>& w, const gen::GeneratorParams<T>& g,
                                   const model::EncoderParams<T>& e) {
  return model::encode_image(gen::generate(w, g), e);
}

// Half the squared distance of unit-norm identity embeddings, which equals
// 1 - cos and is exactly 0 for identical codes.
template <typename T>
ad::BasicTensor<T> identity_loss_from(const ad::BasicTensor<T>& source_identity,
                                      const ad::BasicTensor<T>& w_a,
                                      const gen::GeneratorParams<T>& g,
                                      const model::EncoderParams<T>& r) {
  const auto d = ad::sub(image_embedding(w_a, g, r), source_identity);
  return ad::affine(ad::sum(ad::mul(d, d)), T(0.5));
}

template <typename T>
ad::BasicTensor<T> identity_loss(const ad::BasicTensor<T>& w_s, const ad::BasicTensor<T>& w_a,
                                 const gen::GeneratorParams<T>& g,
                                 const model::EncoderParams<T>& r) {
  return identity_loss_from(image_embedding(w_s, g, r), w_a, g, r);
}

// ||diag(sigmoid(gamma)) (w_a - w_s)||_F; gamma is L x 1.
template <typename T>
ad::BasicTensor<T> gated_penalty(const ad::BasicTensor<T>& w_a, const ad::BasicTensor<T>& w_s,
                                 const ad::BasicTensor<T>& gamma) {
  if (gamma.rank() != 2 || gamma.cols() != 1 || gamma.rows() != w_a.rows()) {
    throw DimensionError("gate must be " + std::to_string(w_a.rows()) + "x1, got " +
                         ad::shape_string(gamma.shape()));
  }
  return ad::norm(ad::mul(ad::sub(w_a, w_s), ad::sigmoid(gamma)));
}

template <typename T>
struct ManipTerms {
  ad::BasicTensor<T> total, cosine, identity, penalty;
};

// target: 1 x d unit-norm embedding. `penalty_code` is the code the gated
// penalty reads; it is w_a itself unless the caller handles that term separately.
template <typename T>
ManipTerms<T> manip_terms(const ad::BasicTensor<T>& w_a, const ad::BasicTensor<T>& penalty_code,
                          const ad::BasicTensor<T>& w_s, const ad::BasicTensor<T>& target,
                          const ad::BasicTensor<T>& gamma, const ManipConfig& cfg,
                          const gen::GeneratorParams<T>& g, const model::EncoderParams<T>& e,
                          const ad::BasicTensor<T>& source_identity) {
  if (w_a.shape() != w_s.shape()) {
    throw DimensionError("latent codes differ in shape: " + ad::shape_string(w_a.shape()) +
                         " vs " + ad::shape_string(w_s.shape()));
  }
  if (target.size() != e.config.embed_dim) {
    throw DimensionError("target embedding must have " + std::to_string(e.config.embed_dim) +
                         " entries");
  }
  const auto x = image_embedding(w_a, g, e);
  const auto t = ad::BasicTensor<T>::from({1, target.size()},
                                          std::vector<T>(target.data().begin(), target.data().end()));
  ManipTerms<T> out;
  out.cosine = ad::affine(ad::sum(ad::mul(x, t)), T(-1), T(1));
  out.identity = identity_loss_from(source_identity, w_a, g, e);
  out.penalty = gated_penalty(penalty_code, w_s, gamma);
  out.total = ad::add(ad::add(out.cosine, ad::affine(out.identity, static_cast<T>(cfg.lambda_id))),
                      ad::affine(out.penalty, static_cast<T>(cfg.lambda_sim)));
  return out;
}

template <typename T>
ManipTerms<T> manip_loss(const ad::BasicTensor<T>& w_a, const ad::BasicTensor<T>& w_s,
                         const ad::BasicTensor<T>& target, const ad::BasicTensor<T>& gamma,
                         const ManipConfig& cfg, const gen::GeneratorParams<T>& g,
                         const model::EncoderParams<T>& e) {
  return manip_terms(w_a, w_a, w_s, target, gamma, cfg, g, e, image_embedding(w_s.detach(), g, e));
}

struct TraceRow {
  std::size_t step = 0;
  double total = 0, cosine = 0, identity = 0, penalty = 0;
};

struct ManipResult {
  ad::Tensor w_a;
  std::vector<float> gate;
  // One row per step before its update, plus the final state.
  std::vector<TraceRow> trace;
};

// Joint descent on w_a and gamma. The smooth terms take a gradient step on
// w_a; the gated norm is then applied through its proximal map, so the code
// can settle exactly on w_s. gamma follows the plain gradient.
ManipResult optimize_latent(const ad::Tensor& w_s, const model::Embedding& target,
                            const ManipConfig& cfg, const gen::Generator& g,
                            const model::Encoders& e);

// argmin_D 0.5 ||D - v||^2 + t ||diag(gate) D||_F over L x D matrices.
std::vector<float> gated_norm_prox(const std::vector<float>& v, const std::vector<float>& gate,
                                   std::size_t cols, double t);

std::size_t default_split(std::size_t layers);

// Rows [0, split) from w_audio, rows [split, L) from w_text.
ad::Tensor style_mix(const ad::Tensor& w_audio, const ad::Tensor& w_text, std::size_t split);

std::string format_trace_row(const TraceRow& row);

}  // namespace sgim::manip
