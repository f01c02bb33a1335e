#include "sgim/manip/manipulator.h"

#include <cmath>
#include <cstdio>

namespace sgim::manip {

void ManipConfig::validate() const {
  if (lambda_sim < 0.0 || lambda_id < 0.0) throw ContractError("lambdas must be nonnegative");
  if (steps < 1) throw ContractError("manipulation needs at least one step");
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) {
    throw ContractError("step size must be finite and nonnegative");
  }
  if (!std::isfinite(gate_init)) throw ContractError("gate init must be finite");
}

std::vector<float> gated_norm_prox(const std::vector<float>& v, const std::vector<float>& gate,
                                   std::size_t cols, double t) {
  const std::size_t rows = gate.size();
  if (v.size() != rows * cols) throw DimensionError("prox: value and gate shapes disagree");
  std::vector<double> row_sq(rows, 0.0);
  for (std::size_t l = 0; l < rows; ++l) {
    for (std::size_t j = 0; j < cols; ++j) row_sq[l] += static_cast<double>(v[l * cols + j]) * v[l * cols + j];
  }
  std::vector<float> out(v.size(), 0.0f);
  if (t <= 0.0) return v;
  // Zero is optimal when ||diag(gate)^-1 v|| <= t.
  double inv = 0.0, fwd = 0.0;
  for (std::size_t l = 0; l < rows; ++l) {
    const double g2 = static_cast<double>(gate[l]) * gate[l];
    inv += g2 > 0.0 ? row_sq[l] / g2 : (row_sq[l] > 0.0 ? INFINITY : 0.0);
    fwd += g2 * row_sq[l];
  }
  if (std::sqrt(inv) <= t) return out;
  // Otherwise D_l = v_l s / (s + t g_l^2) where s > 0 solves
  // sum_l g_l^2 |v_l|^2 / (s + t g_l^2)^2 = 1.
  auto excess = [&](double s) {
    double total = 0.0;
    for (std::size_t l = 0; l < rows; ++l) {
      const double g2 = static_cast<double>(gate[l]) * gate[l];
      const double d = s + t * g2;
      if (d > 0.0) total += g2 * row_sq[l] / (d * d);
    }
    return total - 1.0;
  };
  double lo = 0.0, hi = std::max(std::sqrt(fwd), 1e-300);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  for (std::size_t l = 0; l < rows; ++l) {
    const double g2 = static_cast<double>(gate[l]) * gate[l];
    const double f = s / (s + t * g2);
    for (std::size_t j = 0; j < cols; ++j) out[l * cols + j] = static_cast<float>(v[l * cols + j] * f);
  }
  return out;
}

ManipResult optimize_latent(const ad::Tensor& w_s, const model::Embedding& target,
                            const ManipConfig& cfg, const gen::Generator& g,
                            const model::Encoders& e) {
  cfg.validate();
  const auto gp = g.synthesis.cast<float>(false);
  const auto ep = e.cast<float>(false);
  const std::size_t rows = g.config.layers, cols = g.config.style_dim;
  if (w_s.rank() != 2 || w_s.rows() != rows || w_s.cols() != cols) {
    throw DimensionError("source code must be " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  const auto source = w_s.detach();
  const auto target_t = ad::Tensor::from({1, target.size()}, target);
  const auto source_identity = image_embedding(source, gp, ep);
  std::vector<float> delta(rows * cols, 0.0f);
  auto gamma = ad::Tensor::full({rows, 1}, static_cast<float>(cfg.gate_init), true);

  auto current_code = [&](bool grad) {
    std::vector<float> w(source.data().begin(), source.data().end());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += delta[i];
    return ad::Tensor::from({rows, cols}, std::move(w), grad);
  };
  auto record = [](std::size_t step, const ManipTerms<float>& t) {
    TraceRow r{step, t.total.item(), t.cosine.item(), t.identity.item(), t.penalty.item()};
    if (!std::isfinite(r.total)) {
      throw NumericalError("non-finite manipulation loss at step " + std::to_string(step));
    }
    return r;
  };

  ManipResult result;
  const double eta = cfg.step_size;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    auto w_a = current_code(true);
    gamma.zero_grad();
    const auto terms =
        manip_terms(w_a, w_a.detach(), source, target_t, gamma, cfg, gp, ep, source_identity);
    result.trace.push_back(record(step, terms));
    ad::backward(terms.total);

    std::vector<float> gate(rows);
    for (std::size_t l = 0; l < rows; ++l) gate[l] = 1.0f / (1.0f + std::exp(-gamma.data()[l]));
    std::vector<float> v(delta);
    const auto gw = w_a.grad();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= static_cast<float>(eta * gw[i]);
    delta = gated_norm_prox(v, gate, cols, eta * cfg.lambda_sim);

    if (gamma.has_grad()) {
      auto gd = gamma.mutable_data();
      const auto gg = gamma.grad();
      for (std::size_t l = 0; l < rows; ++l) gd[l] -= static_cast<float>(eta * gg[l]);
    }
  }
  result.w_a = current_code(false);
  const auto final_terms = manip_terms(result.w_a, result.w_a, source, target_t,
                                       gamma.detach(), cfg, gp, ep, source_identity);
  result.trace.push_back(record(cfg.steps, final_terms));
  result.gate.resize(rows);
  for (std::size_t l = 0; l < rows; ++l) result.gate[l] = 1.0f / (1.0f + std::exp(-gamma.data()[l]));
  return result;
}

std::size_t default_split(std::size_t layers) { return (layers + 1) / 2; }

ad::Tensor style_mix(const ad::Tensor& w_audio, const ad::Tensor& w_text, std::size_t split) {
  if (w_audio.shape() != w_text.shape() || w_audio.rank() != 2) {
    throw DimensionError("style mixing needs two latent codes of equal shape");
  }
  const std::size_t rows = w_audio.rows(), cols = w_audio.cols();
  if (split == 0 || split >= rows) {
    throw ContractError("split must lie in [1, " + std::to_string(rows - 1) + "], got " +
                        std::to_string(split));
  }
  std::vector<float> out(w_audio.data().begin(), w_audio.data().begin() + split * cols);
  out.insert(out.end(), w_text.data().begin() + split * cols, w_text.data().end());
  return ad::Tensor::from({rows, cols}, std::move(out));
}

std::string format_trace_row(const TraceRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu %.7f %.7f %.7f %.7f", row.step, row.total, row.cosine,
                row.identity, row.penalty);
  return buf;
}

}  // namespace sgim::manip
