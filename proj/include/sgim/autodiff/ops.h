#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sgim/autodiff/tensor.h"

namespace sgim::ad {

namespace detail {

// How the second operand of a binary elementwise op maps onto the first.
enum class Broadcast { kSame, kScalar, kRow, kColumn };

template <typename T>
Broadcast broadcast_kind(const BasicTensor<T>& a, const BasicTensor<T>& b,
                         const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.size() == 1) return Broadcast::kScalar;
  if (a.rank() == 2 && b.rows() == 1 && b.cols() == a.cols() && b.rank() <= 2) {
    return Broadcast::kRow;
  }
  if (a.rank() == 2 && b.rank() == 2 && b.cols() == 1 && b.rows() == a.rows()) {
    return Broadcast::kColumn;
  }
  if (a.size() == b.size() && a.rows() == b.rows()) return Broadcast::kSame;
  throw DimensionError(std::string(op) + ": cannot broadcast " + shape_string(b.shape()) +
                       " onto " + shape_string(a.shape()));
}

inline std::size_t broadcast_index(Broadcast kind, std::size_t i, std::size_t cols) {
  switch (kind) {
    case Broadcast::kSame:
      return i;
    case Broadcast::kScalar:
      return 0;
    case Broadcast::kRow:
      return i % cols;
    case Broadcast::kColumn:
      return i / cols;
  }
  return i;
}

template <typename T>
void require_matrix(const BasicTensor<T>& a, const char* op) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + " expects a matrix, got " + shape_string(a.shape()));
  }
}

template <typename T>
BasicTensor<T> unary(const char* name, const BasicTensor<T>& x, T (*forward)(T),
                     T (*derivative)(T x, T y)) {
  std::vector<T> out(x.size());
  auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(xs[i]);
  return make_op<T>(name, x.shape(), std::move(out), {x}, [derivative](Node<T>& self) {
    auto& in = *self.inputs[0];
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * derivative(in.value[i], self.value[i]);
    }
  });
}

// Fixed-order dot product over eight independent lanes.
template <typename T>
double dot(const T* x, const T* y, std::size_t n) {
  double lane[8] = {};
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    for (std::size_t l = 0; l < 8; ++l) lane[l] += static_cast<double>(x[j + l]) * y[j + l];
  }
  for (; j < n; ++j) lane[j % 8] += static_cast<double>(x[j]) * y[j];
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

}  // namespace detail

// a + b, with b equal-shaped, a scalar, a row vector or a column vector.
template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.size() < b.size()) return add(b, a);
  const auto kind = detail::broadcast_kind(a, b, "add");
  const std::size_t cols = a.cols();
  std::vector<T> out(a.size());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[i] + bv[detail::broadcast_index(kind, i, cols)];
  }
  return make_op<T>("add", a.shape(), std::move(out), {a, b}, [kind, cols](Node<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    if (na.requires_grad) {
      auto& g = na.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (nb.requires_grad) {
      auto& g = nb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[detail::broadcast_index(kind, i, cols)] += self.grad[i];
      }
    }
  });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const auto kind = detail::broadcast_kind(a, b, "sub");
  const std::size_t cols = a.cols();
  std::vector<T> out(a.size());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[i] - bv[detail::broadcast_index(kind, i, cols)];
  }
  return make_op<T>("sub", a.shape(), std::move(out), {a, b}, [kind, cols](Node<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    if (na.requires_grad) {
      auto& g = na.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (nb.requires_grad) {
      auto& g = nb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[detail::broadcast_index(kind, i, cols)] -= self.grad[i];
      }
    }
  });
}

// Elementwise product, same broadcasting rules as add.
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.size() < b.size()) return mul(b, a);
  const auto kind = detail::broadcast_kind(a, b, "mul");
  const std::size_t cols = a.cols();
  std::vector<T> out(a.size());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[i] * bv[detail::broadcast_index(kind, i, cols)];
  }
  return make_op<T>("mul", a.shape(), std::move(out), {a, b}, [kind, cols](Node<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    if (na.requires_grad) {
      auto& g = na.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += self.grad[i] * nb.value[detail::broadcast_index(kind, i, cols)];
      }
    }
    if (nb.requires_grad) {
      auto& g = nb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[detail::broadcast_index(kind, i, cols)] += self.grad[i] * na.value[i];
      }
    }
  });
}

// scale * x + shift with constant coefficients.
template <typename T>
BasicTensor<T> affine(const BasicTensor<T>& x, T scale, T shift = T(0)) {
  std::vector<T> out(x.size());
  auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * xs[i] + shift;
  return make_op<T>("affine", x.shape(), std::move(out), {x}, [scale](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * self.grad[i];
  });
}

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  detail::require_matrix(a, "matmul");
  detail::require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ for " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  std::vector<T> out(m * n);
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const T* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += aip * brow[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = static_cast<T>(acc[j]);
  }
  return make_op<T>("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    const T* gy = self.grad.data();
    if (na.requires_grad) {
      // dA = dY * B^T
      auto& ga = na.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const T* brow = nb.value.data() + p * n;
          const T* grow = gy + i * n;
          ga[i * k + p] += static_cast<T>(detail::dot(grow, brow, n));
        }
      }
    }
    if (nb.requires_grad) {
      // dB = A^T * dY
      auto& gb = nb.ensure_grad();
      std::vector<double> acc(k * n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const T* grow = gy + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = na.value[i * k + p];
          if (aip == 0.0) continue;
          double* arow = acc.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) arow[j] += aip * grow[j];
        }
      }
      for (std::size_t i = 0; i < acc.size(); ++i) gb[i] += static_cast<T>(acc[i]);
    }
  });
}

template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a) {
  detail::require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(m * n);
  auto av = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return make_op<T>("transpose", {n, m}, std::move(out), {a}, [m, n](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
  });
}

// Subgradient at 0 is 0.
template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  return detail::unary<T>(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
BasicTensor<T> tanh(const BasicTensor<T>& x) {
  return detail::unary<T>(
      "tanh", x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  return detail::unary<T>(
      "sigmoid", x, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
BasicTensor<T> exp(const BasicTensor<T>& x) {
  return detail::unary<T>(
      "exp", x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <typename T>
BasicTensor<T> log(const BasicTensor<T>& x) {
  return detail::unary<T>(
      "log", x, [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  double s = 0.0;
  for (T v : x.data()) s += v;
  return make_op<T>("sum", {}, {static_cast<T>(s)}, {x}, [](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
  double s = 0.0;
  for (T v : x.data()) s += v;
  const std::size_t n = x.size();
  return make_op<T>("mean", {}, {static_cast<T>(s / n)}, {x}, [n](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    const T share = self.grad[0] / static_cast<T>(n);
    for (auto& v : g) v += share;
  });
}

// Frobenius norm. The gradient at the zero tensor is taken as 0.
template <typename T>
BasicTensor<T> norm(const BasicTensor<T>& x) {
  double s = 0.0;
  for (T v : x.data()) s += static_cast<double>(v) * v;
  const T r = static_cast<T>(std::sqrt(s));
  return make_op<T>("norm", {}, {r}, {x}, [](Node<T>& self) {
    const T r = self.value[0];
    if (r == T(0)) return;
    auto& in = *self.inputs[0];
    auto& g = in.ensure_grad();
    const T scale = self.grad[0] / r;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * in.value[i];
  });
}

// Row-wise log-softmax with max subtraction.
template <typename T>
BasicTensor<T> log_softmax_rows(const BasicTensor<T>& x) {
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<T> out(x.size());
  auto xs = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = xs.data() + i * n;
    T mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(static_cast<double>(row[j] - mx));
    const T lse = mx + static_cast<T>(std::log(z));
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = row[j] - lse;
  }
  return make_op<T>("log_softmax_rows", x.shape(), std::move(out), {x}, [m, n](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      double gsum = 0.0;
      for (std::size_t j = 0; j < n; ++j) gsum += self.grad[i * n + j];
      for (std::size_t j = 0; j < n; ++j) {
        const T p = std::exp(self.value[i * n + j]);
        g[i * n + j] += self.grad[i * n + j] - p * static_cast<T>(gsum);
      }
    }
  });
}

inline constexpr double kNormalizeEpsilon = 1e-12;

// Each row divided by (its L2 norm + 1e-12). A rank-1 input is one row.
template <typename T>
BasicTensor<T> l2_normalize_rows(const BasicTensor<T>& x) {
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<T> out(x.size());
  std::vector<T> norms(m);
  auto xs = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += static_cast<double>(xs[i * n + j]) * xs[i * n + j];
    norms[i] = static_cast<T>(std::sqrt(s));
    if (norms[i] == T(0) && checked_mode()) {
      throw NumericalError("l2_normalize: zero-norm row " + std::to_string(i));
    }
    const double denom = std::sqrt(s) + kNormalizeEpsilon;
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = static_cast<T>(xs[i * n + j] / denom);
  }
  return make_op<T>("l2_normalize_rows", x.shape(), std::move(out), {x},
                    [m, n, norms = std::move(norms)](Node<T>& self) {
                      auto& in = *self.inputs[0];
                      auto& g = in.ensure_grad();
                      for (std::size_t i = 0; i < m; ++i) {
                        const T r = norms[i];
                        const T s = r + static_cast<T>(kNormalizeEpsilon);
                        const T* x = in.value.data() + i * n;
                        const T* gy = self.grad.data() + i * n;
                        double dot = 0.0;
                        for (std::size_t j = 0; j < n; ++j) dot += static_cast<double>(gy[j]) * x[j];
                        const T coeff = r > T(0) ? static_cast<T>(dot) / (s * s * r) : T(0);
                        for (std::size_t j = 0; j < n; ++j) {
                          g[i * n + j] += gy[j] / s - x[j] * coeff;
                        }
                      }
                    });
}

// Rows [begin, end) of a matrix.
template <typename T>
BasicTensor<T> slice_rows(const BasicTensor<T>& a, std::size_t begin, std::size_t end) {
  detail::require_matrix(a, "slice_rows");
  if (begin >= end || end > a.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for " + shape_string(a.shape()));
  }
  const std::size_t n = a.cols();
  auto av = a.data();
  std::vector<T> out(av.begin() + begin * n, av.begin() + end * n);
  return make_op<T>("slice_rows", {end - begin, n}, std::move(out), {a},
                    [begin, n](Node<T>& self) {
                      auto& g = self.inputs[0]->ensure_grad();
                      for (std::size_t i = 0; i < self.grad.size(); ++i) {
                        g[begin * n + i] += self.grad[i];
                      }
                    });
}

template <typename T>
BasicTensor<T> concat_rows(const std::vector<BasicTensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::size_t total = 0;
  std::vector<T> out;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    if (p.cols() != n) {
      throw DimensionError("concat_rows: column mismatch " + shape_string(parts[0].shape()) +
                           " vs " + shape_string(p.shape()));
    }
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
    total += p.rows();
  }
  return make_op<T>("concat_rows", {total, n}, std::move(out), parts,
                    [offsets = std::move(offsets)](Node<T>& self) {
                      for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                        auto& in = *self.inputs[k];
                        if (!in.requires_grad) continue;
                        auto& g = in.ensure_grad();
                        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offsets[k] + i];
                      }
                    });
}

template <typename T>
BasicTensor<T> concat_cols(const std::vector<BasicTensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row mismatch " + shape_string(parts[0].shape()) +
                           " vs " + shape_string(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<T> out(m * total);
  std::size_t col = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto pv = parts[k].data();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j) out[i * total + col + j] = pv[i * widths[k] + j];
    col += widths[k];
  }
  return make_op<T>("concat_cols", {m, total}, std::move(out), parts,
                    [m, total, widths = std::move(widths)](Node<T>& self) {
                      std::size_t col = 0;
                      for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                        auto& in = *self.inputs[k];
                        if (in.requires_grad) {
                          auto& g = in.ensure_grad();
                          for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < widths[k]; ++j)
                              g[i * widths[k] + j] += self.grad[i * total + col + j];
                        }
                        col += widths[k];
                      }
                    });
}

// Non-overlapping k x k average pooling. Each row of x is one image stored
// channel-major (C x H x W); H and W must be multiples of k.
template <typename T>
BasicTensor<T> avg_pool(const BasicTensor<T>& x, std::size_t channels, std::size_t height,
                        std::size_t width, std::size_t k) {
  if (k == 0 || height % k != 0 || width % k != 0 || x.cols() != channels * height * width) {
    throw DimensionError("avg_pool: input " + shape_string(x.shape()) + " is not a batch of " +
                         std::to_string(channels) + "x" + std::to_string(height) + "x" +
                         std::to_string(width) + " images poolable by " + std::to_string(k));
  }
  const std::size_t n = x.rows();
  const std::size_t oh = height / k, ow = width / k;
  const std::size_t in_cols = x.cols(), out_cols = channels * oh * ow;
  const T inv = T(1) / static_cast<T>(k * k);
  std::vector<T> out(n * out_cols, T(0));
  auto xs = x.data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t xx = 0; xx < width; ++xx) {
          out[b * out_cols + (c * oh + y / k) * ow + xx / k] +=
              xs[b * in_cols + (c * height + y) * width + xx] * inv;
        }
  return make_op<T>("avg_pool", {n, out_cols}, std::move(out), {x},
                    [=](Node<T>& self) {
                      auto& g = self.inputs[0]->ensure_grad();
                      for (std::size_t b = 0; b < n; ++b)
                        for (std::size_t c = 0; c < channels; ++c)
                          for (std::size_t y = 0; y < height; ++y)
                            for (std::size_t xx = 0; xx < width; ++xx) {
                              g[b * in_cols + (c * height + y) * width + xx] +=
                                  self.grad[b * out_cols + (c * oh + y / k) * ow + xx / k] * inv;
                            }
                    });
}

template <typename T>
BasicTensor<T> operator+(const BasicTensor<T>& a, const BasicTensor<T>& b) { return add(a, b); }
template <typename T>
BasicTensor<T> operator-(const BasicTensor<T>& a, const BasicTensor<T>& b) { return sub(a, b); }
template <typename T>
BasicTensor<T> operator*(const BasicTensor<T>& a, const BasicTensor<T>& b) { return mul(a, b); }

}  // namespace sgim::ad
