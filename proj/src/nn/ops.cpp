// SPDX-License-Identifier: Apache-2.0
#include "kombo/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kombo/error.hpp"

namespace kombo::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

template <typename T>
ConstMatMap<T> as_matrix(const Tensor<T>& t) {
  return ConstMatMap<T>(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

template <typename T>
MatMap<T> as_matrix(Tensor<T>& t) {
  return MatMap<T>(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

void shape_error(const std::string& op, const std::string& detail) {
  throw Error(ErrorKind::ShapeError, op + ": " + detail);
}

template <typename T>
void require_same(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    shape_error(op, shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

template <typename T>
void require_rank3(const Var<T>& x, const char* op) {
  if (x.shape().size() != 3) shape_error(op, "expected [B, N, D], got " + shape_string(x.shape()));
}

// Grad of input `i`, or nullptr when that input does not need one.
template <typename T>
Tensor<T>* grad_of(Node<T>& self, std::size_t i) {
  auto& in = self.inputs[i];
  return in->requires_grad ? &in->ensure_grad() : nullptr;
}

template <typename T>
const Tensor<T>& value_of(Node<T>& self, std::size_t i) {
  return self.inputs[i]->value;
}

template <typename T, typename F>
Var<T> unary(const Var<T>& x, F&& f, std::function<void(Node<T>&)> bw) {
  Tensor<T> out(x.shape());
  const auto& xv = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  return make_result<T>(std::move(out), {x}, std::move(bw));
}

}  // namespace

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same(a, b, "add");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same(a, b, "sub");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same(a, b, "mul");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    const auto& av = value_of(self, 0);
    const auto& bv = value_of(self, 1);
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * bv[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * av[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  return unary<T>(a, [factor](T v) { return v * factor; }, [factor](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * factor;
    }
  });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return unary<T>(x, [](T v) { return T(1) / (T(1) + std::exp(-v)); }, [](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        const T y = self.value[i];
        (*g)[i] += self.grad[i] * y * (T(1) - y);
      }
    }
  });
}

template <typename T>
Var<T> tanh(const Var<T>& x) {
  return unary<T>(x, [](T v) { return std::tanh(v); }, [](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        const T y = self.value[i];
        (*g)[i] += self.grad[i] * (T(1) - y * y);
      }
    }
  });
}

template <typename T>
Var<T> gelu(const Var<T>& x) {
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  return unary<T>(x, [inv_sqrt2](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); },
                  [inv_sqrt2](Node<T>& self) {
                    if (auto* g = grad_of(self, 0)) {
                      const auto& xv = value_of(self, 0);
                      const T inv_sqrt2pi = inv_sqrt2 * std::numbers::inv_sqrtpi_v<T>;
                      for (std::size_t i = 0; i < g->size(); ++i) {
                        const T v = xv[i];
                        const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
                        const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
                        (*g)[i] += self.grad[i] * (cdf + v * pdf);
                      }
                    }
                  });
}

template <typename T>
Var<T> matmul(const Var<T>& x, const Var<T>& w) {
  if (w.shape().size() != 2 || x.shape().back() != w.shape()[0]) {
    shape_error("matmul", shape_string(x.shape()) + " @ " + shape_string(w.shape()));
  }
  Shape out_shape = x.shape();
  out_shape.back() = w.shape()[1];
  Tensor<T> out(out_shape);
  as_matrix(out).noalias() = as_matrix(x.value()) * as_matrix(w.value());
  return make_result<T>(std::move(out), {x, w}, [](Node<T>& self) {
    const auto dy = as_matrix(std::as_const(self.grad));
    if (auto* g = grad_of(self, 0)) as_matrix(*g).noalias() += dy * as_matrix(value_of(self, 1)).transpose();
    if (auto* g = grad_of(self, 1)) as_matrix(*g).noalias() += as_matrix(value_of(self, 0)).transpose() * dy;
  });
}

template <typename T>
Var<T> add_bias(const Var<T>& x, const Var<T>& b) {
  if (b.shape().size() != 1 || b.shape()[0] != x.shape().back()) {
    shape_error("add_bias", shape_string(x.shape()) + " + " + shape_string(b.shape()));
  }
  Tensor<T> out = x.value();
  as_matrix(out).rowwise() += as_matrix(b.value()).row(0);
  return make_result<T>(std::move(out), {x, b}, [](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = grad_of(self, 1)) {
      as_matrix(*g).row(0) += as_matrix(std::as_const(self.grad)).colwise().sum();
    }
  });
}

template <typename T>
Var<T> affine(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  return add_bias(matmul(x, w), b);
}

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  const std::size_t d = x.shape().back();
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    shape_error("layer_norm", "affine parameters must be (" + std::to_string(d) + ")");
  }
  const std::size_t rows = x.value().rows();
  Tensor<T> out(x.shape());
  Tensor<T> xhat(x.shape());
  std::vector<T> rstd(rows);
  const auto& xv = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * d;
    T mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<T>(d);
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (row[j] - mean) * rstd[r];
      xhat[r * d + j] = h;
      out[r * d + j] = h * gamma.value()[j] + beta.value()[j];
    }
  }
  return make_result<T>(std::move(out), {x, gamma, beta},
                        [xhat = std::move(xhat), rstd = std::move(rstd), d, rows](Node<T>& self) {
    const auto& gam = value_of(self, 1);
    auto* gx = grad_of(self, 0);
    auto* gg = grad_of(self, 1);
    auto* gb = grad_of(self, 2);
    std::vector<T> dxhat(d);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* dy = self.grad.data() + r * d;
      const T* h = xhat.data() + r * d;
      T mean_dxhat = 0;
      T mean_dxhat_h = 0;
      for (std::size_t j = 0; j < d; ++j) {
        if (gg) (*gg)[j] += dy[j] * h[j];
        if (gb) (*gb)[j] += dy[j];
        dxhat[j] = dy[j] * gam[j];
        mean_dxhat += dxhat[j];
        mean_dxhat_h += dxhat[j] * h[j];
      }
      if (!gx) continue;
      mean_dxhat /= static_cast<T>(d);
      mean_dxhat_h /= static_cast<T>(d);
      for (std::size_t j = 0; j < d; ++j) {
        (*gx)[r * d + j] += rstd[r] * (dxhat[j] - mean_dxhat - h[j] * mean_dxhat_h);
      }
    }
  });
}

template <typename T>
Var<T> embedding(const std::vector<int>& ids, std::size_t batch, std::size_t length, const Var<T>& table) {
  if (ids.size() != batch * length) shape_error("embedding", "ids do not match batch x length");
  if (table.shape().size() != 2) shape_error("embedding", "table must be [V, D]");
  const std::size_t vocab = table.shape()[0];
  const std::size_t d = table.shape()[1];
  Tensor<T> out({batch, length, d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw Error(ErrorKind::VocabError, "id " + std::to_string(ids[i]) + " outside table of " + std::to_string(vocab));
    }
    std::copy_n(table.value().data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  return make_result<T>(std::move(out), {table}, [ids, d](Node<T>& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      T* dst = g->data() + static_cast<std::size_t>(ids[i]) * d;
      const T* src = self.grad.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

template <typename T>
Var<T> add_positional(const Var<T>& x, const Var<T>& table) {
  require_rank3(x, "add_positional");
  const std::size_t b = x.shape()[0], n = x.shape()[1], d = x.shape()[2];
  if (table.shape().size() != 2 || table.shape()[1] != d || table.shape()[0] < n) {
    shape_error("add_positional", "table " + shape_string(table.shape()) + " cannot cover " + shape_string(x.shape()));
  }
  Tensor<T> out = x.value();
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t i = 0; i < n * d; ++i) out[bi * n * d + i] += table.value()[i];
  }
  return make_result<T>(std::move(out), {x, table}, [b, n, d](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t bi = 0; bi < b; ++bi) {
        for (std::size_t i = 0; i < n * d; ++i) (*g)[i] += self.grad[bi * n * d + i];
      }
    }
  });
}

template <typename T>
Var<T> group_sum(const Var<T>& x, std::size_t stride, std::size_t begin, std::size_t count) {
  require_rank3(x, "group_sum");
  const std::size_t b = x.shape()[0], n = x.shape()[1], d = x.shape()[2];
  if (stride == 0 || n % stride != 0) {
    throw Error(ErrorKind::AlignmentError, "length " + std::to_string(n) + " is not a multiple of " +
                                               std::to_string(stride));
  }
  if (begin + count > stride) shape_error("group_sum", "slot group exceeds the character width");
  const std::size_t m = n / stride;
  Tensor<T> out({b, m, d});
  const auto& xv = x.value();
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t k = 0; k < m; ++k) {
      T* dst = out.data() + (bi * m + k) * d;
      for (std::size_t s = 0; s < count; ++s) {
        const T* src = xv.data() + (bi * n + k * stride + begin + s) * d;
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [b, n, d, m, stride, begin, count](Node<T>& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t k = 0; k < m; ++k) {
        const T* src = self.grad.data() + (bi * m + k) * d;
        for (std::size_t s = 0; s < count; ++s) {
          T* dst = g->data() + (bi * n + k * stride + begin + s) * d;
          for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
      }
    }
  });
}

template <typename T>
Var<T> interleave(const Var<T>& a, const Var<T>& b) {
  require_rank3(a, "interleave");
  require_same(a, b, "interleave");
  const std::size_t bs = a.shape()[0], m = a.shape()[1], d = a.shape()[2];
  Tensor<T> out({bs, 2 * m, d});
  for (std::size_t bi = 0; bi < bs; ++bi) {
    for (std::size_t k = 0; k < m; ++k) {
      std::copy_n(a.value().data() + (bi * m + k) * d, d, out.data() + (bi * 2 * m + 2 * k) * d);
      std::copy_n(b.value().data() + (bi * m + k) * d, d, out.data() + (bi * 2 * m + 2 * k + 1) * d);
    }
  }
  return make_result<T>(std::move(out), {a, b}, [bs, m, d](Node<T>& self) {
    for (std::size_t which = 0; which < 2; ++which) {
      auto* g = grad_of(self, which);
      if (!g) continue;
      for (std::size_t bi = 0; bi < bs; ++bi) {
        for (std::size_t k = 0; k < m; ++k) {
          const T* src = self.grad.data() + (bi * 2 * m + 2 * k + which) * d;
          T* dst = g->data() + (bi * m + k) * d;
          for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
      }
    }
  });
}

template <typename T>
Var<T> repeat_rows(const Var<T>& x, const std::vector<std::size_t>& pattern) {
  require_rank3(x, "repeat_rows");
  const std::size_t b = x.shape()[0], r = x.shape()[1], d = x.shape()[2];
  if (pattern.empty() || r % pattern.size() != 0) {
    throw Error(ErrorKind::AlignmentError, "row count " + std::to_string(r) + " does not fit the repeat pattern");
  }
  std::vector<std::size_t> source;
  for (std::size_t row = 0; row < r; ++row) {
    source.insert(source.end(), pattern[row % pattern.size()], row);
  }
  const std::size_t out_rows = source.size();
  Tensor<T> out({b, std::max<std::size_t>(out_rows, 1), d});
  if (out_rows == 0) shape_error("repeat_rows", "pattern produces no rows");
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t o = 0; o < out_rows; ++o) {
      std::copy_n(x.value().data() + (bi * r + source[o]) * d, d, out.data() + (bi * out_rows + o) * d);
    }
  }
  return make_result<T>(std::move(out), {x}, [source = std::move(source), b, r, d](Node<T>& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    const std::size_t out_rows = source.size();
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t o = 0; o < out_rows; ++o) {
        const T* src = self.grad.data() + (bi * out_rows + o) * d;
        T* dst = g->data() + (bi * r + source[o]) * d;
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      }
    }
  });
}

template <typename T>
Var<T> reshape(const Var<T>& x, const Shape& shape) {
  Tensor<T> out = x.value();
  out.reshape(shape);
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> select_position(const Var<T>& x, std::size_t position) {
  require_rank3(x, "select_position");
  const std::size_t b = x.shape()[0], n = x.shape()[1], d = x.shape()[2];
  if (position >= n) shape_error("select_position", "position past the sequence end");
  Tensor<T> out({b, d});
  for (std::size_t bi = 0; bi < b; ++bi) {
    std::copy_n(x.value().data() + (bi * n + position) * d, d, out.data() + bi * d);
  }
  return make_result<T>(std::move(out), {x}, [b, n, d, position](Node<T>& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t j = 0; j < d; ++j) (*g)[(bi * n + position) * d + j] += self.grad[bi * d + j];
    }
  });
}

template <typename T>
Var<T> reverse_positions(const Var<T>& x) {
  require_rank3(x, "reverse_positions");
  const std::size_t b = x.shape()[0], n = x.shape()[1], d = x.shape()[2];
  Tensor<T> out(x.shape());
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t t = 0; t < n; ++t) {
      std::copy_n(x.value().data() + (bi * n + t) * d, d, out.data() + (bi * n + (n - 1 - t)) * d);
    }
  }
  return make_result<T>(std::move(out), {x}, [b, n, d](Node<T>& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
          (*g)[(bi * n + t) * d + j] += self.grad[(bi * n + (n - 1 - t)) * d + j];
        }
      }
    }
  });
}

template <typename T>
Var<T> multihead_attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, std::size_t heads,
                           const std::vector<std::uint8_t>& key_mask, std::vector<T>* probs_out) {
  require_rank3(q, "multihead_attention");
  require_same(q, k, "multihead_attention");
  require_same(q, v, "multihead_attention");
  const std::size_t b = q.shape()[0], n = q.shape()[1], d = q.shape()[2];
  if (heads == 0 || d % heads != 0) {
    throw Error(ErrorKind::ConfigError, "model width " + std::to_string(d) + " is not divisible by " +
                                            std::to_string(heads) + " heads");
  }
  if (!key_mask.empty() && key_mask.size() != b * n) shape_error("multihead_attention", "key mask size");
  const std::size_t dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  const auto N = static_cast<Eigen::Index>(n);
  const auto DH = static_cast<Eigen::Index>(dh);
  const Eigen::OuterStride<> stride(static_cast<Eigen::Index>(d));

  Tensor<T> out(q.shape());
  std::vector<T> probs(b * heads * n * n);
  RowMat<T> scores(N, N);
  for (std::size_t bi = 0; bi < b; ++bi) {
    bool any_valid = key_mask.empty();
    for (std::size_t j = 0; !any_valid && j < n; ++j) any_valid = key_mask[bi * n + j] != 0;
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = bi * n * d + h * dh;
      ConstStridedMap<T> qh(q.value().data() + off, N, DH, stride);
      ConstStridedMap<T> kh(k.value().data() + off, N, DH, stride);
      ConstStridedMap<T> vh(v.value().data() + off, N, DH, stride);
      scores.noalias() = qh * kh.transpose();
      scores *= scale;
      MatMap<T> p(probs.data() + (bi * heads + h) * n * n, N, N);
      for (std::size_t i = 0; i < n; ++i) {
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
          const bool ok = !any_valid || key_mask.empty() || key_mask[bi * n + j] != 0;
          if (ok) mx = std::max(mx, scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        T total = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const bool ok = !any_valid || key_mask.empty() || key_mask[bi * n + j] != 0;
          const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
          p(ii, jj) = ok ? std::exp(scores(ii, jj) - mx) : T(0);
          total += p(ii, jj);
        }
        p.row(static_cast<Eigen::Index>(i)) /= total;
      }
      StridedMap<T> oh(out.data() + off, N, DH, stride);
      oh.noalias() = p * vh;
    }
  }
  if (probs_out) *probs_out = probs;
  return make_result<T>(std::move(out), {q, k, v}, [probs = std::move(probs), b, n, d, heads, dh, scale](Node<T>& self) {
    const auto N = static_cast<Eigen::Index>(n);
    const auto DH = static_cast<Eigen::Index>(dh);
    const Eigen::OuterStride<> stride(static_cast<Eigen::Index>(d));
    auto* gq = grad_of(self, 0);
    auto* gk = grad_of(self, 1);
    auto* gv = grad_of(self, 2);
    const auto& qv = value_of(self, 0);
    const auto& kv = value_of(self, 1);
    const auto& vv = value_of(self, 2);
    RowMat<T> dp(N, N);
    RowMat<T> ds(N, N);
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = bi * n * d + h * dh;
        ConstMatMap<T> p(probs.data() + (bi * heads + h) * n * n, N, N);
        ConstStridedMap<T> dout(self.grad.data() + off, N, DH, stride);
        ConstStridedMap<T> qh(qv.data() + off, N, DH, stride);
        ConstStridedMap<T> kh(kv.data() + off, N, DH, stride);
        ConstStridedMap<T> vh(vv.data() + off, N, DH, stride);
        if (gv) StridedMap<T>(gv->data() + off, N, DH, stride).noalias() += p.transpose() * dout;
        dp.noalias() = dout * vh.transpose();
        for (Eigen::Index i = 0; i < N; ++i) {
          const T dot = (dp.row(i).array() * p.row(i).array()).sum();
          ds.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
        }
        ds *= scale;
        if (gq) StridedMap<T>(gq->data() + off, N, DH, stride).noalias() += ds * kh;
        if (gk) StridedMap<T>(gk->data() + off, N, DH, stride).noalias() += ds.transpose() * qh;
      }
    }
  });
}

template <typename T>
Var<T> gru(const Var<T>& x, const Var<T>& w_ih, const Var<T>& w_hh, const Var<T>& b_ih, const Var<T>& b_hh,
           const Var<T>& h0) {
  require_rank3(x, "gru");
  const std::size_t b = x.shape()[0], n = x.shape()[1], din = x.shape()[2];
  if (w_hh.shape().size() != 2 || w_hh.shape()[1] != 3 * w_hh.shape()[0]) {
    shape_error("gru", "w_hh must be [H, 3H], got " + shape_string(w_hh.shape()));
  }
  const std::size_t hd = w_hh.shape()[0];
  if (w_ih.shape() != Shape{din, 3 * hd} || b_ih.shape() != Shape{3 * hd} || b_hh.shape() != Shape{3 * hd}) {
    shape_error("gru", "input weights do not match x " + shape_string(x.shape()) + " and H=" + std::to_string(hd));
  }
  if (h0.defined() && h0.shape() != Shape{b, hd}) shape_error("gru", "h0 must be [B, H]");

  const auto B = static_cast<Eigen::Index>(b);
  const auto H = static_cast<Eigen::Index>(hd);
  const auto H3 = static_cast<Eigen::Index>(3 * hd);

  // Input contributions for every step at once: rows ordered (batch, step).
  RowMat<T> gi = as_matrix(x.value()) * as_matrix(w_ih.value());
  gi.rowwise() += as_matrix(b_ih.value()).row(0);

  Tensor<T> out({b, n, hd});
  Tensor<T> gh_cache({b, n, 3 * hd});    // h_{t-1} W_hh + b_hh
  Tensor<T> gate_cache({b, n, 3 * hd});  // r, z, candidate
  RowMat<T> hprev = h0.defined() ? RowMat<T>(as_matrix(h0.value())) : RowMat<T>::Zero(B, H);
  RowMat<T> gh(B, H3);
  for (std::size_t t = 0; t < n; ++t) {
    gh.noalias() = hprev * as_matrix(w_hh.value());
    gh.rowwise() += as_matrix(b_hh.value()).row(0);
    for (std::size_t bi = 0; bi < b; ++bi) {
      const std::size_t row = bi * n + t;
      const T* gin = gi.data() + row * 3 * hd;
      const T* ghr = gh.data() + bi * 3 * hd;
      T* cache_gh = gh_cache.data() + row * 3 * hd;
      T* gates = gate_cache.data() + row * 3 * hd;
      T* h = out.data() + row * hd;
      for (std::size_t j = 0; j < hd; ++j) {
        const T r = T(1) / (T(1) + std::exp(-(gin[j] + ghr[j])));
        const T z = T(1) / (T(1) + std::exp(-(gin[hd + j] + ghr[hd + j])));
        const T cand = std::tanh(gin[2 * hd + j] + r * ghr[2 * hd + j]);
        const T hp = hprev(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(j));
        h[j] = (T(1) - z) * cand + z * hp;
        gates[j] = r;
        gates[hd + j] = z;
        gates[2 * hd + j] = cand;
      }
      std::copy_n(ghr, 3 * hd, cache_gh);
    }
    for (std::size_t bi = 0; bi < b; ++bi) {
      std::copy_n(out.data() + (bi * n + t) * hd, hd, hprev.data() + bi * hd);
    }
  }

  std::vector<Var<T>> inputs{x, w_ih, w_hh, b_ih, b_hh};
  if (h0.defined()) inputs.push_back(h0);
  return make_result<T>(
      std::move(out), inputs,
      [gh_cache = std::move(gh_cache), gate_cache = std::move(gate_cache), b, n, din, hd, B, H, H3,
       has_h0 = h0.defined()](Node<T>& self) {
        const auto& xv = value_of(self, 0);
        const auto& wih = value_of(self, 1);
        const auto& whh = value_of(self, 2);
        const Tensor<T>* h0v = has_h0 ? &value_of(self, 5) : nullptr;
        RowMat<T> dgi = RowMat<T>::Zero(static_cast<Eigen::Index>(b * n), H3);
        RowMat<T> dgh(B, H3);
        RowMat<T> carry = RowMat<T>::Zero(B, H);
        RowMat<T> hprev(B, H);
        RowMat<T> dwhh = RowMat<T>::Zero(H, H3);
        Eigen::Matrix<T, 1, Eigen::Dynamic> dbhh = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(H3);
        for (std::size_t tt = n; tt-- > 0;) {
          for (std::size_t bi = 0; bi < b; ++bi) {
            T* hp = hprev.data() + bi * hd;
            if (tt > 0) {
              std::copy_n(self.value.data() + (bi * n + tt - 1) * hd, hd, hp);
            } else if (h0v) {
              std::copy_n(h0v->data() + bi * hd, hd, hp);
            } else {
              std::fill_n(hp, hd, T(0));
            }
          }
          for (std::size_t bi = 0; bi < b; ++bi) {
            const std::size_t row = bi * n + tt;
            const T* gates = gate_cache.data() + row * 3 * hd;
            const T* ghr = gh_cache.data() + row * 3 * hd;
            const T* dy = self.grad.data() + row * hd;
            T* dgi_row = dgi.data() + row * 3 * hd;
            T* dgh_row = dgh.data() + bi * 3 * hd;
            for (std::size_t j = 0; j < hd; ++j) {
              const T r = gates[j], z = gates[hd + j], cand = gates[2 * hd + j];
              const T hp = hprev(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(j));
              const T dh = dy[j] + carry(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(j));
              const T dcand = dh * (T(1) - z) * (T(1) - cand * cand);
              const T dz = dh * (hp - cand) * z * (T(1) - z);
              const T dr = dcand * ghr[2 * hd + j] * r * (T(1) - r);
              dgi_row[j] = dr;
              dgi_row[hd + j] = dz;
              dgi_row[2 * hd + j] = dcand;
              dgh_row[j] = dr;
              dgh_row[hd + j] = dz;
              dgh_row[2 * hd + j] = dcand * r;
              carry(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(j)) = dh * z;
            }
          }
          carry.noalias() += dgh * as_matrix(whh).transpose();
          dwhh.noalias() += hprev.transpose() * dgh;
          dbhh += dgh.colwise().sum();
        }
        if (auto* g = grad_of(self, 0)) as_matrix(*g).noalias() += dgi * as_matrix(wih).transpose();
        if (auto* g = grad_of(self, 1)) as_matrix(*g).noalias() += as_matrix(xv).transpose() * dgi;
        if (auto* g = grad_of(self, 2)) as_matrix(*g) += dwhh;
        if (auto* g = grad_of(self, 3)) as_matrix(*g).row(0) += dgi.colwise().sum();
        if (auto* g = grad_of(self, 4)) as_matrix(*g).row(0) += dbhh;
        if (has_h0) {
          if (auto* g = grad_of(self, 5)) as_matrix(*g) += carry;
        }
        (void)din;
      });
}

template <typename T>
Var<T> conv_fuse(const Var<T>& top, const Var<T>& bottom, const std::vector<Var<T>>& kernels,
                 const std::vector<Var<T>>& biases) {
  require_rank3(top, "conv_fuse");
  require_same(top, bottom, "conv_fuse");
  if (kernels.empty() || kernels.size() != biases.size()) {
    throw Error(ErrorKind::ConfigError, "conv_fuse needs one bias per kernel and at least one kernel");
  }
  const std::size_t b = top.shape()[0], m = top.shape()[1], d = top.shape()[2];
  std::vector<std::size_t> widths;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const auto& ks = kernels[k].shape();
    if (ks.size() != 2 || ks[1] != d || ks[0] == 0 || ks[0] % 2 != 0) {
      shape_error("conv_fuse", "kernel must be [2w, D], got " + shape_string(ks));
    }
    if (biases[k].shape() != Shape{d}) shape_error("conv_fuse", "bias must be [D]");
    const std::size_t w = ks[0] / 2;
    if (w > m) {
      throw Error(ErrorKind::ConfigError, "kernel width " + std::to_string(w) + " exceeds " + std::to_string(m) +
                                              " characters");
    }
    widths.push_back(w);
  }
  const T inv_k = T(1) / static_cast<T>(kernels.size());
  Tensor<T> out({b, m, d});
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const std::size_t w = widths[k];
    const auto left = static_cast<std::ptrdiff_t>((w - 1) / 2);
    const auto& wt = kernels[k].value();
    const auto& bias = biases[k].value();
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t mi = 0; mi < m; ++mi) {
        T* dst = out.data() + (bi * m + mi) * d;
        for (std::size_t j = 0; j < d; ++j) dst[j] += inv_k * bias[j];
        for (std::size_t jj = 0; jj < w; ++jj) {
          const auto col = static_cast<std::ptrdiff_t>(mi) - left + static_cast<std::ptrdiff_t>(jj);
          if (col < 0 || col >= static_cast<std::ptrdiff_t>(m)) continue;
          const T* t = top.value().data() + (bi * m + static_cast<std::size_t>(col)) * d;
          const T* u = bottom.value().data() + (bi * m + static_cast<std::size_t>(col)) * d;
          const T* w0 = wt.data() + jj * d;
          const T* w1 = wt.data() + (w + jj) * d;
          for (std::size_t j = 0; j < d; ++j) dst[j] += inv_k * (t[j] * w0[j] + u[j] * w1[j]);
        }
      }
    }
  }
  std::vector<Var<T>> inputs{top, bottom};
  inputs.insert(inputs.end(), kernels.begin(), kernels.end());
  inputs.insert(inputs.end(), biases.begin(), biases.end());
  return make_result<T>(std::move(out), inputs, [widths, b, m, d, inv_k](Node<T>& self) {
    const std::size_t nk = widths.size();
    auto* gt = grad_of(self, 0);
    auto* gu = grad_of(self, 1);
    const auto& tv = value_of(self, 0);
    const auto& uv = value_of(self, 1);
    for (std::size_t k = 0; k < nk; ++k) {
      const std::size_t w = widths[k];
      const auto left = static_cast<std::ptrdiff_t>((w - 1) / 2);
      const auto& wt = value_of(self, 2 + k);
      auto* gw = grad_of(self, 2 + k);
      auto* gb = grad_of(self, 2 + nk + k);
      for (std::size_t bi = 0; bi < b; ++bi) {
        for (std::size_t mi = 0; mi < m; ++mi) {
          const T* dy = self.grad.data() + (bi * m + mi) * d;
          if (gb) {
            for (std::size_t j = 0; j < d; ++j) (*gb)[j] += inv_k * dy[j];
          }
          for (std::size_t jj = 0; jj < w; ++jj) {
            const auto col = static_cast<std::ptrdiff_t>(mi) - left + static_cast<std::ptrdiff_t>(jj);
            if (col < 0 || col >= static_cast<std::ptrdiff_t>(m)) continue;
            const std::size_t src = (bi * m + static_cast<std::size_t>(col)) * d;
            for (std::size_t j = 0; j < d; ++j) {
              const T g = inv_k * dy[j];
              if (gt) (*gt)[src + j] += g * wt[jj * d + j];
              if (gu) (*gu)[src + j] += g * wt[(w + jj) * d + j];
              if (gw) {
                (*gw)[jj * d + j] += g * tv[src + j];
                (*gw)[(w + jj) * d + j] += g * uv[src + j];
              }
            }
          }
        }
      }
    }
  });
}

template <typename T>
Var<T> group_attention_pool(const Var<T>& x, const Var<T>& query, std::size_t stride) {
  require_rank3(x, "group_attention_pool");
  const std::size_t b = x.shape()[0], n = x.shape()[1], d = x.shape()[2];
  if (query.shape() != Shape{d}) shape_error("group_attention_pool", "query must be [D]");
  if (stride == 0 || n % stride != 0) {
    throw Error(ErrorKind::AlignmentError, "length " + std::to_string(n) + " is not a multiple of " +
                                               std::to_string(stride));
  }
  const std::size_t m = n / stride;
  const T inv_sqrt_d = T(1) / std::sqrt(static_cast<T>(d));
  Tensor<T> out({b, m, d});
  std::vector<T> probs(b * n);
  const auto& xv = x.value();
  const auto& qv = query.value();
  for (std::size_t g = 0; g < b * m; ++g) {
    const T* rows = xv.data() + g * stride * d;
    T* p = probs.data() + g * stride;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t s = 0; s < stride; ++s) {
      T score = 0;
      for (std::size_t j = 0; j < d; ++j) score += qv[j] * rows[s * d + j];
      p[s] = score * inv_sqrt_d;
      mx = std::max(mx, p[s]);
    }
    T total = 0;
    for (std::size_t s = 0; s < stride; ++s) total += (p[s] = std::exp(p[s] - mx));
    T* dst = out.data() + g * d;
    for (std::size_t s = 0; s < stride; ++s) {
      p[s] /= total;
      for (std::size_t j = 0; j < d; ++j) dst[j] += p[s] * rows[s * d + j];
    }
  }
  return make_result<T>(std::move(out), {x, query}, [probs = std::move(probs), b, m, d, stride, inv_sqrt_d](Node<T>& self) {
    const auto& xv = value_of(self, 0);
    const auto& qv = value_of(self, 1);
    auto* gx = grad_of(self, 0);
    auto* gq = grad_of(self, 1);
    std::vector<T> dscore(stride);
    for (std::size_t g = 0; g < b * m; ++g) {
      const T* rows = xv.data() + g * stride * d;
      const T* p = probs.data() + g * stride;
      const T* dy = self.grad.data() + g * d;
      T expect = 0;
      for (std::size_t s = 0; s < stride; ++s) {
        T dot = 0;
        for (std::size_t j = 0; j < d; ++j) dot += dy[j] * rows[s * d + j];
        dscore[s] = dot;
        expect += p[s] * dot;
      }
      for (std::size_t s = 0; s < stride; ++s) {
        const T ds = p[s] * (dscore[s] - expect) * inv_sqrt_d;
        for (std::size_t j = 0; j < d; ++j) {
          if (gx) (*gx)[(g * stride + s) * d + j] += p[s] * dy[j] + ds * qv[j];
          if (gq) (*gq)[j] += ds * rows[s * d + j];
        }
      }
    }
  });
}

template <typename T>
CrossEntropy<T> cross_entropy(const Var<T>& logits, const std::vector<int>& targets, int ignore_id) {
  const std::size_t v = logits.shape().back();
  const std::size_t rows = logits.value().rows();
  if (targets.size() != rows) {
    shape_error("cross_entropy", std::to_string(targets.size()) + " targets for " + std::to_string(rows) + " rows");
  }
  CrossEntropy<T> result;
  std::vector<T> probs(rows * v, T(0));
  T total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const int t = targets[r];
    if (t == ignore_id) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= v) {
      throw Error(ErrorKind::VocabError, "target " + std::to_string(t) + " outside " + std::to_string(v) + " classes");
    }
    const T* z = logits.value().data() + r * v;
    const T mx = *std::max_element(z, z + v);
    T sum = 0;
    for (std::size_t j = 0; j < v; ++j) sum += std::exp(z[j] - mx);
    const T lse = mx + std::log(sum);
    total += lse - z[t];
    for (std::size_t j = 0; j < v; ++j) probs[r * v + j] = std::exp(z[j] - lse);
    ++result.counted;
  }
  result.all_ignored = result.counted == 0;
  const T count = result.counted == 0 ? T(1) : static_cast<T>(result.counted);
  Tensor<T> out({1}, result.all_ignored ? T(0) : total / count);
  result.loss = make_result<T>(std::move(out), {logits},
                               [probs = std::move(probs), targets, ignore_id, v, rows, count](Node<T>& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    const T scale = self.grad[0] / count;
    for (std::size_t r = 0; r < rows; ++r) {
      if (targets[r] == ignore_id) continue;
      for (std::size_t j = 0; j < v; ++j) (*g)[r * v + j] += scale * probs[r * v + j];
      (*g)[r * v + static_cast<std::size_t>(targets[r])] -= scale;
    }
  });
  return result;
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T total = 0;
  for (T v : x.value().values()) total += v;
  return make_result<T>(Tensor<T>({1}, total), {x}, [](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[0];
    }
  });
}

template <typename T>
Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& weights) {
  if (weights.shape() != x.shape()) shape_error("weighted_sum", "weights must match x");
  T total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) total += x.value()[i] * weights[i];
  return make_result<T>(Tensor<T>({1}, total), {x}, [weights](Node<T>& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[0] * weights[i];
    }
  });
}

#define KOMBO_INSTANTIATE_OPS(T)                                                                              \
  template Var<T> add(const Var<T>&, const Var<T>&);                                                          \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                                          \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                                          \
  template Var<T> scale(const Var<T>&, T);                                                                    \
  template Var<T> sigmoid(const Var<T>&);                                                                     \
  template Var<T> tanh(const Var<T>&);                                                                        \
  template Var<T> gelu(const Var<T>&);                                                                        \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                                       \
  template Var<T> add_bias(const Var<T>&, const Var<T>&);                                                     \
  template Var<T> affine(const Var<T>&, const Var<T>&, const Var<T>&);                                        \
  template Var<T> layer_norm(const Var<T>&, const Var<T>&, const Var<T>&, T);                                 \
  template Var<T> embedding(const std::vector<int>&, std::size_t, std::size_t, const Var<T>&);                \
  template Var<T> add_positional(const Var<T>&, const Var<T>&);                                               \
  template Var<T> group_sum(const Var<T>&, std::size_t, std::size_t, std::size_t);                            \
  template Var<T> interleave(const Var<T>&, const Var<T>&);                                                   \
  template Var<T> repeat_rows(const Var<T>&, const std::vector<std::size_t>&);                                \
  template Var<T> reshape(const Var<T>&, const Shape&);                                                       \
  template Var<T> select_position(const Var<T>&, std::size_t);                                                \
  template Var<T> reverse_positions(const Var<T>&);                                                           \
  template Var<T> multihead_attention(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t,               \
                                      const std::vector<std::uint8_t>&, std::vector<T>*);                     \
  template Var<T> gru(const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&,              \
                      const Var<T>&);                                                                         \
  template Var<T> conv_fuse(const Var<T>&, const Var<T>&, const std::vector<Var<T>>&,                         \
                            const std::vector<Var<T>>&);                                                      \
  template Var<T> group_attention_pool(const Var<T>&, const Var<T>&, std::size_t);                            \
  template CrossEntropy<T> cross_entropy(const Var<T>&, const std::vector<int>&, int);                        \
  template Var<T> sum(const Var<T>&);                                                                         \
  template Var<T> weighted_sum(const Var<T>&, const Tensor<T>&);

KOMBO_INSTANTIATE_OPS(float)
KOMBO_INSTANTIATE_OPS(double)

}  // namespace kombo::nn
