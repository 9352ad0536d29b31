/*
 * Copyright 2026 The nli-heads Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nli/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>

#include "nli/error.hpp"

namespace nli::testing {
namespace {
thread_local bool g_matmul_fault = false;
}
ScopedBackwardFault::ScopedBackwardFault() : previous_(g_matmul_fault) { g_matmul_fault = true; }
ScopedBackwardFault::~ScopedBackwardFault() { g_matmul_fault = previous_; }
}  // namespace nli::testing

namespace nli::ops {
namespace {

Var emit(const char* op, Tensor value, std::initializer_list<Var> inputs, Tape::Backward backward) {
  value.require_finite(op);
  Tape& tape = *inputs.begin()->tape;
  return tape.record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var emit(const char* op, Tensor value, std::span<const Var> inputs, Tape::Backward backward) {
  value.require_finite(op);
  return inputs.front().tape->record(std::move(value), inputs, std::move(backward));
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

void require_matrix(const Tensor& t, const char* op) { require_rank(t, 2, op); }

// c[m x n] += a[m x k] . b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// c[m x k] += a[m x n] . b[k x n]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ai[j] * bp[j];
      c[i * k + p] += s;
    }
  }
}

// c[k x n] += a[m x k]^T . b[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_matrix(A, "matmul");
  require_matrix(B, "matmul");
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k) mismatch("matmul", A.shape(), B.shape());
  Tensor C({m, n});
  gemm_nn(A.data().data(), B.data().data(), C.data().data(), m, k, n);
  return emit("matmul", std::move(C), {a, b}, [a, b, m, k, n](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.sink(a)) {
      Tensor da({m, k});
      gemm_nt(g.data().data(), b.value().data().data(), da.data().data(), m, n, k);
      if (testing::g_matmul_fault)
        for (double& x : da.data()) x = -x;
      *ga += da;
    }
    if (Tensor* gb = t.sink(b)) gemm_tn(a.value().data().data(), g.data().data(), gb->data().data(), m, k, n);
  });
}

Var add_bias(Var x, Var bias) {
  const Tensor& X = x.value();
  const Tensor& B = bias.value();
  require_matrix(X, "add_bias");
  require_rank(B, 1, "add_bias");
  const std::size_t m = X.rows(), n = X.cols();
  if (B.size() != n) mismatch("add_bias", X.shape(), B.shape());
  Tensor Y = X;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) Y.at(i, j) += B[j];
  return emit("add_bias", std::move(Y), {x, bias}, [x, bias, m, n](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) *gx += g;
    if (Tensor* gb = t.sink(bias))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*gb)[j] += g.at(i, j);
  });
}

Var linear(Var x, Var w, Var b) { return add_bias(matmul(x, w), b); }

Var add(Var a, Var b) {
  if (a.shape() != b.shape()) mismatch("add", a.shape(), b.shape());
  Tensor Y = a.value();
  Y += b.value();
  return emit("add", std::move(Y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.sink(a)) *ga += g;
    if (Tensor* gb = t.sink(b)) *gb += g;
  });
}

Var mul(Var a, Var b) {
  if (a.shape() != b.shape()) mismatch("mul", a.shape(), b.shape());
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  Tensor Y(A.shape());
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] = A[i] * B[i];
  return emit("mul", std::move(Y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.sink(a)) {
      const Tensor& B = b.value();
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * B[i];
    }
    if (Tensor* gb = t.sink(b)) {
      const Tensor& A = a.value();
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * A[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor Y = a.value();
  for (double& v : Y.data()) v *= factor;
  return emit("scale", std::move(Y), {a}, [a, factor](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.sink(a))
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * factor;
  });
}

Var activation(Activation kind, Var x) {
  Tensor Y = x.value();
  switch (kind) {
    case Activation::relu:
      for (double& v : Y.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::tanh:
      for (double& v : Y.data()) v = std::tanh(v);
      break;
    case Activation::sigmoid:
      for (double& v : Y.data()) v = 1.0 / (1.0 + std::exp(-v));
      break;
  }
  // The derivative is expressed through the output, so keep a copy.
  Tensor out = Y;
  return emit("activation", std::move(Y), {x}, [x, kind, out = std::move(out)](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = out[i];
      double d = 0.0;
      switch (kind) {
        case Activation::relu: d = y > 0.0 ? 1.0 : 0.0; break;
        case Activation::tanh: d = 1.0 - y * y; break;
        case Activation::sigmoid: d = y * (1.0 - y); break;
      }
      (*gx)[i] += g[i] * d;
    }
  });
}

Var gather_rows(Var table, std::span<const std::size_t> rows) {
  const Tensor& T = table.value();
  require_matrix(T, "gather_rows");
  const std::size_t V = T.rows(), d = T.cols();
  Tensor Y({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= V)
      throw DimensionError("gather_rows: row " + std::to_string(rows[i]) + " outside table " + to_string(T.shape()));
    std::copy_n(T.data().begin() + rows[i] * d, d, Y.data().begin() + i * d);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return emit("gather_rows", std::move(Y), {table}, [table, idx = std::move(idx), d](Tape& t, const Tensor& g) {
    Tensor* gt = t.sink(table);
    if (!gt) return;
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) (*gt)[idx[i] * d + j] += g[i * d + j];
  });
}

Var mean_rows(Var x) {
  const Tensor& X = x.value();
  require_matrix(X, "mean_rows");
  const std::size_t n = X.rows(), d = X.cols();
  if (n == 0) throw DimensionError("mean_rows: no rows");
  Tensor Y({1, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) Y[j] += X.at(i, j);
  for (double& v : Y.data()) v /= static_cast<double>(n);
  return emit("mean_rows", std::move(Y), {x}, [x, n, d](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) gx->at(i, j) += g[j] * inv;
  });
}

Var repeat_rows(Var x, std::size_t n) {
  const Tensor& X = x.value();
  require_matrix(X, "repeat_rows");
  if (X.rows() != 1) throw DimensionError("repeat_rows expects one row, got " + to_string(X.shape()));
  const std::size_t d = X.cols();
  Tensor Y({n, d});
  for (std::size_t i = 0; i < n; ++i) std::copy_n(X.data().begin(), d, Y.data().begin() + i * d);
  return emit("repeat_rows", std::move(Y), {x}, [x, n, d](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) (*gx)[j] += g.at(i, j);
  });
}

Var pad_rows(Var x, std::size_t total_rows) {
  const Tensor& X = x.value();
  require_matrix(X, "pad_rows");
  const std::size_t n = X.rows(), d = X.cols();
  if (total_rows < n) throw DimensionError("pad_rows: cannot shrink " + to_string(X.shape()));
  if (total_rows == n) return x;
  Tensor Y({total_rows, d});
  std::copy(X.data().begin(), X.data().end(), Y.data().begin());
  return emit("pad_rows", std::move(Y), {x}, [x, n, d](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    for (std::size_t i = 0; i < n * d; ++i) (*gx)[i] += g[i];
  });
}

Var row(Var x, std::size_t r) {
  const Tensor& X = x.value();
  require_matrix(X, "row");
  if (r >= X.rows()) throw DimensionError("row " + std::to_string(r) + " outside " + to_string(X.shape()));
  const std::size_t d = X.cols();
  Tensor Y({1, d});
  std::copy_n(X.data().begin() + r * d, d, Y.data().begin());
  return emit("row", std::move(Y), {x}, [x, r, d](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    for (std::size_t j = 0; j < d; ++j) (*gx)[r * d + j] += g[j];
  });
}

Var slice_cols(Var x, std::size_t start, std::size_t count) {
  const Tensor& X = x.value();
  require_matrix(X, "slice_cols");
  const std::size_t m = X.rows(), n = X.cols();
  if (start + count > n)
    throw DimensionError("slice_cols [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") outside " + to_string(X.shape()));
  Tensor Y({m, count});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < count; ++j) Y.at(i, j) = X.at(i, start + j);
  return emit("slice_cols", std::move(Y), {x}, [x, start, count, m](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < count; ++j) gx->at(i, start + j) += g.at(i, j);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: nothing to concatenate");
  const std::size_t m = parts.front().value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_matrix(p.value(), "concat_cols");
    if (p.value().rows() != m) mismatch("concat_cols", parts.front().shape(), p.shape());
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor Y({m, total});
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& P = parts[k].value();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j) Y.at(i, off + j) = P.at(i, j);
    off += widths[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return emit("concat_cols", std::move(Y), parts,
              [inputs, widths = std::move(widths), m, total](Tape& t, const Tensor& g) {
                std::size_t off = 0;
                for (std::size_t k = 0; k < inputs.size(); ++k) {
                  if (Tensor* gp = t.sink(inputs[k]))
                    for (std::size_t i = 0; i < m; ++i)
                      for (std::size_t j = 0; j < widths[k]; ++j) gp->at(i, j) += g[i * total + off + j];
                  off += widths[k];
                }
              });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: nothing to concatenate");
  const std::size_t d = parts.front().value().cols();
  std::vector<std::size_t> heights;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_matrix(p.value(), "concat_rows");
    if (p.value().cols() != d) mismatch("concat_rows", parts.front().shape(), p.shape());
    heights.push_back(p.value().rows());
    total += heights.back();
  }
  Tensor Y({total, d});
  auto out = Y.data().begin();
  for (const Var& p : parts) out = std::copy(p.value().data().begin(), p.value().data().end(), out);
  std::vector<Var> inputs(parts.begin(), parts.end());
  return emit("concat_rows", std::move(Y), parts,
              [inputs, heights = std::move(heights), d](Tape& t, const Tensor& g) {
                std::size_t off = 0;
                for (std::size_t k = 0; k < inputs.size(); ++k) {
                  const std::size_t n = heights[k] * d;
                  if (Tensor* gp = t.sink(inputs[k]))
                    for (std::size_t i = 0; i < n; ++i) (*gp)[i] += g[off + i];
                  off += n;
                }
              });
}

Var conv1d(Var input, Var kernels, Var bias) {
  const Tensor& X = input.value();
  const Tensor& K = kernels.value();
  const Tensor& B = bias.value();
  require_matrix(X, "conv1d");
  require_rank(K, 3, "conv1d");
  require_rank(B, 1, "conv1d");
  const std::size_t L = X.rows(), d = X.cols();
  const std::size_t w = K.dim(0), f = K.dim(2);
  if (K.dim(1) != d) mismatch("conv1d", X.shape(), K.shape());
  if (B.size() != f) mismatch("conv1d", K.shape(), B.shape());
  if (w == 0) throw DimensionError("conv1d: zero-width kernel");
  if (L < w)
    throw DimensionError("conv1d: sequence too short (length " + std::to_string(L) + " < window " +
                         std::to_string(w) + ")");
  const std::size_t T = L - w + 1;
  Tensor Y({T, f});
  for (std::size_t t = 0; t < T; ++t) std::copy(B.data().begin(), B.data().end(), Y.data().begin() + t * f);
  // Row t of the output accumulates rows t..t+w-1 of the input times the
  // matching kernel slice; do it as w shifted matrix products.
  for (std::size_t u = 0; u < w; ++u)
    gemm_nn(X.data().data() + u * d, K.data().data() + u * d * f, Y.data().data(), T, d, f);
  return emit("conv1d", std::move(Y), {input, kernels, bias},
              [input, kernels, bias, T, d, w, f](Tape& t, const Tensor& g) {
                if (Tensor* gx = t.sink(input)) {
                  const Tensor& K = kernels.value();
                  for (std::size_t u = 0; u < w; ++u)
                    gemm_nt(g.data().data(), K.data().data() + u * d * f, gx->data().data() + u * d, T, f, d);
                }
                if (Tensor* gk = t.sink(kernels)) {
                  const Tensor& X = input.value();
                  for (std::size_t u = 0; u < w; ++u)
                    gemm_tn(X.data().data() + u * d, g.data().data(), gk->data().data() + u * d * f, T, d, f);
                }
                if (Tensor* gb = t.sink(bias))
                  for (std::size_t r = 0; r < T; ++r)
                    for (std::size_t j = 0; j < f; ++j) (*gb)[j] += g[r * f + j];
              });
}

Var maxpool_time(Var x, std::size_t valid_rows) {
  const Tensor& X = x.value();
  require_matrix(X, "maxpool_time");
  const std::size_t L = X.rows(), f = X.cols();
  if (valid_rows == 0 || L == 0) throw DimensionError("maxpool_time: empty sequence");
  if (valid_rows > L) throw DimensionError("maxpool_time: valid rows exceed " + to_string(X.shape()));
  Tensor Y({1, f});
  std::vector<std::size_t> argmax(f, 0);
  for (std::size_t j = 0; j < f; ++j) {
    double best = X.at(0, j);
    for (std::size_t r = 1; r < valid_rows; ++r)
      if (X.at(r, j) > best) {
        best = X.at(r, j);
        argmax[j] = r;
      }
    Y[j] = best;
  }
  return emit("maxpool_time", std::move(Y), {x}, [x, argmax = std::move(argmax), f](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    for (std::size_t j = 0; j < f; ++j) (*gx)[argmax[j] * f + j] += g[j];
  });
}

Var layer_norm(Var x, Var gain, Var shift, double eps) {
  const Tensor& X = x.value();
  require_matrix(X, "layer_norm");
  const std::size_t m = X.rows(), d = X.cols();
  if (gain.value().shape() != Shape{d}) mismatch("layer_norm", X.shape(), gain.shape());
  if (shift.value().shape() != Shape{d}) mismatch("layer_norm", X.shape(), shift.shape());
  const Tensor& G = gain.value();
  const Tensor& S = shift.value();
  Tensor normed({m, d});
  std::vector<double> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += X.at(i, j);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (X.at(i, j) - mean) * (X.at(i, j) - mean);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) normed.at(i, j) = (X.at(i, j) - mean) * inv_std[i];
  }
  Tensor Y({m, d});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) Y.at(i, j) = G[j] * normed.at(i, j) + S[j];
  return emit("layer_norm", std::move(Y), {x, gain, shift},
              [x, gain, shift, normed = std::move(normed), inv_std = std::move(inv_std), m, d](Tape& t,
                                                                                             const Tensor& g) {
                if (Tensor* gx = t.sink(x)) {
                  const Tensor& G = gain.value();
                  std::vector<double> dn(d);
                  for (std::size_t i = 0; i < m; ++i) {
                    double sum = 0.0, dot = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                      dn[j] = g.at(i, j) * G[j];
                      sum += dn[j];
                      dot += dn[j] * normed.at(i, j);
                    }
                    const double nd = static_cast<double>(d);
                    for (std::size_t j = 0; j < d; ++j)
                      gx->at(i, j) += inv_std[i] / nd * (nd * dn[j] - sum - normed.at(i, j) * dot);
                  }
                }
                if (Tensor* gg = t.sink(gain))
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < d; ++j) (*gg)[j] += g.at(i, j) * normed.at(i, j);
                if (Tensor* gs = t.sink(shift))
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < d; ++j) (*gs)[j] += g.at(i, j);
              });
}

Tensor attention_weights(const Tensor& q, const Tensor& k, std::span<const std::uint8_t> key_mask) {
  require_matrix(q, "attention");
  require_matrix(k, "attention");
  if (q.cols() != k.cols()) mismatch("attention", q.shape(), k.shape());
  const std::size_t lq = q.rows(), lk = k.rows(), dh = q.cols();
  if (!key_mask.empty() && key_mask.size() != lk)
    throw DimensionError("attention: mask length " + std::to_string(key_mask.size()) + " != keys " +
                         std::to_string(lk));
  const bool any_real = key_mask.empty() || std::any_of(key_mask.begin(), key_mask.end(), [](auto m) { return m; });
  if (!any_real) throw DimensionError("attention: every key position is masked");
  Tensor P({lq, lk});
  gemm_nt(q.data().data(), k.data().data(), P.data().data(), lq, dh, lk);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  for (std::size_t i = 0; i < lq; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lk; ++j) {
      double& s = P.at(i, j);
      s = (key_mask.empty() || key_mask[j]) ? s * inv_sqrt : -std::numeric_limits<double>::infinity();
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < lk; ++j) {
      double& s = P.at(i, j);
      s = std::isinf(s) ? 0.0 : std::exp(s - mx);
      z += s;
    }
    for (std::size_t j = 0; j < lk; ++j) P.at(i, j) /= z;
  }
  return P;
}

Var attention(Var q, Var k, Var v, std::span<const std::uint8_t> key_mask) {
  const Tensor& V = v.value();
  require_matrix(V, "attention");
  if (V.rows() != k.value().rows()) mismatch("attention", k.shape(), V.shape());
  Tensor P = attention_weights(q.value(), k.value(), key_mask);
  const std::size_t lq = P.rows(), lk = P.cols(), dh = q.value().cols(), dv = V.cols();
  Tensor O({lq, dv});
  gemm_nn(P.data().data(), V.data().data(), O.data().data(), lq, lk, dv);
  return emit("attention", std::move(O), {q, k, v}, [q, k, v, P = std::move(P), lq, lk, dh, dv](Tape& t, const Tensor& g) {
    if (Tensor* gv = t.sink(v)) gemm_tn(P.data().data(), g.data().data(), gv->data().data(), lq, lk, dv);
    Tensor* gq = t.sink(q);
    Tensor* gk = t.sink(k);
    if (!gq && !gk) return;
    // dS = P * (dP - rowsum(P * dP)), with dP = g . v^T; masked entries have P = 0.
    Tensor dS({lq, lk});
    gemm_nt(g.data().data(), v.value().data().data(), dS.data().data(), lq, dv, lk);
    for (std::size_t i = 0; i < lq; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < lk; ++j) dot += P.at(i, j) * dS.at(i, j);
      for (std::size_t j = 0; j < lk; ++j) dS.at(i, j) = P.at(i, j) * (dS.at(i, j) - dot);
    }
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    for (double& s : dS.data()) s *= inv_sqrt;
    if (gq) gemm_nn(dS.data().data(), k.value().data().data(), gq->data().data(), lq, lk, dh);
    if (gk) gemm_tn(dS.data().data(), q.value().data().data(), gk->data().data(), lq, lk, dh);
  });
}

Var dropout(Var x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  if (mode == Mode::eval || rate == 0.0) return x;
  const double keep = 1.0 / (1.0 - rate);
  Tensor mask(x.shape());
  for (double& m : mask.data()) m = rng.uniform() >= rate ? keep : 0.0;
  Tensor Y = x.value();
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] *= mask[i];
  return emit("dropout", std::move(Y), {x}, [x, mask = std::move(mask)](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * mask[i];
  });
}

SoftmaxXent softmax_xent(Var logits, std::span<const std::size_t> gold) {
  const Tensor& Z = logits.value();
  require_matrix(Z, "softmax_xent");
  const std::size_t n = Z.rows(), K = Z.cols();
  if (K < 2) throw DimensionError("softmax_xent needs at least 2 classes, got " + to_string(Z.shape()));
  if (gold.size() != n)
    throw DimensionError("softmax_xent: " + std::to_string(gold.size()) + " labels for " + std::to_string(n) + " rows");
  if (n == 0) throw DimensionError("softmax_xent: empty batch");
  Tensor probs({n, K});
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (gold[i] >= K)
      throw LabelError("gold label " + std::to_string(gold[i]) + " out of range for " + std::to_string(K) + " classes");
    double mx = Z.at(i, 0);
    for (std::size_t j = 1; j < K; ++j) mx = std::max(mx, Z.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < K; ++j) z += std::exp(Z.at(i, j) - mx);
    for (std::size_t j = 0; j < K; ++j) probs.at(i, j) = std::exp(Z.at(i, j) - mx) / z;
    loss -= (Z.at(i, gold[i]) - mx) - std::log(z);
  }
  loss /= static_cast<double>(n);
  std::vector<std::size_t> labels(gold.begin(), gold.end());
  Var out = emit("softmax_xent", Tensor({1, 1}, {loss}), {logits},
                 [logits, probs, labels = std::move(labels), n, K](Tape& t, const Tensor& g) {
                   Tensor* gz = t.sink(logits);
                   if (!gz) return;
                   const double s = g[0] / static_cast<double>(n);
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t j = 0; j < K; ++j)
                       gz->at(i, j) += s * (probs.at(i, j) - (j == labels[i] ? 1.0 : 0.0));
                 });
  return {out, std::move(probs)};
}

Var weighted_sum(Var x, const Tensor& weights) {
  if (weights.shape() != x.shape()) mismatch("weighted_sum", x.shape(), weights.shape());
  const Tensor& X = x.value();
  double s = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) s += X[i] * weights[i];
  return emit("weighted_sum", Tensor({1, 1}, {s}), {x}, [x, weights](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    for (std::size_t i = 0; i < weights.size(); ++i) (*gx)[i] += g[0] * weights[i];
  });
}

}  // namespace nli::ops
