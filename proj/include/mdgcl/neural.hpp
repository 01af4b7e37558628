// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense numeric engine: two-layer GCN forward/backward, multi-head
// domain-level attention, linear projection heads, softmax cross-entropy,
// Adam, and a central-finite-difference gradient checker. Everything is
// 64-bit and deterministic; backward passes are hand-derived for the two
// fixed loss compositions.

#ifndef MDGCL_NEURAL_HPP
#define MDGCL_NEURAL_HPP

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mdgcl/contrastive.hpp"
#include "mdgcl/errors.hpp"
#include "mdgcl/graph.hpp"
#include "mdgcl/rng.hpp"

namespace mdgcl {

// Uniform in +-sqrt(6/(fan_in+fan_out)).
inline Matrix xavier_uniform(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

// ---------------------------------------------------------------------------
// GCN: H = A^ * ReLU(A^ * X * W1) * W2, no biases.

struct GcnParams {
  Matrix w1;  // d~ x h
  Matrix w2;  // h x h

  static GcnParams init(int in_dim, int hidden, Rng& rng) {
    GcnParams p;
    p.w1 = xavier_uniform(in_dim, hidden, rng);
    p.w2 = xavier_uniform(hidden, hidden, rng);
    return p;
  }
};

struct GcnCache {
  Matrix x;         // input features
  Matrix pre_relu;  // A^ X W1
  Matrix hidden;    // ReLU(pre_relu)
};

inline Matrix gcn_forward(const NormalizedAdjacency& adj, const Matrix& x, const GcnParams& p,
                          GcnCache* cache = nullptr) {
  if (x.rows() != adj.num_nodes) throw ValidationError("gcn_forward: feature rows != num_nodes");
  if (x.cols() != p.w1.rows()) throw ValidationError("gcn_forward: feature width != W1 rows");
  Matrix pre_relu = adj.mat * (x * p.w1);
  Matrix hidden = pre_relu.cwiseMax(0.0);
  Matrix h = adj.mat * (hidden * p.w2);
  if (cache) {
    cache->x = x;
    cache->pre_relu = std::move(pre_relu);
    cache->hidden = std::move(hidden);
  }
  return h;
}

struct GcnGrads {
  Matrix dw1;
  Matrix dw2;
  Matrix dx;
};

// ReLU subgradient at exactly 0 is 0.
inline GcnGrads gcn_backward(const NormalizedAdjacency& adj, const GcnParams& p,
                             const GcnCache& cache, const Matrix& dh, bool want_dx = false) {
  if (cache.x.size() == 0) throw ValidationError("gcn_backward: missing forward cache");
  // A^ is symmetric, so A^^T v = A^ v.
  Matrix t = adj.mat * dh;  // gradient at hidden*W2
  GcnGrads g;
  g.dw2 = cache.hidden.transpose() * t;
  Matrix dhidden = t * p.w2.transpose();
  Matrix dpre = (cache.pre_relu.array() > 0.0).select(dhidden, 0.0);
  Matrix s = adj.mat * dpre;  // gradient at x*W1
  g.dw1 = cache.x.transpose() * s;
  if (want_dx) g.dx = s * p.w1.transpose();
  return g;
}

// Sum-pooled readout of the GCN, specialized: with r = H^T 1 the hidden
// blocks never need materializing, since r = W2^T ReLU(A^ X W1)^T A^ 1 and
// the upstream gradient dH = 1 dr^T is rank one. Numerically this follows
// a different (cheaper) operation order than gcn_forward + readout, but
// computes the same quantities.
struct SumGcnCache {
  Matrix pre_relu;  // A^ X W1
  Vector asum;      // A^ 1
  Vector z;         // ReLU(A^ X W1)^T A^ 1
};

inline Vector gcn_sum_readout(const NormalizedAdjacency& adj, const Matrix& x, const GcnParams& p,
                              SumGcnCache* cache = nullptr) {
  if (x.rows() != adj.num_nodes) throw ValidationError("gcn_sum_readout: feature rows mismatch");
  if (x.cols() != p.w1.rows()) throw ValidationError("gcn_sum_readout: feature width mismatch");
  Matrix pre_relu = adj.mat * (x * p.w1);
  Vector asum = adj.mat * Vector::Ones(adj.num_nodes);
  Vector z = pre_relu.cwiseMax(0.0).transpose() * asum;
  Vector r = p.w2.transpose() * z;
  if (cache) {
    cache->pre_relu = std::move(pre_relu);
    cache->asum = std::move(asum);
    cache->z = std::move(z);
  }
  return r;
}

// Accumulates dW1/dW2 into the given matrices (scaled by `weight`).
inline void gcn_sum_backward(const NormalizedAdjacency& adj, const Matrix& x, const GcnParams& p,
                             const SumGcnCache& cache, const Vector& dreadout, double weight,
                             Matrix& dw1_acc, Matrix& dw2_acc) {
  if (cache.pre_relu.size() == 0) throw ValidationError("gcn_sum_backward: missing cache");
  dw2_acc.noalias() += weight * cache.z * dreadout.transpose();
  const Vector dz = p.w2 * dreadout;
  const Matrix dpre =
      (cache.pre_relu.array() > 0.0)
          .select(Matrix(cache.asum * dz.transpose()), 0.0);
  const Matrix s = adj.mat * dpre;
  dw1_acc.noalias() += weight * x.transpose() * s;
}

// ---------------------------------------------------------------------------
// Domain-level attention: per head, scores are unscaled dot products
// between projected tokens and projected node features; head outputs are
// concatenated and added to the input features.

struct AttentionHead {
  Matrix wq;  // d~ x d_h
  Matrix wk;  // d~ x d_h
  Matrix wv;  // d~ x d_h
};

struct AttentionParams {
  std::vector<AttentionHead> heads;

  static AttentionParams init(int dim, int num_heads, Rng& rng) {
    if (num_heads < 1) throw ValidationError("num_heads must be positive");
    if (dim % num_heads != 0)
      throw ValidationError("num_heads " + std::to_string(num_heads) +
                            " does not divide feature dimension " + std::to_string(dim));
    AttentionParams p;
    const int head_dim = dim / num_heads;
    for (int k = 0; k < num_heads; ++k)
      p.heads.push_back({xavier_uniform(dim, head_dim, rng), xavier_uniform(dim, head_dim, rng),
                         xavier_uniform(dim, head_dim, rng)});
    return p;
  }

  int dim() const { return heads.empty() ? 0 : static_cast<int>(heads[0].wq.rows()); }
  int head_dim() const { return heads.empty() ? 0 : static_cast<int>(heads[0].wq.cols()); }
};

struct AttentionHeadCache {
  Matrix q;      // n x d_h     (W_q^T x_i per row)
  Matrix k;      // M x d_h     (W_k^T t_m per row)
  Matrix v;      // M x d_h
  Matrix alpha;  // n x M softmax rows
};

struct AttentionCache {
  std::vector<AttentionHeadCache> heads;
};

inline Matrix token_matrix(const std::vector<DomainToken>& tokens, int dim) {
  if (tokens.empty()) throw ValidationError("attention requires at least one domain token");
  Matrix t(static_cast<int>(tokens.size()), dim);
  for (std::size_t m = 0; m < tokens.size(); ++m) {
    if (tokens[m].vector.size() != dim) throw ValidationError("token width mismatch");
    t.row(static_cast<int>(m)) = tokens[m].vector.transpose();
  }
  return t;
}

// Returns X* = X + P where row i of P concatenates, per head,
// sum_m alpha_im * W_v^T t_m with alpha = softmax over unscaled scores.
inline Matrix attention_enhance(const Matrix& x, const std::vector<DomainToken>& tokens,
                                const AttentionParams& theta, AttentionCache* cache = nullptr) {
  const int dim = static_cast<int>(x.cols());
  if (theta.dim() != dim) throw ValidationError("attention_enhance: parameter width mismatch");
  const Matrix t = token_matrix(tokens, dim);
  const int n = static_cast<int>(x.rows());
  const int num_tokens = static_cast<int>(tokens.size());
  const int head_dim = theta.head_dim();

  Matrix out = x;
  if (cache) cache->heads.assign(theta.heads.size(), {});
  for (std::size_t h = 0; h < theta.heads.size(); ++h) {
    const auto& head = theta.heads[h];
    Matrix q = x * head.wq;  // n x d_h
    Matrix k = t * head.wk;  // M x d_h
    Matrix v = t * head.wv;  // M x d_h
    Matrix scores = q * k.transpose();  // n x M
    Matrix alpha(n, num_tokens);
    for (int i = 0; i < n; ++i) {
      const double mx = scores.row(i).maxCoeff();
      Eigen::RowVectorXd e = (scores.row(i).array() - mx).exp();
      alpha.row(i) = e / e.sum();
    }
    out.middleCols(static_cast<int>(h) * head_dim, head_dim) += alpha * v;
    if (cache) {
      auto& hc = cache->heads[h];
      hc.q = std::move(q);
      hc.k = std::move(k);
      hc.v = std::move(v);
      hc.alpha = std::move(alpha);
    }
  }
  return out;
}

struct AttentionGrads {
  std::vector<AttentionHead> heads;  // gradients, same shapes as params
};

// dxstar is the gradient at X* = X + P; token and feature inputs are
// treated as constants (they are fixed data in both loss paths).
inline AttentionGrads attention_backward(const Matrix& x, const std::vector<DomainToken>& tokens,
                                         const AttentionParams& theta, const AttentionCache& cache,
                                         const Matrix& dxstar) {
  if (cache.heads.size() != theta.heads.size())
    throw ValidationError("attention_backward: missing forward cache");
  const int dim = static_cast<int>(x.cols());
  const Matrix t = token_matrix(tokens, dim);
  const int head_dim = theta.head_dim();

  AttentionGrads grads;
  grads.heads.resize(theta.heads.size());
  for (std::size_t h = 0; h < theta.heads.size(); ++h) {
    const auto& hc = cache.heads[h];
    const Matrix dp = dxstar.middleCols(static_cast<int>(h) * head_dim, head_dim);  // n x d_h
    // P_head = alpha * V.
    Matrix dv = hc.alpha.transpose() * dp;        // M x d_h
    Matrix dalpha = dp * hc.v.transpose();        // n x M
    // Softmax backward per row.
    Matrix dscores(dalpha.rows(), dalpha.cols());
    for (int i = 0; i < dalpha.rows(); ++i) {
      const double dot = hc.alpha.row(i).dot(dalpha.row(i));
      dscores.row(i) =
          (hc.alpha.row(i).array() * (dalpha.row(i).array() - dot)).matrix();
    }
    // scores = Q K^T.
    Matrix dq = dscores * hc.k;              // n x d_h
    Matrix dk = dscores.transpose() * hc.q;  // M x d_h
    auto& hg = grads.heads[h];
    hg.wq = x.transpose() * dq;
    hg.wk = t.transpose() * dk;
    hg.wv = t.transpose() * dv;
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Projection heads and losses.

struct ProjHead {
  Matrix w;  // h x c

  static ProjHead init(int in_dim, int classes, Rng& rng) {
    return {xavier_uniform(in_dim, classes, rng)};
  }

  Vector logits(const Vector& h) const { return w.transpose() * h; }
};

struct CrossEntropyResult {
  double loss = 0.0;
  Vector dlogits;
};

inline CrossEntropyResult cross_entropy(const Vector& logits, int label) {
  const int classes = static_cast<int>(logits.size());
  if (label < 0 || label >= classes) throw ValidationError("cross_entropy: label out of range");
  const double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp();
  const double z = e.sum();
  CrossEntropyResult r;
  r.loss = -(logits[label] - mx - std::log(z));
  r.dlogits = e / z;
  r.dlogits[label] -= 1.0;
  return r;
}

inline int argmax(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// ---------------------------------------------------------------------------
// Adam with bias correction over a flat list of tensors.

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

inline void adam_step(AdamState& state, const std::vector<Matrix*>& params,
                      const std::vector<const Matrix*>& grads) {
  if (params.size() != grads.size()) throw ValidationError("adam_step: size mismatch");
  if (state.m.empty()) {
    for (const Matrix* p : params) {
      state.m.emplace_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.emplace_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) throw ValidationError("adam_step: state size mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *grads[i];
    if (!g.allFinite()) throw NumericError("non-finite gradient in adam_step");
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = state.m[i] / bc1;
    const Matrix v_hat = state.v[i] / bc2;
    *params[i] -= state.lr * (m_hat.array() / (v_hat.array().sqrt() + state.eps)).matrix();
  }
}

// ---------------------------------------------------------------------------
// Gradient checking.

struct ParamRef {
  std::string name;
  Matrix* value = nullptr;
  const Matrix* analytic_grad = nullptr;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  int coords_checked = 0;
};

// Central differences against the provided analytic gradients. Tensors
// larger than max_coords_per_tensor are spot-checked on a deterministic
// random sample of coordinates (at least 200 when available).
inline GradCheckReport grad_check(const std::function<double()>& loss,
                                  const std::vector<ParamRef>& params, double step,
                                  int max_coords_per_tensor = 200,
                                  std::uint64_t sample_seed = 0x9e3779b97f4a7c15ull) {
  GradCheckReport report;
  Rng rng(sample_seed);
  for (const auto& param : params) {
    Matrix& w = *param.value;
    const Matrix& g = *param.analytic_grad;
    if (g.rows() != w.rows() || g.cols() != w.cols())
      throw ValidationError("grad_check: gradient shape mismatch for " + param.name);
    const long total = static_cast<long>(w.size());
    std::vector<long> coords;
    if (total <= max_coords_per_tensor) {
      coords.resize(total);
      for (long i = 0; i < total; ++i) coords[i] = i;
    } else {
      for (auto idx : rng.sample_without_replacement(static_cast<std::uint64_t>(total),
                                                     static_cast<std::uint64_t>(max_coords_per_tensor)))
        coords.push_back(static_cast<long>(idx));
    }
    for (long c : coords) {
      double& entry = w.data()[c];
      const double saved = entry;
      entry = saved + step;
      const double up = loss();
      entry = saved - step;
      const double down = loss();
      entry = saved;
      const double fd = (up - down) / (2.0 * step);
      const double an = g.data()[c];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
      const double rel = std::abs(fd - an) / denom;
      ++report.coords_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = param.name;
      }
    }
  }
  return report;
}

}  // namespace mdgcl

#endif  // MDGCL_NEURAL_HPP
