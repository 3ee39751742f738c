#ifndef HXDIAG_NN_HPP
#define HXDIAG_NN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hxdiag/rng.hpp"

namespace hxdiag::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Fully connected stack with ReLU hidden activations and a linear head.
// Rows of the input matrix are samples.  Gradients are accumulated into a
// second Mlp of identical shape, which keeps the Adam update and the
// finite-difference audits trivial.
struct Mlp {
  std::vector<Matrix> w;  // w[l]: in x out
  std::vector<Vector> b;

  static Mlp make(const std::vector<int>& dims, Rng& rng, bool zero_init_last = false) {
    if (dims.size() < 2) throw std::invalid_argument("mlp needs at least one layer");
    Mlp m;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Matrix wl(dims[l], dims[l + 1]);
      const bool last = (l + 2 == dims.size());
      const double sd = (last && zero_init_last) ? 0.0 : std::sqrt(2.0 / dims[l]);
      for (int i = 0; i < wl.rows(); ++i)
        for (int j = 0; j < wl.cols(); ++j) wl(i, j) = sd * rng.normal();
      m.w.push_back(std::move(wl));
      m.b.push_back(Vector::Zero(dims[l + 1]));
    }
    return m;
  }

  static Mlp zeros_like(const Mlp& other) {
    Mlp m;
    for (std::size_t l = 0; l < other.w.size(); ++l) {
      m.w.push_back(Matrix::Zero(other.w[l].rows(), other.w[l].cols()));
      m.b.push_back(Vector::Zero(other.b[l].size()));
    }
    return m;
  }

  void set_zero() {
    for (auto& m : w) m.setZero();
    for (auto& v : b) v.setZero();
  }

  int in_dim() const { return static_cast<int>(w.front().rows()); }
  int out_dim() const { return static_cast<int>(w.back().cols()); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
    return n;
  }

  // flat parameter access, used by the gradient audits
  double* parameter(std::size_t flat_index) {
    for (std::size_t l = 0; l < w.size(); ++l) {
      if (flat_index < static_cast<std::size_t>(w[l].size()))
        return w[l].data() + flat_index;
      flat_index -= w[l].size();
      if (flat_index < static_cast<std::size_t>(b[l].size()))
        return b[l].data() + flat_index;
      flat_index -= b[l].size();
    }
    throw std::out_of_range("parameter index out of range");
  }

  struct Cache {
    std::vector<Matrix> act;  // act[0] = input, act[l+1] = output of layer l
  };

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const {
    if (x.cols() != w.front().rows())
      throw std::invalid_argument("mlp input width mismatch");
    Matrix h = x;
    if (cache) {
      cache->act.clear();
      cache->act.push_back(h);
    }
    for (std::size_t l = 0; l < w.size(); ++l) {
      h = (h * w[l]).rowwise() + b[l].transpose();
      if (l + 1 < w.size()) h = h.cwiseMax(0.0);
      if (cache) cache->act.push_back(h);
    }
    return h;
  }

  // dout: gradient w.r.t. the forward output; returns gradient w.r.t. the
  // input and accumulates parameter gradients into `grads`.
  Matrix backward(const Cache& cache, const Matrix& dout, Mlp& grads) const {
    if (cache.act.size() != w.size() + 1)
      throw std::invalid_argument("stale forward cache");
    Matrix delta = dout;
    for (std::size_t l = w.size(); l-- > 0;) {
      if (l + 1 < w.size()) {
        // ReLU mask of the stored post-activation
        delta = delta.cwiseProduct(
            (cache.act[l + 1].array() > 0.0).cast<double>().matrix());
      }
      grads.w[l] += cache.act[l].transpose() * delta;
      grads.b[l] += delta.colwise().sum().transpose();
      delta = delta * w[l].transpose();
    }
    return delta;
  }
};

struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long t = 0;

  static AdamState zeros_like(const Mlp& m) {
    AdamState s;
    for (std::size_t l = 0; l < m.w.size(); ++l) {
      s.mw.push_back(Matrix::Zero(m.w[l].rows(), m.w[l].cols()));
      s.vw.push_back(Matrix::Zero(m.w[l].rows(), m.w[l].cols()));
      s.mb.push_back(Vector::Zero(m.b[l].size()));
      s.vb.push_back(Vector::Zero(m.b[l].size()));
    }
    return s;
  }
};

inline void adam_step(Mlp& params, const Mlp& grads, AdamState& state, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
  ++state.t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < params.w.size(); ++l) {
    state.mw[l] = beta1 * state.mw[l] + (1.0 - beta1) * grads.w[l];
    state.vw[l] = beta2 * state.vw[l] + (1.0 - beta2) * grads.w[l].cwiseProduct(grads.w[l]);
    params.w[l].array() -=
        lr * (state.mw[l].array() / c1) / ((state.vw[l].array() / c2).sqrt() + eps);
    state.mb[l] = beta1 * state.mb[l] + (1.0 - beta1) * grads.b[l];
    state.vb[l] = beta2 * state.vb[l] + (1.0 - beta2) * grads.b[l].cwiseProduct(grads.b[l]);
    params.b[l].array() -=
        lr * (state.mb[l].array() / c1) / ((state.vb[l].array() / c2).sqrt() + eps);
  }
}

// Row-wise log-softmax cross-entropy.  Returns the mean loss; `dlogits`
// receives the gradient (softmax minus one-hot, divided by the row count).
inline double softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                                    Matrix* dlogits = nullptr,
                                    Matrix* probs_out = nullptr) {
  const int n = static_cast<int>(logits.rows());
  if (n == 0 || labels.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("label count must match logit rows");
  Matrix probs(n, logits.cols());
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    const Eigen::ArrayXd e = (logits.row(i).array() - mx).exp();
    const double z = e.sum();
    probs.row(i) = (e / z).matrix();
    const int y = labels[i];
    if (y < 0 || y >= logits.cols()) throw std::invalid_argument("label out of range");
    loss -= std::log(std::max(probs(i, y), 1e-300));
  }
  loss /= n;
  if (dlogits) {
    *dlogits = probs / static_cast<double>(n);
    for (int i = 0; i < n; ++i) (*dlogits)(i, labels[i]) -= 1.0 / n;
  }
  if (probs_out) *probs_out = std::move(probs);
  return loss;
}

}  // namespace hxdiag::nn

#endif  // HXDIAG_NN_HPP
