#ifndef HXDIAG_FLOW_HPP
#define HXDIAG_FLOW_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hxdiag/nn.hpp"
#include "hxdiag/rng.hpp"
#include "hxdiag/spline.hpp"

namespace hxdiag {

// Conditional normalizing flow on a 4-dim parameter space: a stack of
// coupling layers, each transforming two coordinates elementwise with
// rational-quadratic splines whose knots come from an MLP fed with the other
// two coordinates and the conditioning summary vector.  Base density is a
// standard 4-dim normal.
class SplineFlow {
 public:
  static constexpr int kDim = 4;

  struct Layer {
    nn::Mlp conditioner;
    std::array<int, 2> pass{};
    std::array<int, 2> move{};
  };

  SplineFlow() = default;

  static SplineFlow make(int ctx_dim, int n_layers, int hidden, Rng& rng) {
    if (ctx_dim < 1 || n_layers < 1 || hidden < 1)
      throw std::invalid_argument("flow dimensions must be positive");
    SplineFlow f;
    f.ctx_dim_ = ctx_dim;
    for (int l = 0; l < n_layers; ++l) {
      Layer layer;
      if (l % 2 == 0) {
        layer.pass = {0, 1};
        layer.move = {2, 3};
      } else {
        layer.pass = {2, 3};
        layer.move = {0, 1};
      }
      // zero-initialized head makes every spline start as the identity
      layer.conditioner = nn::Mlp::make(
          {2 + ctx_dim, hidden, hidden, 2 * rqs::kParamsPerDim}, rng, true);
      f.layers_.push_back(std::move(layer));
    }
    return f;
  }

  static SplineFlow zeros_like(const SplineFlow& other) {
    SplineFlow f;
    f.ctx_dim_ = other.ctx_dim_;
    for (const auto& layer : other.layers_) {
      Layer g;
      g.pass = layer.pass;
      g.move = layer.move;
      g.conditioner = nn::Mlp::zeros_like(layer.conditioner);
      f.layers_.push_back(std::move(g));
    }
    return f;
  }

  void set_zero() {
    for (auto& layer : layers_) layer.conditioner.set_zero();
  }

  int ctx_dim() const { return ctx_dim_; }
  int n_layers() const { return static_cast<int>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.conditioner.parameter_count();
    return n;
  }

  double* parameter(std::size_t flat_index) {
    for (auto& layer : layers_) {
      const std::size_t c = layer.conditioner.parameter_count();
      if (flat_index < c) return layer.conditioner.parameter(flat_index);
      flat_index -= c;
    }
    throw std::out_of_range("flow parameter index out of range");
  }

  struct LayerCache {
    nn::Mlp::Cache mlp;
    nn::Matrix input;                // layer input, n x 4
    std::vector<rqs::Decoded> dec;   // 2 per row
    std::vector<rqs::Eval> ev;       // 2 per row
  };

  struct BatchCache {
    std::vector<LayerCache> layers;
    nn::Matrix z;                    // final latent, n x 4
  };

  // log density of each row of X given the matching row of C
  Eigen::VectorXd log_prob_batch(const nn::Matrix& X, const nn::Matrix& C,
                                 BatchCache* cache = nullptr) const {
    check_shapes(X, C);
    const int n = static_cast<int>(X.rows());
    nn::Matrix h = X;
    Eigen::VectorXd logdet = Eigen::VectorXd::Zero(n);
    if (cache) cache->layers.assign(layers_.size(), LayerCache{});

    std::array<double, 2 * rqs::kParamsPerDim> raw_row;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& layer = layers_[l];
      LayerCache* lc = cache ? &cache->layers[l] : nullptr;
      if (lc) lc->input = h;

      nn::Matrix cond_in(n, 2 + ctx_dim_);
      cond_in.col(0) = h.col(layer.pass[0]);
      cond_in.col(1) = h.col(layer.pass[1]);
      cond_in.rightCols(ctx_dim_) = C;
      const nn::Matrix raw = layer.conditioner.forward(cond_in, lc ? &lc->mlp : nullptr);

      if (lc) {
        lc->dec.resize(2 * n);
        lc->ev.resize(2 * n);
      }
      for (int i = 0; i < n; ++i) {
        for (int p = 0; p < 2 * rqs::kParamsPerDim; ++p) raw_row[p] = raw(i, p);
        for (int j = 0; j < 2; ++j) {
          const rqs::Decoded dec = rqs::decode(raw_row.data() + j * rqs::kParamsPerDim);
          const rqs::Eval ev = rqs::forward(dec, h(i, layer.move[j]));
          h(i, layer.move[j]) = ev.y;
          logdet(i) += ev.logdet;
          if (lc) {
            lc->dec[2 * i + j] = dec;
            lc->ev[2 * i + j] = ev;
          }
        }
      }
    }
    if (cache) cache->z = h;

    Eigen::VectorXd lp(n);
    const double norm_const = 0.5 * kDim * 1.8378770664093454836;  // (d/2) ln 2pi
    for (int i = 0; i < n; ++i)
      lp(i) = -norm_const - 0.5 * h.row(i).squaredNorm() + logdet(i);
    return lp;
  }

  // Accumulates d(sum_i dlp_i * log_prob_i)/d(params) into `grads`.
  void backward_batch(const BatchCache& cache, const nn::Matrix& C,
                      const Eigen::VectorXd& dlp, SplineFlow& grads) const {
    const int n = static_cast<int>(cache.z.rows());
    if (grads.layers_.size() != layers_.size())
      throw std::invalid_argument("gradient holder shape mismatch");
    nn::Matrix gh = nn::Matrix::Zero(n, kDim);
    for (int i = 0; i < n; ++i) gh.row(i) = -dlp(i) * cache.z.row(i);

    std::array<double, 2 * rqs::kParamsPerDim> grow;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const Layer& layer = layers_[l];
      const LayerCache& lc = cache.layers[l];
      nn::Matrix raw_grad = nn::Matrix::Zero(n, 2 * rqs::kParamsPerDim);
      nn::Matrix gin = nn::Matrix::Zero(n, kDim);
      for (int i = 0; i < n; ++i) {
        grow.fill(0.0);
        for (int j = 0; j < 2; ++j) {
          double dx = 0.0;
          rqs::backward(lc.dec[2 * i + j], lc.ev[2 * i + j], gh(i, layer.move[j]),
                        dlp(i), dx, grow.data() + j * rqs::kParamsPerDim);
          gin(i, layer.move[j]) = dx;
        }
        for (int p = 0; p < 2 * rqs::kParamsPerDim; ++p) raw_grad(i, p) = grow[p];
      }
      const nn::Matrix gcond =
          layer.conditioner.backward(lc.mlp, raw_grad, grads.layers_[l].conditioner);
      gin.col(layer.pass[0]) = gh.col(layer.pass[0]) + gcond.col(0);
      gin.col(layer.pass[1]) = gh.col(layer.pass[1]) + gcond.col(1);
      gh = gin;
    }
  }

  double log_prob(const std::array<double, kDim>& x, const Eigen::VectorXd& ctx) const {
    nn::Matrix xm(1, kDim);
    for (int j = 0; j < kDim; ++j) xm(0, j) = x[j];
    return log_prob_batch(xm, ctx.transpose())(0);
  }

  std::array<double, kDim> forward(const std::array<double, kDim>& x,
                                   const Eigen::VectorXd& ctx, double* logdet = nullptr) const {
    nn::Matrix xm(1, kDim);
    for (int j = 0; j < kDim; ++j) xm(0, j) = x[j];
    BatchCache cache;
    const Eigen::VectorXd lp = log_prob_batch(xm, ctx.transpose(), &cache);
    if (logdet) {
      const double norm_const = 0.5 * kDim * 1.8378770664093454836;
      *logdet = lp(0) + norm_const + 0.5 * cache.z.row(0).squaredNorm();
    }
    std::array<double, kDim> z;
    for (int j = 0; j < kDim; ++j) z[j] = cache.z(0, j);
    return z;
  }

  // latent -> data direction; exact inverse of `forward`
  std::array<double, kDim> inverse(const std::array<double, kDim>& z,
                                   const Eigen::VectorXd& ctx) const {
    nn::Matrix zm(1, kDim);
    for (int j = 0; j < kDim; ++j) zm(0, j) = z[j];
    invert_rows(zm, ctx);
    std::array<double, kDim> x;
    for (int j = 0; j < kDim; ++j) x[j] = zm(0, j);
    return x;
  }

  // n draws for a single conditioning vector
  nn::Matrix sample_batch(const Eigen::VectorXd& ctx, int n, Rng& rng) const {
    if (n < 1) throw std::invalid_argument("sample count must be positive");
    nn::Matrix z(n, kDim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < kDim; ++j) z(i, j) = rng.normal();
    invert_rows(z, ctx);
    return z;
  }

 private:
  void check_shapes(const nn::Matrix& x, const nn::Matrix& c) const {
    if (x.cols() != kDim) throw std::invalid_argument("flow input must have 4 columns");
    if (c.rows() != x.rows() || c.cols() != ctx_dim_)
      throw std::invalid_argument("context shape mismatch");
  }

  void invert_rows(nn::Matrix& z, const Eigen::VectorXd& ctx) const {
    if (ctx.size() != ctx_dim_) throw std::invalid_argument("context shape mismatch");
    const int n = static_cast<int>(z.rows());
    std::array<double, 2 * rqs::kParamsPerDim> raw_row;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const Layer& layer = layers_[l];
      nn::Matrix cond_in(n, 2 + ctx_dim_);
      cond_in.col(0) = z.col(layer.pass[0]);
      cond_in.col(1) = z.col(layer.pass[1]);
      cond_in.rightCols(ctx_dim_).rowwise() = ctx.transpose();
      const nn::Matrix raw = layer.conditioner.forward(cond_in);
      for (int i = 0; i < n; ++i) {
        for (int p = 0; p < 2 * rqs::kParamsPerDim; ++p) raw_row[p] = raw(i, p);
        for (int j = 0; j < 2; ++j) {
          const rqs::Decoded dec = rqs::decode(raw_row.data() + j * rqs::kParamsPerDim);
          z(i, layer.move[j]) = rqs::inverse(dec, z(i, layer.move[j]));
        }
      }
    }
  }

  int ctx_dim_ = 0;
  std::vector<Layer> layers_;
};

}  // namespace hxdiag

#endif  // HXDIAG_FLOW_HPP
