#pragma once

#include <bttie/errors.hpp>
#include <bttie/model.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bttie {

// Wards as graph nodes, with edges between adjacent wards.
class WardGraph {
public:
  WardGraph() = default;

  WardGraph(std::vector<std::string> labels, Eigen::MatrixXd adjacency)
      : labels_(std::move(labels)), adjacency_(std::move(adjacency)) {
    validate();
  }

  // Graph with no edges.
  explicit WardGraph(std::vector<std::string> labels)
      : WardGraph(labels, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                                 static_cast<Eigen::Index>(labels.size()))) {}

  static WardGraph from_edges(std::vector<std::string> labels,
                              const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (auto [u, v] : edges) {
      if (u >= labels.size() || v >= labels.size()) throw InvalidArgument("edge endpoint out of range");
      if (u == v) throw InvalidArgument("self-loop on ward '" + labels[u] + "'");
      a(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
      a(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = 1.0;
    }
    return WardGraph(std::move(labels), std::move(a));
  }

  std::size_t n_wards() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Eigen::MatrixXd& adjacency() const noexcept { return adjacency_; }

  std::optional<std::size_t> index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_index(const std::string& label) const {
    auto idx = index_of(label);
    if (!idx) throw InvalidArgument("unknown ward label '" + label + "'");
    return *idx;
  }

  // Optional display geometry: a GeoJSON geometry object serialised as text.
  void set_geometry(std::size_t ward, std::string geojson) {
    if (ward >= labels_.size()) throw InvalidArgument("geometry ward out of range");
    geometry_[ward] = std::move(geojson);
  }
  std::optional<std::string> geometry(std::size_t ward) const {
    auto it = geometry_.find(ward);
    if (it == geometry_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t edge_count() const { return static_cast<std::size_t>(adjacency_.sum() / 2.0); }

private:
  void validate() {
    const auto n = static_cast<Eigen::Index>(labels_.size());
    if (adjacency_.rows() != n || adjacency_.cols() != n)
      throw DimensionMismatch("adjacency must be " + std::to_string(n) + "x" + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      if (adjacency_(i, i) != 0.0) throw InvalidArgument("adjacency must have zero diagonal");
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = adjacency_(i, j);
        if (a != 0.0 && a != 1.0) throw InvalidArgument("adjacency entries must be 0 or 1");
        if (a != adjacency_(j, i)) throw InvalidArgument("adjacency matrix is not symmetric");
      }
    }
    index_.clear();
    for (std::size_t k = 0; k < labels_.size(); ++k)
      if (!index_.emplace(labels_[k], k).second)
        throw InvalidArgument("duplicate ward label '" + labels_[k] + "'");
  }

  std::vector<std::string> labels_;
  Eigen::MatrixXd adjacency_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::size_t, std::string> geometry_;
};

struct InverseGammaPrior {
  double shape = 0.01;
  double scale = 0.01;
};

// lambda ~ N(mean, alpha2 * K) with K a unit-diagonal correlation matrix.
// Immutable once built; the sampler carries its own current alpha2.
class SpatialPrior {
public:
  SpatialPrior(Eigen::VectorXd mean, Eigen::MatrixXd base_corr, double alpha2,
               InverseGammaPrior alpha2_prior = {})
      : mean_(std::move(mean)), base_corr_(std::move(base_corr)), alpha2_(alpha2),
        alpha2_prior_(alpha2_prior) {
    if (!(alpha2 > 0.0) || !std::isfinite(alpha2)) throw InvalidArgument("alpha2 must be positive");
    if (!(alpha2_prior.shape > 0.0) || !(alpha2_prior.scale > 0.0))
      throw InvalidArgument("inverse-gamma shape and scale must be positive");
    if (base_corr_.rows() != base_corr_.cols() || base_corr_.rows() != mean_.size())
      throw DimensionMismatch("prior mean and correlation sizes disagree");
    Eigen::LLT<Eigen::MatrixXd> llt(base_corr_);
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("prior correlation matrix is not positive definite");
    base_corr_inv_ = llt.solve(Eigen::MatrixXd::Identity(base_corr_.rows(), base_corr_.cols()));
    base_corr_inv_ = 0.5 * (base_corr_inv_ + base_corr_inv_.transpose()).eval();
    base_corr_chol_ = llt.matrixL();
  }

  std::size_t n_wards() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& base_corr() const noexcept { return base_corr_; }
  const Eigen::MatrixXd& base_corr_inverse() const noexcept { return base_corr_inv_; }
  // Lower Cholesky factor of K.
  const Eigen::MatrixXd& base_corr_cholesky() const noexcept { return base_corr_chol_; }
  double alpha2() const noexcept { return alpha2_; }
  const InverseGammaPrior& alpha2_prior() const noexcept { return alpha2_prior_; }

  Eigen::MatrixXd covariance() const { return alpha2_ * base_corr_; }
  Eigen::MatrixXd covariance(double alpha2) const { return alpha2 * base_corr_; }

  SpatialPrior with_alpha2(double alpha2) const {
    SpatialPrior copy = *this;
    if (!(alpha2 > 0.0)) throw InvalidArgument("alpha2 must be positive");
    copy.alpha2_ = alpha2;
    return copy;
  }

  SpatialPrior with_alpha2_prior(InverseGammaPrior p) const {
    if (!(p.shape > 0.0) || !(p.scale > 0.0))
      throw InvalidArgument("inverse-gamma shape and scale must be positive");
    SpatialPrior copy = *this;
    copy.alpha2_prior_ = p;
    return copy;
  }

  // (lambda - mean)^T K^{-1} (lambda - mean).
  double quadratic_form(const QualityVector& lambda) const {
    const Eigen::VectorXd r = lambda - mean_;
    return r.dot(base_corr_inv_ * r);
  }

  // One draw from N(mean, alpha2 K).
  template <typename Rng>
  QualityVector sample(double alpha2, Rng& rng) const {
    std::normal_distribution<double> norm(0.0, 1.0);
    Eigen::VectorXd eps(mean_.size());
    for (Eigen::Index k = 0; k < eps.size(); ++k) eps[k] = norm(rng);
    return mean_ + std::sqrt(alpha2) * (base_corr_chol_ * eps);
  }

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd base_corr_;
  double alpha2_;
  InverseGammaPrior alpha2_prior_;
  Eigen::MatrixXd base_corr_inv_;
  Eigen::MatrixXd base_corr_chol_;
};

// D^{-1/2} M D^{-1/2} with D = diag(M); result has exactly unit diagonal.
inline Eigen::MatrixXd normalise_to_correlation(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd inv_sd = m.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd k = inv_sd.asDiagonal() * m * inv_sd.asDiagonal();
  k = 0.5 * (k + k.transpose()).eval();
  k.diagonal().setOnes();
  return k;
}

// e^A of a symmetric matrix through its eigendecomposition.
inline Eigen::MatrixXd symmetric_matrix_exponential(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition of adjacency failed");
  const Eigen::VectorXd ew = eig.eigenvalues().array().exp();
  Eigen::MatrixXd out = eig.eigenvectors() * ew.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

// Sigma = alpha2 * D^{-1/2} e^A D^{-1/2}, with zero prior mean.
inline SpatialPrior build_spatial_covariance(const WardGraph& graph, double alpha2,
                                             InverseGammaPrior alpha2_prior = {}) {
  if (!(alpha2 > 0.0)) throw InvalidArgument("alpha2 must be positive");
  const auto& a = graph.adjacency();
  if (!a.isApprox(a.transpose(), 0.0)) throw InvalidArgument("adjacency matrix is not symmetric");
  Eigen::MatrixXd k = normalise_to_correlation(symmetric_matrix_exponential(a));
  return SpatialPrior(Eigen::VectorXd::Zero(a.rows()), std::move(k), alpha2, alpha2_prior);
}

// Conjugate update:
//   alpha2 | lambda ~ InverseGamma(shape + N/2, scale + (lambda - mu)^T K^{-1} (lambda - mu) / 2).
inline std::pair<double, double> alpha2_posterior_params(const QualityVector& lambda,
                                                         const SpatialPrior& prior) {
  if (static_cast<std::size_t>(lambda.size()) != prior.n_wards())
    throw DimensionMismatch("lambda length does not match prior");
  const auto& p = prior.alpha2_prior();
  return {p.shape + 0.5 * static_cast<double>(lambda.size()),
          p.scale + 0.5 * prior.quadratic_form(lambda)};
}

template <typename Rng>
double sample_inverse_gamma(double shape, double scale, Rng& rng) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  double g = gamma(rng);
  while (g <= 0.0) g = gamma(rng);
  return scale / g;
}

template <typename Rng>
double sample_alpha2(const QualityVector& lambda, const SpatialPrior& prior, Rng& rng) {
  const auto [shape, scale] = alpha2_posterior_params(lambda, prior);
  return sample_inverse_gamma(shape, scale, rng);
}

} // namespace bttie
