#pragma once

#include <bttie/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bttie {

// Ward quality parameters on the log scale.
using QualityVector = Eigen::VectorXd;

// Tie inflation parameter, always >= 0.
class TieParameter {
public:
  TieParameter() = default;
  explicit TieParameter(double delta) : delta_(delta) {
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw InvalidArgument("tie parameter must be finite and non-negative, got " +
                            std::to_string(delta));
  }
  double value() const noexcept { return delta_; }
  operator double() const noexcept { return delta_; }

private:
  double delta_ = 0.0;
};

// Numerically stable log(1 / (1 + exp(-x))).
inline double log_sigmoid(double x) noexcept {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(exp(2 delta) - 1), -inf at delta = 0.
inline double log_tie_factor(double delta) noexcept {
  return std::log(std::expm1(2.0 * delta));
}

// The regressor x_ij: +1 at i, -1 at j. Never materialised densely.
struct PairRegressor {
  std::size_t i;
  std::size_t j;

  PairRegressor(std::size_t i_, std::size_t j_) : i(i_), j(j_) {
    if (i == j) throw InvalidPair("pair regressor needs i != j");
  }

  template <typename Vec>
  double dot(const Vec& lambda) const {
    return lambda[static_cast<Eigen::Index>(i)] - lambda[static_cast<Eigen::Index>(j)];
  }
};

// An ordered pair (i, j) with b = y_ij + t_ij >= 1. These are the pairs that
// carry a Polya-Gamma latent variable and a likelihood term.
struct ObservedPair {
  std::size_t i;
  std::size_t j;
  int count; // y_ij + t_ij
};

// Aggregated judgements over N wards.
//
// wins(i, j) counts i judged higher than j. ties(i, j) == ties(j, i) counts
// tie events between the unordered pair, each stored once per event on both
// sides. Skips are tallied but never enter the likelihood.
class ComparisonDataset {
public:
  using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

  ComparisonDataset() = default;
  explicit ComparisonDataset(std::size_t n_wards)
      : n_(n_wards),
        wins_(CountMatrix::Zero(static_cast<Eigen::Index>(n_wards),
                                static_cast<Eigen::Index>(n_wards))),
        ties_(CountMatrix::Zero(static_cast<Eigen::Index>(n_wards),
                                static_cast<Eigen::Index>(n_wards))) {}

  // Validates the invariants on raw matrices.
  static ComparisonDataset from_counts(const CountMatrix& wins, const CountMatrix& ties,
                                       std::int64_t skips = 0) {
    if (wins.rows() != wins.cols() || ties.rows() != ties.cols() || wins.rows() != ties.rows())
      throw DimensionMismatch("wins and ties must be square and of equal size");
    const auto n = static_cast<std::size_t>(wins.rows());
    ComparisonDataset d(n);
    for (Eigen::Index i = 0; i < wins.rows(); ++i) {
      if (wins(i, i) != 0 || ties(i, i) != 0)
        throw InvalidArgument("wins and ties must have zero diagonal");
      for (Eigen::Index j = 0; j < wins.cols(); ++j) {
        if (wins(i, j) < 0 || ties(i, j) < 0) throw InvalidArgument("counts must be non-negative");
        if (ties(i, j) != ties(j, i)) throw InvalidArgument("tie matrix must be symmetric");
      }
    }
    if (skips < 0) throw InvalidArgument("skip count must be non-negative");
    d.wins_ = wins;
    d.ties_ = ties;
    d.skips_ = skips;
    return d;
  }

  std::size_t n_wards() const noexcept { return n_; }
  const CountMatrix& wins() const noexcept { return wins_; }
  const CountMatrix& ties() const noexcept { return ties_; }
  std::int64_t skips() const noexcept { return skips_; }

  std::int64_t wins(std::size_t i, std::size_t j) const { return wins_(idx(i), idx(j)); }
  std::int64_t ties(std::size_t i, std::size_t j) const { return ties_(idx(i), idx(j)); }

  // n_ij = y_ij + y_ji + t_ij, comparisons of the unordered pair.
  std::int64_t comparisons(std::size_t i, std::size_t j) const {
    return wins(i, j) + wins(j, i) + ties(i, j);
  }

  void add_win(std::size_t winner, std::size_t loser) {
    check_pair(winner, loser);
    ++wins_(idx(winner), idx(loser));
  }
  void add_tie(std::size_t a, std::size_t b) {
    check_pair(a, b);
    ++ties_(idx(a), idx(b));
    ++ties_(idx(b), idx(a));
  }
  void add_skip() noexcept { ++skips_; }

  // Number of tie events (sum of t_ij over ordered pairs / 2).
  std::int64_t tie_events() const { return ties_.sum() / 2; }
  std::int64_t win_events() const { return wins_.sum(); }
  // Informative (non-skip) events.
  std::int64_t total_comparisons() const { return win_events() + tie_events(); }

  double tie_fraction() const {
    const auto total = total_comparisons();
    return total == 0 ? 0.0 : static_cast<double>(tie_events()) / static_cast<double>(total);
  }

  // Ordered pairs with y_ij + t_ij >= 1, in row-major order.
  std::vector<ObservedPair> observed_pairs() const {
    std::vector<ObservedPair> out;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        if (i == j) continue;
        const auto b = wins(i, j) + ties(i, j);
        if (b > 0) out.push_back({i, j, static_cast<int>(b)});
      }
    return out;
  }

  bool operator==(const ComparisonDataset& other) const {
    return n_ == other.n_ && wins_ == other.wins_ && ties_ == other.ties_ &&
           skips_ == other.skips_;
  }

private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
  void check_pair(std::size_t i, std::size_t j) const {
    if (i == j) throw InvalidPair("a ward cannot be compared with itself");
    if (i >= n_ || j >= n_) throw InvalidPair("ward index out of range");
  }

  std::size_t n_ = 0;
  CountMatrix wins_;
  CountMatrix ties_;
  std::int64_t skips_ = 0;
};

namespace detail {
inline void check_indices(const QualityVector& lambda, std::size_t i, std::size_t j) {
  if (i == j) throw InvalidPair("win/tie probability needs i != j");
  if (i >= static_cast<std::size_t>(lambda.size()) || j >= static_cast<std::size_t>(lambda.size()))
    throw InvalidPair("ward index out of range");
}
} // namespace detail

// P(i judged higher than j) = exp(l_i) / (exp(l_i) + exp(l_j + delta)).
inline double win_probability(const QualityVector& lambda, std::size_t i, std::size_t j,
                              TieParameter delta) {
  detail::check_indices(lambda, i, j);
  return sigmoid(PairRegressor(i, j).dot(lambda) - delta.value());
}

// P(tie) = (e^{2 delta} - 1) e^{l_i + l_j} / ((e^{l_i} + e^{l_j + delta})(e^{l_i + delta} + e^{l_j})),
// evaluated as (e^{2 delta} - 1) * sigma(d - delta) * sigma(-d - delta) in log space.
inline double tie_probability(const QualityVector& lambda, std::size_t i, std::size_t j,
                              TieParameter delta) {
  detail::check_indices(lambda, i, j);
  if (delta.value() == 0.0) return 0.0;
  const double d = PairRegressor(i, j).dot(lambda);
  return std::exp(log_tie_factor(delta) + log_sigmoid(d - delta) + log_sigmoid(-d - delta));
}

// Log of the tie-model likelihood, combinatorial constants dropped:
//   #ties * log(e^{2 delta} - 1) + sum_{i != j} (y_ij + t_ij) log sigma(l_i - l_j - delta).
inline double log_likelihood_ties(const ComparisonDataset& data, const QualityVector& lambda,
                                  TieParameter delta) {
  if (static_cast<std::size_t>(lambda.size()) != data.n_wards())
    throw DimensionMismatch("lambda has " + std::to_string(lambda.size()) +
                            " entries, dataset has " + std::to_string(data.n_wards()) + " wards");
  double ll = 0.0;
  const auto n_ties = data.tie_events();
  if (n_ties > 0) ll += static_cast<double>(n_ties) * log_tie_factor(delta);
  for (const auto& p : data.observed_pairs())
    ll += p.count * log_sigmoid(PairRegressor(p.i, p.j).dot(lambda) - delta.value());
  return ll;
}

// Standard Bradley-Terry log likelihood (no ties), binomial constants dropped.
inline double log_likelihood_standard(const ComparisonDataset& data, const QualityVector& lambda) {
  if (data.tie_events() != 0)
    throw InvalidArgument("dataset contains ties; use log_likelihood_ties");
  if (static_cast<std::size_t>(lambda.size()) != data.n_wards())
    throw DimensionMismatch("lambda length does not match dataset");
  double ll = 0.0;
  for (std::size_t i = 0; i < data.n_wards(); ++i)
    for (std::size_t j = 0; j < data.n_wards(); ++j) {
      if (i == j) continue;
      const auto y = data.wins(i, j);
      if (y > 0) ll += static_cast<double>(y) * log_sigmoid(PairRegressor(i, j).dot(lambda));
    }
  return ll;
}

} // namespace bttie
