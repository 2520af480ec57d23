#pragma once

// Oracle checks shared by the unit tests and the acceptance binary. Each
// returns enough detail to print a diagnostic line.

#include <bttie/diagnostics.hpp>
#include <bttie/gibbs.hpp>
#include <bttie/simulation.hpp>
#include <bttie/spatial_prior.hpp>

#include "oracles.hpp"

#include <cmath>
#include <vector>

namespace checks {

using namespace bttie;

struct KsPair {
  double p_first;
  double p_second;
};

// ---- lambda | z, delta on N = 2 against a 2-D grid of
//      prior(lambda) * exp(kappa psi - z psi^2 / 2), psi = lambda_0 - lambda_1 - delta.
struct LambdaGivenZInstance {
  double delta = 0.8;
  double z = 0.7;
  int count = 2;
  double alpha2 = 1.5;
};

inline SamplerState lambda_given_z_state(const LambdaGivenZInstance& c) {
  SamplerState s;
  s.lambda = QualityVector::Zero(2);
  s.pairs = {ObservedPair{0, 1, c.count}};
  s.z = {c.z};
  s.delta = c.delta;
  s.alpha2 = c.alpha2;
  return s;
}

inline KsPair lambda_given_z_ks(const LambdaGivenZInstance& c, double sampler_delta, std::size_t n_draws,
                                std::uint64_t seed) {
  const auto prior = build_spatial_covariance(sim::path_graph(2), c.alpha2);
  const Eigen::MatrixXd cov = prior.covariance();
  const double lo = -8.0, hi = 8.0;
  const std::size_t m = 801;
  const double h = (hi - lo) / static_cast<double>(m - 1);
  std::vector<double> log_grid(m * m);
  double peak = -INFINITY;
  const double kappa = 0.5 * c.count;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      Eigen::Vector2d l(lo + h * static_cast<double>(a), lo + h * static_cast<double>(b));
      const double psi = l[0] - l[1] - c.delta;
      const double v = oracle::mvn_log_density(l, Eigen::Vector2d::Zero(), cov) + kappa * psi - 0.5 * c.z * psi * psi;
      log_grid[a * m + b] = v;
      peak = std::max(peak, v);
    }
  std::vector<double> first(m, 0.0), second(m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      const double w = std::exp(log_grid[a * m + b] - peak);
      first[a] += w;
      second[b] += w;
    }
  const auto cdf0 = oracle::GridCdf::from_values(first, lo, hi);
  const auto cdf1 = oracle::GridCdf::from_values(second, lo, hi);

  auto state = lambda_given_z_state(c);
  state.delta = sampler_delta;
  Rng rng(seed);
  std::vector<double> x0(n_draws), x1(n_draws);
  for (std::size_t k = 0; k < n_draws; ++k) {
    const auto l = sample_lambda(state, prior, rng);
    x0[k] = l[0];
    x1[k] = l[1];
  }
  return {oracle::ks_one_sample(x0, cdf0).p_value, oracle::ks_one_sample(x1, cdf1).p_value};
}

// ---- lambda | delta, alpha2 (z integrated out) on N = 2 with one edge, by
//      many short independent Gibbs chains, against a 2-D grid of
//      prior * Rao-Kupper likelihood.
struct TwoWardInstance {
  std::vector<oracle::Outcome3> outcomes{{0, 1, 0}, {0, 1, 0}, {0, 1, 0}, {1, 0, 0}, {0, 1, 1}, {0, 1, 1}};
  double delta = 0.6;
  double alpha2 = 1.0;
};

struct LambdaMarginalResult {
  double p_lambda0;
  double p_lambda1;
  double p_difference;
};

inline ComparisonDataset dataset_from(const std::vector<oracle::Outcome3>& outcomes, std::size_t n) {
  ComparisonDataset d(n);
  for (const auto& o : outcomes) {
    if (o.kind == 0)
      d.add_win(static_cast<std::size_t>(o.i), static_cast<std::size_t>(o.j));
    else
      d.add_tie(static_cast<std::size_t>(o.i), static_cast<std::size_t>(o.j));
  }
  return d;
}

inline LambdaMarginalResult lambda_full_conditional_ks(const TwoWardInstance& c, std::size_t n_chains,
                                                       long chain_length, std::uint64_t seed) {
  const auto prior = build_spatial_covariance(sim::path_graph(2), c.alpha2);
  const auto data = dataset_from(c.outcomes, 2);
  const Eigen::MatrixXd cov = prior.covariance();

  const double lo = -7.0, hi = 7.0;
  const std::size_t m = 701;
  const double h = (hi - lo) / static_cast<double>(m - 1);
  std::vector<double> log_grid(m * m);
  double peak = -INFINITY;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      Eigen::Vector2d l(lo + h * static_cast<double>(a), lo + h * static_cast<double>(b));
      const double v = oracle::mvn_log_density(l, Eigen::Vector2d::Zero(), cov) +
                       oracle::rk_log_likelihood(c.outcomes, l, c.delta);
      log_grid[a * m + b] = v;
      peak = std::max(peak, v);
    }
  std::vector<double> first(m, 0.0), second(m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      const double w = std::exp(log_grid[a * m + b] - peak);
      first[a] += w;
      second[b] += w;
    }
  const auto cdf0 = oracle::GridCdf::from_values(first, lo, hi);
  const auto cdf1 = oracle::GridCdf::from_values(second, lo, hi);
  // Difference d = lambda_0 - lambda_1 has prior variance 2 alpha2 (1 - r).
  const double r = prior.base_corr()(0, 1);
  const oracle::GridCdf cdfd(
      [&](double d) {
        Eigen::Vector2d l(d, 0.0);
        return -d * d / (4.0 * c.alpha2 * (1.0 - r)) + oracle::rk_log_likelihood(c.outcomes, l, c.delta);
      },
      -12.0, 12.0, 24001);

  SamplerConfig cfg;
  cfg.n_iterations = chain_length;
  cfg.burn_in = chain_length - 1;
  cfg.fixed_delta = c.delta;
  cfg.learn_alpha2 = false;
  std::vector<double> x0, x1, xd;
  for (std::size_t k = 0; k < n_chains; ++k) {
    cfg.seed = seed + k;
    const auto s = run_gibbs(data, prior, cfg);
    x0.push_back(s.lambda_draws(0, 0));
    x1.push_back(s.lambda_draws(0, 1));
    xd.push_back(s.lambda_draws(0, 0) - s.lambda_draws(0, 1));
  }
  return {oracle::ks_one_sample(x0, cdf0).p_value, oracle::ks_one_sample(x1, cdf1).p_value,
          oracle::ks_one_sample(xd, cdfd).p_value};
}

// ---- delta | lambda on a fixed 3-ward instance: independent chains of the
//      random-walk step against 1-D quadrature of prior * likelihood.
struct DeltaInstance {
  std::vector<oracle::Outcome3> outcomes{{0, 1, 0}, {0, 1, 1}, {1, 2, 0}, {2, 1, 1}, {0, 2, 0},
                                         {2, 0, 0}, {1, 0, 1}, {0, 1, 0}, {1, 2, 1}};
  Eigen::Vector3d lambda{0.7, 0.1, -0.5};
  double prior_rate = 2.0; // large enough that the sign of the prior term is visible
};

inline double delta_oracle_log_density(const DeltaInstance& c, double delta, double prior_sign) {
  if (delta <= 0.0) return -INFINITY;
  return -prior_sign * c.prior_rate * delta + oracle::rk_log_likelihood(c.outcomes, c.lambda, delta);
}

inline std::vector<double> delta_chain_draws(const DeltaInstance& c, std::size_t n_chains, int steps,
                                             std::uint64_t seed) {
  const auto data = dataset_from(c.outcomes, 3);
  SamplerState s;
  s.lambda = c.lambda;
  s.pairs = data.observed_pairs();
  s.alpha2 = 1.0;
  std::vector<double> out;
  out.reserve(n_chains);
  Rng rng(seed);
  for (std::size_t k = 0; k < n_chains; ++k) {
    s.delta = 0.5;
    std::optional<double> cached;
    for (int t = 0; t < steps; ++t) {
      const auto step = mh_step_delta(s, data.tie_events(), c.prior_rate, 0.6, rng, cached);
      s.delta = step.delta;
      cached = step.log_conditional;
    }
    out.push_back(s.delta);
  }
  return out;
}

// p-values against the corrected (-rate * delta) and the printed (+rate * delta) prior terms.
inline KsPair delta_conditional_ks(const DeltaInstance& c, std::size_t n_chains, int steps, std::uint64_t seed) {
  const auto draws = delta_chain_draws(c, n_chains, steps, seed);
  const oracle::GridCdf right([&](double d) { return delta_oracle_log_density(c, d, +1.0); }, 1e-9, 8.0, 40001);
  const oracle::GridCdf wrong([&](double d) { return delta_oracle_log_density(c, d, -1.0); }, 1e-9, 8.0, 40001);
  return {oracle::ks_one_sample(draws, right).p_value, oracle::ks_one_sample(draws, wrong).p_value};
}

// ---- alpha2 | lambda against quadrature of IG prior * Gaussian likelihood.
inline double alpha2_conditional_ks(std::size_t n_draws, std::uint64_t seed) {
  const auto g = WardGraph::from_edges(sim::numbered_labels(5), {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 3}});
  const InverseGammaPrior ig{0.5, 0.3};
  const auto prior = build_spatial_covariance(g, 1.0, ig);
  QualityVector lambda(5);
  lambda << 0.9, -0.4, 1.3, 0.2, -1.1;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  const oracle::GridCdf cdf(
      [&](double u) {
        const double a2 = std::exp(u);
        return -(ig.shape + 1.0) * u - ig.scale / a2 +
               oracle::mvn_log_density(lambda, zero, a2 * prior.base_corr()) + u;
      },
      -8.0, 8.0, 40001);
  Rng rng(seed);
  std::vector<double> logs(n_draws);
  for (auto& x : logs) x = std::log(sample_alpha2(lambda, prior, rng));
  return oracle::ks_one_sample(logs, cdf).p_value;
}

// ---- cross-sampler agreement on a small instance.
struct Agreement {
  std::vector<double> z_scores; // per compared quantity, |diff| / combined MC se
  double worst = 0.0;
};

inline double mc_standard_error(const std::vector<double>& chain) {
  return std::sqrt(variance_of(chain) / effective_sample_size(chain));
}

inline Agreement cross_sampler_agreement(const ComparisonDataset& data, const SpatialPrior& prior,
                                         const SamplerConfig& pg_config, const SamplerConfig& mh_config) {
  const auto a = run_gibbs(data, prior, pg_config);
  const auto b = run_mhrw_baseline(data, prior, mh_config);
  Agreement out;
  auto compare = [&](const std::vector<double>& x, const std::vector<double>& y) {
    const double se = std::hypot(mc_standard_error(x), mc_standard_error(y));
    const double z = std::abs(mean_of(x) - mean_of(y)) / se;
    out.z_scores.push_back(z);
    out.worst = std::max(out.worst, z);
  };
  const auto n = a.lambda_draws.cols();
  auto column_diff = [](const PosteriorSamples& s, Eigen::Index i, Eigen::Index j) {
    std::vector<double> d(static_cast<std::size_t>(s.lambda_draws.rows()));
    for (Eigen::Index r = 0; r < s.lambda_draws.rows(); ++r)
      d[static_cast<std::size_t>(r)] = s.lambda_draws(r, i) - s.lambda_draws(r, j);
    return d;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) compare(column_diff(a, i, j), column_diff(b, i, j));
  compare(a.delta_draws, b.delta_draws);
  return out;
}

} // namespace checks
