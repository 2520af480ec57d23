#pragma once

// Polya-Gamma augmented Gibbs sampler for the Bradley-Terry model with ties,
// and the component-wise Metropolis-Hastings random walk used as a baseline.

#include <bttie/errors.hpp>
#include <bttie/model.hpp>
#include <bttie/polya_gamma.hpp>
#include <bttie/spatial_prior.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace bttie {

using Rng = std::mt19937_64;

struct SamplerConfig {
  long n_iterations = 5000;
  long burn_in = 100;
  double delta_prior_rate = 0.01; // rate of the exponential prior on delta
  InverseGammaPrior alpha2_prior{0.01, 0.01};
  double delta_step = 0.1;  // initial random-walk sd for delta
  int delta_updates = 3;    // random-walk steps on delta per iteration
  double lambda_step = 0.5; // initial per-ward random-walk sd (MHRW only)
  double target_acceptance = 0.44;
  bool adapt = true; // tune step sizes during burn-in, frozen afterwards
  bool learn_alpha2 = true;
  std::optional<double> fixed_delta;
  double initial_delta = 0.5;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_iterations < 1) throw InvalidArgument("n_iterations must be >= 1");
    if (burn_in < 0 || burn_in >= n_iterations)
      throw InvalidArgument("burn_in must satisfy 0 <= burn_in < n_iterations");
    if (!(delta_prior_rate > 0.0)) throw InvalidArgument("delta prior rate must be positive");
    if (!(alpha2_prior.shape > 0.0) || !(alpha2_prior.scale > 0.0))
      throw InvalidArgument("alpha2 prior shape and scale must be positive");
    if (!(delta_step > 0.0) || !(lambda_step > 0.0)) throw InvalidArgument("step sizes must be positive");
    if (delta_updates < 1) throw InvalidArgument("delta_updates must be >= 1");
    if (fixed_delta && !(*fixed_delta >= 0.0)) throw InvalidArgument("fixed delta must be >= 0");
    if (!(initial_delta >= 0.0)) throw InvalidArgument("initial delta must be >= 0");
  }
};

// Current values of every block. z[k] belongs to pairs[k].
struct SamplerState {
  QualityVector lambda;
  std::vector<ObservedPair> pairs;
  std::vector<double> z;
  double delta = 0.5;
  double alpha2 = 1.0;
  long iteration = 0;
};

struct PosteriorSamples {
  Eigen::MatrixXd lambda_draws; // retained iterations x N
  std::vector<double> delta_draws;
  std::vector<double> alpha2_draws;
  std::vector<double> centre_draws; // the drawn mean Lambda of each retained row
  std::vector<long> iterations;
  double acceptance_rate_delta = 0.0;
  double delta_step = 0.0;            // frozen step after burn-in
  std::vector<double> lambda_acceptance; // per-ward rates, MHRW only
  double elapsed_seconds = 0.0;       // sampler loop only

  std::size_t n_retained() const noexcept { return delta_draws.size(); }
};

namespace detail {

inline double pair_tilt(const QualityVector& lambda, const ObservedPair& p, double delta) {
  return lambda[static_cast<Eigen::Index>(p.i)] - lambda[static_cast<Eigen::Index>(p.j)] - delta;
}

inline void check_state(const SamplerState& s, const SpatialPrior& prior) {
  if (static_cast<std::size_t>(s.lambda.size()) != prior.n_wards())
    throw DimensionMismatch("state lambda length does not match prior");
  if (s.z.size() != s.pairs.size()) throw InvalidArgument("latent variables do not match observed pairs");
}

} // namespace detail

// Fresh state: lambda = 0, z ~ PG(y + t, 0).
inline SamplerState initial_state(const ComparisonDataset& data, const SpatialPrior& prior,
                                  const SamplerConfig& config, Rng& rng) {
  if (data.n_wards() != prior.n_wards()) throw DimensionMismatch("dataset and prior ward counts differ");
  SamplerState s;
  s.lambda = QualityVector::Zero(static_cast<Eigen::Index>(data.n_wards()));
  s.pairs = data.observed_pairs();
  s.delta = config.fixed_delta.value_or(config.initial_delta);
  s.alpha2 = prior.alpha2();
  s.z.reserve(s.pairs.size());
  for (const auto& p : s.pairs) s.z.push_back(pg::sample_pg(pg::PGParams{p.count, 0.0}, rng));
  return s;
}

// z_ij ~ PG(y_ij + t_ij, lambda_i - lambda_j - delta) for every observed ordered pair.
inline void sample_z(SamplerState& state, Rng& rng) {
  state.z.resize(state.pairs.size());
  for (std::size_t k = 0; k < state.pairs.size(); ++k) {
    const auto& p = state.pairs[k];
    state.z[k] = pg::sample_pg(pg::PGParams{p.count, detail::pair_tilt(state.lambda, p, state.delta)}, rng);
  }
}

// Gaussian full conditional of lambda given z, delta and alpha2, in
// canonical form: precision Q = X^T Z X + Sigma^{-1} and linear term
// r = X^T (kappa + delta z) + Sigma^{-1} mu with kappa_ij = (y_ij + t_ij) / 2.
struct LambdaConditional {
  Eigen::MatrixXd precision;
  Eigen::VectorXd linear;
};

inline LambdaConditional lambda_conditional(const SamplerState& state, const SpatialPrior& prior) {
  detail::check_state(state, prior);
  LambdaConditional out;
  out.precision = prior.base_corr_inverse() / state.alpha2;
  out.linear = prior.mean().isZero(0.0) ? Eigen::VectorXd::Zero(prior.mean().size()).eval()
                                        : (out.precision * prior.mean()).eval();
  for (std::size_t k = 0; k < state.pairs.size(); ++k) {
    const auto& p = state.pairs[k];
    const auto i = static_cast<Eigen::Index>(p.i);
    const auto j = static_cast<Eigen::Index>(p.j);
    const double z = state.z[k];
    out.precision(i, i) += z;
    out.precision(j, j) += z;
    out.precision(i, j) -= z;
    out.precision(j, i) -= z;
    const double w = 0.5 * p.count + state.delta * z;
    out.linear[i] += w;
    out.linear[j] -= w;
  }
  return out;
}

inline QualityVector sample_lambda(const SamplerState& state, const SpatialPrior& prior, Rng& rng) {
  const auto cond = lambda_conditional(state, prior);
  Eigen::LLT<Eigen::MatrixXd> llt(cond.precision);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("lambda full-conditional precision is not positive definite");
  const Eigen::VectorXd mean = llt.solve(cond.linear);
  std::normal_distribution<double> norm(0.0, 1.0);
  Eigen::VectorXd eps(mean.size());
  for (Eigen::Index k = 0; k < eps.size(); ++k) eps[k] = norm(rng);
  // L^T u = eps gives u ~ N(0, Q^{-1}).
  const Eigen::VectorXd u = llt.matrixU().solve(eps);
  return mean + u;
}

// Log full conditional of delta up to a constant:
//   n_ties * log(e^{2 delta} - 1) + sum (y + t) log sigma(x.lambda - delta) - rate * delta.
inline double delta_log_conditional(double delta, const QualityVector& lambda,
                                    const std::vector<ObservedPair>& pairs, std::int64_t n_ties,
                                    double prior_rate) {
  if (delta < 0.0) return -std::numeric_limits<double>::infinity();
  double ll = -prior_rate * delta;
  if (n_ties > 0) ll += static_cast<double>(n_ties) * log_tie_factor(delta);
  for (const auto& p : pairs) ll += p.count * log_sigmoid(detail::pair_tilt(lambda, p, delta));
  return ll;
}

struct DeltaStep {
  double delta;
  bool accepted;
  double log_conditional; // at the returned delta
};

// Gaussian random walk on delta; proposals below zero are rejected outright.
// `current_log_conditional` may carry the cached value at state.delta.
inline DeltaStep mh_step_delta(const SamplerState& state, std::int64_t n_ties, double prior_rate,
                               double step, Rng& rng,
                               std::optional<double> current_log_conditional = std::nullopt) {
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double current = current_log_conditional.value_or(
      delta_log_conditional(state.delta, state.lambda, state.pairs, n_ties, prior_rate));
  const double proposal = state.delta + step * norm(rng);
  if (proposal < 0.0) return {state.delta, false, current};
  const double proposed = delta_log_conditional(proposal, state.lambda, state.pairs, n_ties, prior_rate);
  if (std::log(unif(rng)) < proposed - current) return {proposal, true, proposed};
  return {state.delta, false, current};
}

struct Recentred {
  QualityVector lambda;
  double centre; // the drawn Lambda; mean(lambda) == centre
};

// Translate lambda so its mean equals Lambda ~ N(mean(mu), alpha2 * 1^T K 1 / N^2).
inline Recentred recentre(const QualityVector& lambda, const SpatialPrior& prior, double alpha2, Rng& rng) {
  if (static_cast<std::size_t>(lambda.size()) != prior.n_wards())
    throw DimensionMismatch("lambda length does not match prior");
  const double n = static_cast<double>(lambda.size());
  const double var = alpha2 * prior.base_corr().sum() / (n * n);
  std::normal_distribution<double> norm(prior.mean().mean(), std::sqrt(var));
  const double centre = norm(rng);
  QualityVector out = lambda.array() + (centre - lambda.mean());
  return {std::move(out), centre};
}

namespace detail {

// Robbins-Monro update of a log step size towards the target acceptance.
inline double adapt_step(double step, bool accepted, double target, long t) {
  const double gain = std::min(0.5, 5.0 / std::sqrt(static_cast<double>(t) + 1.0));
  return step * std::exp(gain * ((accepted ? 1.0 : 0.0) - target));
}

inline PosteriorSamples make_samples(const SamplerConfig& config, std::size_t n_wards) {
  PosteriorSamples out;
  const auto kept = static_cast<std::size_t>(config.n_iterations - config.burn_in);
  out.lambda_draws.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(n_wards));
  out.delta_draws.reserve(kept);
  out.alpha2_draws.reserve(kept);
  out.centre_draws.reserve(kept);
  out.iterations.reserve(kept);
  return out;
}

inline void record(PosteriorSamples& out, const SamplerState& s, double centre) {
  const auto row = static_cast<Eigen::Index>(out.delta_draws.size());
  out.lambda_draws.row(row) = s.lambda.transpose();
  out.delta_draws.push_back(s.delta);
  out.alpha2_draws.push_back(s.alpha2);
  out.centre_draws.push_back(centre);
  out.iterations.push_back(s.iteration);
}

// Shared tail of one iteration: delta step, alpha2 update, recentring.
struct IterationTail {
  double delta_step;
  long delta_accepted = 0;
  long delta_proposed = 0;
  long adapt_count = 0;

  double run(SamplerState& s, const SpatialPrior& prior, const SamplerConfig& config,
             std::int64_t n_ties, bool burning, Rng& rng) {
    if (!config.fixed_delta) {
      std::optional<double> cached;
      for (int k = 0; k < config.delta_updates; ++k) {
        const auto step = mh_step_delta(s, n_ties, config.delta_prior_rate, delta_step, rng, cached);
        s.delta = step.delta;
        cached = step.log_conditional;
        if (!burning) {
          ++delta_proposed;
          delta_accepted += step.accepted ? 1 : 0;
        } else if (config.adapt) {
          delta_step = adapt_step(delta_step, step.accepted, config.target_acceptance, adapt_count++);
        }
      }
    }
    if (config.learn_alpha2) s.alpha2 = sample_alpha2(s.lambda, prior, rng);
    auto rc = recentre(s.lambda, prior, s.alpha2, rng);
    s.lambda = std::move(rc.lambda);
    return rc.centre;
  }
};

} // namespace detail

// Iterates z -> lambda -> delta -> alpha2 -> recentre and keeps the
// post-burn-in draws. Deterministic given config.seed.
inline PosteriorSamples run_gibbs(const ComparisonDataset& data, const SpatialPrior& prior_in,
                                  const SamplerConfig& config) {
  config.validate();
  const SpatialPrior prior = prior_in.with_alpha2_prior(config.alpha2_prior);
  Rng rng(config.seed);
  SamplerState state = initial_state(data, prior, config, rng);
  const auto n_ties = data.tie_events();
  auto out = detail::make_samples(config, data.n_wards());
  detail::IterationTail tail{config.delta_step};

  const auto start = std::chrono::steady_clock::now();
  for (long it = 0; it < config.n_iterations; ++it) {
    state.iteration = it;
    try {
      sample_z(state, rng);
      state.lambda = sample_lambda(state, prior, rng);
      const double centre = tail.run(state, prior, config, n_ties, it < config.burn_in, rng);
      if (it >= config.burn_in) detail::record(out, state, centre);
    } catch (const std::exception& e) {
      throw SamplerFailure(it, e.what());
    }
  }
  out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.acceptance_rate_delta =
      tail.delta_proposed == 0 ? 0.0 : static_cast<double>(tail.delta_accepted) / tail.delta_proposed;
  out.delta_step = tail.delta_step;
  return out;
}

// Component-wise adaptive Gaussian random walk on lambda targeting the exact
// (non-augmented) posterior, followed by the same delta, alpha2 and
// recentring steps as run_gibbs.
inline PosteriorSamples run_mhrw_baseline(const ComparisonDataset& data, const SpatialPrior& prior_in,
                                          const SamplerConfig& config) {
  config.validate();
  const SpatialPrior prior = prior_in.with_alpha2_prior(config.alpha2_prior);
  if (data.n_wards() != prior.n_wards()) throw DimensionMismatch("dataset and prior ward counts differ");
  Rng rng(config.seed);
  const auto n = static_cast<Eigen::Index>(data.n_wards());

  SamplerState state;
  state.lambda = QualityVector::Zero(n);
  state.pairs = data.observed_pairs();
  state.delta = config.fixed_delta.value_or(config.initial_delta);
  state.alpha2 = prior.alpha2();
  const auto n_ties = data.tie_events();

  // Pairs touching each ward.
  std::vector<std::vector<std::size_t>> touching(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < state.pairs.size(); ++k) {
    touching[state.pairs[k].i].push_back(k);
    touching[state.pairs[k].j].push_back(k);
  }

  const Eigen::MatrixXd& kinv = prior.base_corr_inverse();
  Eigen::VectorXd resid = state.lambda - prior.mean();
  Eigen::VectorXd kinv_resid = kinv * resid;
  const Eigen::VectorXd kinv_ones = kinv * Eigen::VectorXd::Ones(n);

  std::vector<double> steps(static_cast<std::size_t>(n), config.lambda_step);
  std::vector<long> accepted(static_cast<std::size_t>(n), 0);
  long proposed_per_ward = 0;

  auto out = detail::make_samples(config, data.n_wards());
  detail::IterationTail tail{config.delta_step};
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const auto start = std::chrono::steady_clock::now();
  for (long it = 0; it < config.n_iterations; ++it) {
    state.iteration = it;
    const bool burning = it < config.burn_in;
    try {
      for (Eigen::Index w = 0; w < n; ++w) {
        const auto wi = static_cast<std::size_t>(w);
        const double eps = steps[wi] * norm(rng);
        double log_ratio = 0.0;
        for (auto k : touching[wi]) {
          const auto& p = state.pairs[k];
          const double tilt = detail::pair_tilt(state.lambda, p, state.delta);
          const double shifted = tilt + (p.i == wi ? eps : -eps);
          log_ratio += p.count * (log_sigmoid(shifted) - log_sigmoid(tilt));
        }
        // Prior: -(1 / 2 alpha2) * (2 eps (K^{-1} r)_w + eps^2 K^{-1}_ww).
        log_ratio -= (2.0 * eps * kinv_resid[w] + eps * eps * kinv(w, w)) / (2.0 * state.alpha2);
        const bool ok = std::log(unif(rng)) < log_ratio;
        if (ok) {
          state.lambda[w] += eps;
          kinv_resid += eps * kinv.col(w);
        }
        if (burning && config.adapt) {
          steps[wi] = detail::adapt_step(steps[wi], ok, config.target_acceptance, it);
        } else if (!burning) {
          accepted[wi] += ok ? 1 : 0;
        }
      }
      if (!burning) ++proposed_per_ward;
      const double before = state.lambda.mean();
      const double centre = tail.run(state, prior, config, n_ties, burning, rng);
      kinv_resid += (centre - before) * kinv_ones;
      if (it % 1000 == 999) kinv_resid = kinv * (state.lambda - prior.mean());
      if (!burning) detail::record(out, state, centre);
    } catch (const std::exception& e) {
      throw SamplerFailure(it, e.what());
    }
  }
  out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.acceptance_rate_delta =
      tail.delta_proposed == 0 ? 0.0 : static_cast<double>(tail.delta_accepted) / tail.delta_proposed;
  out.delta_step = tail.delta_step;
  out.lambda_acceptance.resize(static_cast<std::size_t>(n));
  for (std::size_t w = 0; w < accepted.size(); ++w)
    out.lambda_acceptance[w] =
        proposed_per_ward == 0 ? 0.0 : static_cast<double>(accepted[w]) / proposed_per_ward;
  return out;
}

} // namespace bttie
