#pragma once

// Exact Polya-Gamma PG(b, c) sampling for integer b, via the alternating
// series accept-reject sampler for PG(1, c) (Devroye's method as adapted by
// Polson, Scott and Windle), summed b times.

#include <bttie/errors.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

namespace bttie::pg {

struct PGParams {
  int b = 1;
  double c = 0.0;
};

namespace detail {

inline constexpr double kTruncation = 0.64;
inline constexpr double kPi = std::numbers::pi;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Coefficients a_n(x) of the J*(1, 0) density series, piecewise around the
// truncation point. The n-independent factors are computed once per x.
class SeriesCoefficients {
public:
  explicit SeriesCoefficients(double x) : left_(x <= kTruncation) {
    if (left_) {
      scale_ = std::sqrt(2.0 / (kPi * x));
      scale_ = scale_ * scale_ * scale_;
      rate_ = 2.0 / x;
    } else {
      scale_ = 1.0;
      rate_ = kPi * kPi * x / 2.0;
    }
  }
  double operator()(int n) const {
    const double k = n + 0.5;
    return kPi * k * scale_ * std::exp(-k * k * rate_);
  }

private:
  bool left_;
  double scale_;
  double rate_;
};

inline double series_coef(int n, double x) { return SeriesCoefficients(x)(n); }

// exp(-z) * P(IG(1/z, 1) < t) without overflow for large z.
inline double weighted_ig_cdf(double t, double z) {
  const double rt = std::sqrt(1.0 / t);
  const double lo = normal_cdf(rt * (t * z - 1.0));
  const double hi = normal_cdf(-rt * (t * z + 1.0));
  double out = std::exp(-z) * lo;
  if (hi > 0.0) out += std::exp(z + std::log(hi));
  return out;
}

// Inverse Gaussian IG(1/z, 1) truncated to (0, t).
template <typename Rng>
double truncated_inverse_gaussian(double z, double t, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  double x = t + 1.0;
  if (z == 0.0 || 1.0 / z > t) {
    // Mean beyond the truncation point: proposals from the 1/chi^2 tail.
    double alpha = 0.0;
    while (unif(rng) > alpha) {
      double e1 = expo(rng), e2 = expo(rng);
      while (e1 * e1 > 2.0 * e2 / t) {
        e1 = expo(rng);
        e2 = expo(rng);
      }
      x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      alpha = std::exp(-0.5 * z * z * x);
    }
    return x;
  }
  const double mu = 1.0 / z;
  std::normal_distribution<double> norm(0.0, 1.0);
  while (x > t) {
    const double y0 = norm(rng);
    const double y = y0 * y0;
    x = mu + 0.5 * mu * mu * y - 0.5 * mu * std::sqrt(4.0 * mu * y + (mu * y) * (mu * y));
    if (unif(rng) > mu / (mu + x)) x = mu * mu / x;
  }
  return x;
}

// Mixture weights of the two proposal pieces for J*(1, z).
struct JStarProposal {
  double z;
  double rate;  // of the exponential right piece
  double p_exp; // probability of proposing from the right piece

  explicit JStarProposal(double z_) : z(z_) {
    const double t = kTruncation;
    rate = z * z / 2.0 + kPi * kPi / 8.0;
    const double p = kPi / (2.0 * rate) * std::exp(-rate * t);
    const double q = 2.0 * weighted_ig_cdf(t, z);
    p_exp = p / (p + q);
  }
};

// One draw from J*(1, z); PG(1, c) = J*(1, |c|/2) / 4.
template <typename Rng>
double sample_jstar(const JStarProposal& prop, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  for (;;) {
    const double x = unif(rng) < prop.p_exp ? kTruncation + expo(rng) / prop.rate
                                            : truncated_inverse_gaussian(prop.z, kTruncation, rng);
    const SeriesCoefficients a(x);
    double s = a(0);
    const double y = unif(rng) * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= a(n);
        if (y <= s) return x;
      } else {
        s += a(n);
        if (y > s) break;
      }
    }
  }
}

template <typename Rng>
double sample_jstar(double z, Rng& rng) {
  return sample_jstar(JStarProposal(z), rng);
}

inline void validate(const PGParams& params) {
  if (params.b < 1) throw InvalidArgument("PG shape b must be >= 1, got " + std::to_string(params.b));
  if (!std::isfinite(params.c)) throw InvalidArgument("PG tilt c must be finite");
}

} // namespace detail

// Draw PG(1, c).
template <typename Rng>
double sample_pg1(double c, Rng& rng) {
  return 0.25 * detail::sample_jstar(std::abs(c) * 0.5, rng);
}

// Draw PG(b, c) for integer b >= 1 as a sum of b independent PG(1, c) draws.
template <typename Rng>
double sample_pg(const PGParams& params, Rng& rng) {
  detail::validate(params);
  const detail::JStarProposal prop(std::abs(params.c) * 0.5);
  double sum = 0.0;
  for (int k = 0; k < params.b; ++k) sum += detail::sample_jstar(prop, rng);
  return 0.25 * sum;
}

// Overload for real-valued shape; rejects non-integers.
template <typename Rng>
double sample_pg(double b, double c, Rng& rng) {
  if (!(b >= 1.0) || std::floor(b) != b || b > 1e9)
    throw InvalidArgument("PG shape b must be a positive integer, got " + std::to_string(b));
  return sample_pg(PGParams{static_cast<int>(b), c}, rng);
}

// E[PG(b, c)] = b tanh(c/2) / (2c), limit b/4 at c = 0.
inline double mean(const PGParams& p) {
  const double c = std::abs(p.c);
  if (c < 1e-6) return p.b * (0.25 - c * c / 48.0);
  return p.b * std::tanh(c / 2.0) / (2.0 * c);
}

// Var[PG(b, c)] = b (sinh c - c) / (4 c^3 cosh^2(c/2)), limit b/24 at c = 0.
inline double variance(const PGParams& p) {
  const double c = std::abs(p.c);
  if (c < 1e-3) return p.b * (1.0 / 24.0 - c * c / 120.0);
  const double ch = std::cosh(c / 2.0);
  return p.b * (std::sinh(c) - c) / (4.0 * c * c * c * ch * ch);
}

// E[exp(-s z)] = cosh^b(c/2) / cosh^b(sqrt(c^2/4 + s/2)).
inline double laplace_transform(const PGParams& p, double s) {
  const double num = std::cosh(p.c / 2.0);
  const double den = std::cosh(std::sqrt(p.c * p.c / 4.0 + s / 2.0));
  return std::pow(num / den, p.b);
}

// Density of PG(1, c) at x > 0 by its alternating series, stopped once the
// bracket width (the next term) falls below tol.
inline double density_pg1(double x, double c, double tol = 1e-12) {
  if (x <= 0.0) return 0.0;
  const double pref = std::cosh(c / 2.0) * std::exp(-c * c * x / 2.0) /
                      std::sqrt(2.0 * std::numbers::pi * x * x * x);
  double sum = 0.0;
  for (int n = 0; n < 100000; ++n) {
    const double m = 2.0 * n + 1.0;
    const double term = m * std::exp(-m * m / (8.0 * x));
    sum += (n % 2 == 0 ? term : -term);
    if (pref * term < tol && n > 0) break;
  }
  return pref * sum;
}

struct IdentityCheck {
  double lhs;
  double rhs_estimate;
};

// Monte Carlo check of
//   (e^x)^a / (1 + e^x)^b = 2^{-b} e^{(a - b/2) x} E[exp(-z x^2 / 2)], z ~ PG(b, 0).
template <typename Rng>
IdentityCheck pg_identity_check(double a, int b, double x, long n_samples, Rng& rng) {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  detail::validate({b, 0.0});
  const double lhs = std::exp(a * x - b * std::log1p(std::exp(x)));
  double acc = 0.0;
  for (long k = 0; k < n_samples; ++k) acc += std::exp(-sample_pg(PGParams{b, 0.0}, rng) * x * x / 2.0);
  const double rhs = std::pow(2.0, -b) * std::exp((a - b / 2.0) * x) * acc / static_cast<double>(n_samples);
  return {lhs, rhs};
}

} // namespace bttie::pg
