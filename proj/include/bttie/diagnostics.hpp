#pragma once

#include <bttie/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace bttie {

inline double mean_of(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Unbiased sample variance.
inline double variance_of(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

// Linear-interpolation quantile (type 7), p in [0, 1].
inline double quantile_of(std::span<const double> x, double p) {
  if (x.empty()) throw InvalidArgument("quantile of empty sample");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline double median_of(std::span<const double> x) { return quantile_of(x, 0.5); }

// Effective sample size n / (1 + 2 sum_k rho_k), truncated by Geyer's initial
// positive sequence: pair sums rho_{2m} + rho_{2m+1} are accumulated while
// positive. Clipped to [1, n]; a constant chain returns 1.
inline double effective_sample_size(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 10) throw InvalidArgument("effective_sample_size needs at least 10 draws");
  const double m = mean_of(chain);
  std::vector<double> c(n);
  for (std::size_t t = 0; t < n; ++t) c[t] = chain[t] - m;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += c[t] * c[t + lag];
    return s / static_cast<double>(n);
  };

  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) return 1.0;

  double tau = -1.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double pair = (autocov(lag) + autocov(lag + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(n) / tau;
  return std::clamp(ess, 1.0, static_cast<double>(n));
}

// Kendall's tau-b rank correlation.
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("kendall_tau needs equal-length inputs");
  const std::size_t n = x.size();
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  const double n0 = static_cast<double>(concordant + discordant);
  const double denom = std::sqrt((n0 + static_cast<double>(ties_x)) * (n0 + static_cast<double>(ties_y)));
  if (denom == 0.0) return 0.0;
  return static_cast<double>(concordant - discordant) / denom;
}

// Fraction of ward pairs ranked in opposite order by x and y.
inline double rank_disagreement(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("rank_disagreement needs equal-length inputs");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  long long discordant = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++total;
      if ((x[i] - x[j]) * (y[i] - y[j]) < 0.0) ++discordant;
    }
  return static_cast<double>(discordant) / static_cast<double>(total);
}

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("pearson_correlation needs equal-length inputs");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

} // namespace bttie
