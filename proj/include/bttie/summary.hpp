#pragma once

#include <bttie/csv.hpp>
#include <bttie/diagnostics.hpp>
#include <bttie/gibbs.hpp>
#include <bttie/model.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace bttie {

struct WardSummary {
  std::string label;
  double median = 0.0;
  double variance = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct IntervalSummary {
  double median = 0.0;
  double lower = 0.0; // 2.5%
  double upper = 0.0; // 97.5%
};

struct TieCurvePoint {
  double quality_difference;
  double tie_probability;
};

struct PosteriorSummary {
  std::vector<WardSummary> wards;
  IntervalSummary delta;
  IntervalSummary alpha2;
  std::vector<TieCurvePoint> tie_curve;
  double acceptance_rate_delta = 0.0;
  std::size_t n_draws = 0;
};

inline IntervalSummary summarise_interval(std::span<const double> draws) {
  return {median_of(draws), quantile_of(draws, 0.025), quantile_of(draws, 0.975)};
}

// P(tie) as a function of lambda_i - lambda_j at a fixed delta.
inline std::vector<TieCurvePoint> tie_probability_curve(double delta, double max_difference = 4.0,
                                                        int points = 81) {
  std::vector<TieCurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(points));
  QualityVector pair(2);
  for (int k = 0; k < points; ++k) {
    const double d = -max_difference + 2.0 * max_difference * k / (points - 1);
    pair << d, 0.0;
    curve.push_back({d, tie_probability(pair, 0, 1, TieParameter(delta))});
  }
  return curve;
}

inline PosteriorSummary summarise(const PosteriorSamples& samples, const std::vector<std::string>& labels) {
  if (static_cast<std::size_t>(samples.lambda_draws.cols()) != labels.size())
    throw DimensionMismatch("label count does not match posterior dimension");
  if (samples.n_retained() == 0) throw InvalidArgument("no retained draws to summarise");
  PosteriorSummary s;
  s.n_draws = samples.n_retained();
  std::vector<double> col(samples.n_retained());
  for (Eigen::Index w = 0; w < samples.lambda_draws.cols(); ++w) {
    for (Eigen::Index r = 0; r < samples.lambda_draws.rows(); ++r) col[static_cast<std::size_t>(r)] = samples.lambda_draws(r, w);
    s.wards.push_back({labels[static_cast<std::size_t>(w)], median_of(col), variance_of(col),
                       quantile_of(col, 0.025), quantile_of(col, 0.975)});
  }
  s.delta = summarise_interval(samples.delta_draws);
  s.alpha2 = summarise_interval(samples.alpha2_draws);
  s.tie_curve = tie_probability_curve(s.delta.median);
  s.acceptance_rate_delta = samples.acceptance_rate_delta;
  return s;
}

// "0.468 (95% CI (0.390, 0.552))"
inline std::string format_interval(const IntervalSummary& iv) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.3f (95%% CI (%.3f, %.3f))", iv.median, iv.lower, iv.upper);
  return buf;
}

inline nlohmann::json to_json(const PosteriorSummary& s) {
  nlohmann::json wards = nlohmann::json::array();
  for (const auto& w : s.wards)
    wards.push_back({{"ward", w.label}, {"median", w.median}, {"variance", w.variance},
                     {"q025", w.q025}, {"q975", w.q975}});
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : s.tie_curve)
    curve.push_back({{"quality_difference", p.quality_difference}, {"tie_probability", p.tie_probability}});
  return {{"wards", wards},
          {"delta", {{"median", s.delta.median}, {"q025", s.delta.lower}, {"q975", s.delta.upper},
                     {"text", format_interval(s.delta)}}},
          {"alpha2", {{"median", s.alpha2.median}, {"q025", s.alpha2.lower}, {"q975", s.alpha2.upper}}},
          {"tie_curve", curve},
          {"acceptance_rate_delta", s.acceptance_rate_delta},
          {"n_draws", s.n_draws}};
}

// One JSON record per retained iteration.
inline void write_posterior_ndjson(std::ostream& os, const PosteriorSamples& samples) {
  for (std::size_t r = 0; r < samples.n_retained(); ++r) {
    const auto row = samples.lambda_draws.row(static_cast<Eigen::Index>(r));
    nlohmann::json rec{{"iteration", samples.iterations[r]},
                       {"lambda", std::vector<double>(row.begin(), row.end())},
                       {"delta", samples.delta_draws[r]},
                       {"alpha2", samples.alpha2_draws[r]}};
    os << rec.dump() << '\n';
  }
}

// Per-ward CSV followed by commented delta / alpha2 lines.
inline void write_summary_csv(std::ostream& os, const PosteriorSummary& s) {
  os << "ward,median,variance,q025,q975\n";
  char buf[256];
  for (const auto& w : s.wards) {
    std::snprintf(buf, sizeof buf, ",%.6g,%.6g,%.6g,%.6g\n", w.median, w.variance, w.q025, w.q975);
    os << csv::escape(w.label) << buf;
  }
  os << "# delta: " << format_interval(s.delta) << '\n';
  os << "# alpha2: " << format_interval(s.alpha2) << '\n';
}

} // namespace bttie
