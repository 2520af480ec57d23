#pragma once

// Synthetic data generation and the efficiency / scalability / sensitivity
// studies comparing the Polya-Gamma Gibbs sampler with the MHRW baseline.

#include <bttie/csv.hpp>
#include <bttie/diagnostics.hpp>
#include <bttie/errors.hpp>
#include <bttie/gibbs.hpp>
#include <bttie/model.hpp>
#include <bttie/spatial_prior.hpp>
#include <bttie/summary.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace bttie::sim {

// ---------------------------------------------------------------- graphs

inline std::vector<std::string> numbered_labels(std::size_t n, const std::string& prefix = "w") {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k + 1));
  return out;
}

inline WardGraph path_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t k = 0; k + 1 < n; ++k) e.emplace_back(k, k + 1);
  return WardGraph::from_edges(numbered_labels(n), e);
}

inline WardGraph cycle_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t k = 0; k < n; ++k) e.emplace_back(k, (k + 1) % n);
  if (n == 2) e.pop_back();
  return WardGraph::from_edges(numbered_labels(n), e);
}

inline WardGraph star_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t k = 1; k < n; ++k) e.emplace_back(0, k);
  return WardGraph::from_edges(numbered_labels(n), e);
}

// Rook-adjacency lattice of `n` cells laid out row-major with `cols` columns
// (the last row may be partial).
inline WardGraph lattice_graph(std::size_t n, std::size_t cols, std::vector<std::string> labels = {}) {
  if (labels.empty()) labels = numbered_labels(n);
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t k = 0; k < n; ++k) {
    if ((k % cols) + 1 < cols && k + 1 < n) e.emplace_back(k, k + 1);
    if (k + cols < n) e.emplace_back(k, k + cols);
  }
  return WardGraph::from_edges(std::move(labels), e);
}

// A ward graph plus its region partition.
struct RegionalGraph {
  WardGraph graph;
  std::vector<std::string> regions; // region of each ward
};

// Stand-in for a 95-ward county: a 10-column planar lattice split row-major
// into four contiguous boroughs of 21, 21, 25 and 28 wards.
inline RegionalGraph surrogate_county_graph() {
  const std::vector<std::pair<std::string, std::size_t>> boroughs{
      {"A", 21}, {"B", 21}, {"C", 25}, {"D", 28}};
  std::vector<std::string> labels, regions;
  for (const auto& [name, size] : boroughs)
    for (std::size_t k = 1; k <= size; ++k) {
      labels.push_back(name + (k < 10 ? "0" : "") + std::to_string(k));
      regions.push_back(name);
    }
  return {lattice_graph(labels.size(), 10, labels), regions};
}

// ------------------------------------------------------------ simulation

enum class PriorSource { Graph, Wishart };

struct SimulationScenario {
  std::size_t n_wards = 16;
  std::size_t n_comparisons = 160; // default 10x wards
  double true_delta = 0.5;
  double alpha2 = 1.0;
  PriorSource prior = PriorSource::Graph;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_wards < 2) throw InvalidArgument("scenario needs at least 2 wards");
    if (n_comparisons < 1) throw InvalidArgument("scenario needs at least 1 comparison");
    if (!(true_delta >= 0.0)) throw InvalidArgument("true delta must be >= 0");
    if (!(alpha2 > 0.0)) throw InvalidArgument("alpha2 must be positive");
  }
};

// Uniformly random unordered pair of distinct wards among `n`.
template <typename Rng>
std::pair<std::size_t, std::size_t> uniform_pair(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<std::size_t> first(0, n - 1), second(0, n - 2);
  const auto i = first(rng);
  auto j = second(rng);
  if (j >= i) ++j;
  return {i, j};
}

// Simulates n_comparisons judgements over uniformly scheduled pairs, each a
// trinomial draw of (i higher, j higher, tie).
template <typename Rng>
ComparisonDataset simulate_comparisons(std::size_t n_comparisons, const QualityVector& lambda_true,
                                       double delta, Rng& rng) {
  const auto n = static_cast<std::size_t>(lambda_true.size());
  if (n < 2) throw InvalidArgument("simulation needs at least 2 wards");
  const TieParameter d(delta);
  ComparisonDataset data(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t c = 0; c < n_comparisons; ++c) {
    const auto [i, j] = uniform_pair(n, rng);
    const double p_i = win_probability(lambda_true, i, j, d);
    const double p_j = win_probability(lambda_true, j, i, d);
    const double u = unif(rng);
    if (u < p_i)
      data.add_win(i, j);
    else if (u < p_i + p_j)
      data.add_win(j, i);
    else
      data.add_tie(i, j);
  }
  return data;
}

template <typename Rng>
ComparisonDataset simulate_comparisons(const SimulationScenario& scenario, const QualityVector& lambda_true,
                                       Rng& rng) {
  scenario.validate();
  if (static_cast<std::size_t>(lambda_true.size()) != scenario.n_wards)
    throw DimensionMismatch("lambda_true length does not match scenario wards");
  return simulate_comparisons(scenario.n_comparisons, lambda_true, scenario.true_delta, rng);
}

// W ~ Wishart(I, df = n) by the Bartlett decomposition.
template <typename Rng>
Eigen::MatrixXd sample_wishart_identity(std::size_t n, double df, Rng& rng) {
  std::normal_distribution<double> norm(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::chi_squared_distribution<double> chi(df - static_cast<double>(i));
    a(i, i) = std::sqrt(chi(rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = norm(rng);
  }
  return a * a.transpose();
}

// Wishart(I, df = N) draw normalised to unit diagonal; redrawn if not PD.
template <typename Rng>
SpatialPrior simulate_prior_covariance_wishart(std::size_t n_wards, double alpha2, Rng& rng,
                                               int max_attempts = 20) {
  if (n_wards < 2) throw InvalidArgument("Wishart prior needs at least 2 wards");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Eigen::MatrixXd w = sample_wishart_identity(n_wards, static_cast<double>(n_wards), rng);
    if (!(w.diagonal().array() > 0.0).all()) continue;
    Eigen::MatrixXd k = normalise_to_correlation(w);
    try {
      return SpatialPrior(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_wards)), std::move(k), alpha2);
    } catch (const NotPositiveDefinite&) {
      continue;
    }
  }
  throw NotPositiveDefinite("no positive definite Wishart draw after " + std::to_string(max_attempts) +
                            " attempts");
}

// P(tie) between two wards of equal quality, tanh(delta / 2).
inline double equal_quality_tie_probability(double delta) {
  QualityVector zero = QualityVector::Zero(2);
  return tie_probability(zero, 0, 1, TieParameter(delta));
}

// delta giving the target tie probability at equal qualities, by bisection.
inline double calibrate_delta(double target_tie_fraction) {
  if (!(target_tie_fraction > 0.0 && target_tie_fraction < 1.0))
    throw InvalidArgument("target tie fraction must lie in (0, 1)");
  double lo = 0.0, hi = 1.0;
  while (equal_quality_tie_probability(hi) < target_tie_fraction) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (equal_quality_tie_probability(mid) < target_tie_fraction ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Expected tie share of uniformly scheduled comparisons given the qualities.
inline double expected_tie_fraction(const QualityVector& lambda_true, double delta) {
  const auto n = static_cast<std::size_t>(lambda_true.size());
  if (n < 2) throw InvalidArgument("tie fraction needs at least 2 wards");
  const TieParameter d(delta);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) total += tie_probability(lambda_true, i, j, d);
  return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

// delta whose expected tie share over uniformly scheduled pairs of these
// qualities matches the target. Spread-out qualities need a larger delta than
// the equal-quality calibration to reach the same share.
inline double calibrate_delta(double target_tie_fraction, const QualityVector& lambda_true) {
  if (!(target_tie_fraction > 0.0 && target_tie_fraction < 1.0))
    throw InvalidArgument("target tie fraction must lie in (0, 1)");
  double lo = 0.0, hi = 1.0;
  while (expected_tie_fraction(lambda_true, hi) < target_tie_fraction) hi *= 2.0;
  for (int it = 0; it < 100 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected_tie_fraction(lambda_true, mid) < target_tie_fraction ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------- reports

struct BenchRow {
  std::string scenario;
  int run = 0;
  std::string sampler; // "pg" or "mhrw"
  std::size_t n_wards = 0;
  std::size_t n_comparisons = 0;
  double true_delta = 0.0;
  double tie_fraction = 0.0;
  double fixed_alpha2 = 0.0; // 0 when alpha2 is learned
  long iterations = 0;
  double wall_seconds = 0.0;
  double ess_delta = 0.0;
  double ess_per_sec_delta = 0.0;
  double mean_ess_lambda = 0.0;
  double ess_per_sec_lambda = 0.0;
  double kendall_tau = 0.0;
  double coverage = 0.0;
  double mean_abs_error = 0.0;
  double delta_median = 0.0;
};

using BenchReport = std::vector<BenchRow>;

struct Recovery {
  double kendall_tau;
  double coverage;       // fraction of wards whose 95% interval covers the truth
  double mean_abs_error; // after removing the mean from both vectors
  std::vector<double> medians;
};

inline Recovery recovery_metrics(const PosteriorSamples& s, const QualityVector& truth) {
  const auto n = s.lambda_draws.cols();
  if (n != truth.size()) throw DimensionMismatch("truth length does not match posterior");
  std::vector<double> med(static_cast<std::size_t>(n)), col(s.n_retained());
  std::size_t covered = 0;
  for (Eigen::Index w = 0; w < n; ++w) {
    for (Eigen::Index r = 0; r < s.lambda_draws.rows(); ++r) col[static_cast<std::size_t>(r)] = s.lambda_draws(r, w);
    med[static_cast<std::size_t>(w)] = median_of(col);
    const double lo = quantile_of(col, 0.025), hi = quantile_of(col, 0.975);
    if (truth[w] >= lo && truth[w] <= hi) ++covered;
  }
  const std::vector<double> tv(truth.data(), truth.data() + n);
  const double mm = mean_of(med), mt = truth.mean();
  double mae = 0.0;
  for (Eigen::Index w = 0; w < n; ++w) mae += std::abs((med[static_cast<std::size_t>(w)] - mm) - (truth[w] - mt));
  return {kendall_tau(med, tv), static_cast<double>(covered) / static_cast<double>(n),
          mae / static_cast<double>(n), std::move(med)};
}

inline double mean_lambda_ess(const PosteriorSamples& s) {
  std::vector<double> col(s.n_retained());
  double total = 0.0;
  for (Eigen::Index w = 0; w < s.lambda_draws.cols(); ++w) {
    for (Eigen::Index r = 0; r < s.lambda_draws.rows(); ++r) col[static_cast<std::size_t>(r)] = s.lambda_draws(r, w);
    total += effective_sample_size(col);
  }
  return total / static_cast<double>(s.lambda_draws.cols());
}

inline BenchRow make_row(const std::string& scenario, int run, const std::string& sampler,
                         const ComparisonDataset& data, double true_delta, const PosteriorSamples& s,
                         const QualityVector& truth, long iterations) {
  BenchRow row;
  row.scenario = scenario;
  row.run = run;
  row.sampler = sampler;
  row.n_wards = data.n_wards();
  row.n_comparisons = static_cast<std::size_t>(data.total_comparisons());
  row.true_delta = true_delta;
  row.tie_fraction = data.tie_fraction();
  row.iterations = iterations;
  row.wall_seconds = std::max(s.elapsed_seconds, 1e-9);
  row.ess_delta = effective_sample_size(s.delta_draws);
  row.ess_per_sec_delta = row.ess_delta / row.wall_seconds;
  row.mean_ess_lambda = mean_lambda_ess(s);
  row.ess_per_sec_lambda = row.mean_ess_lambda / row.wall_seconds;
  const auto rec = recovery_metrics(s, truth);
  row.kendall_tau = rec.kendall_tau;
  row.coverage = rec.coverage;
  row.mean_abs_error = rec.mean_abs_error;
  row.delta_median = median_of(s.delta_draws);
  return row;
}

inline void write_report_csv(std::ostream& os, const BenchReport& report) {
  os << "scenario,run,sampler,n_wards,n_comparisons,true_delta,tie_fraction,fixed_alpha2,iterations,"
        "wall_seconds,ess_delta,ess_per_sec_delta,mean_ess_lambda,ess_per_sec_lambda,kendall_tau,"
        "coverage,mean_abs_error,delta_median\n";
  for (const auto& r : report)
    os << csv::escape(r.scenario) << ',' << r.run << ',' << r.sampler << ',' << r.n_wards << ','
       << r.n_comparisons << ',' << r.true_delta << ',' << r.tie_fraction << ',' << r.fixed_alpha2 << ','
       << r.iterations << ',' << r.wall_seconds << ',' << r.ess_delta << ',' << r.ess_per_sec_delta << ','
       << r.mean_ess_lambda << ',' << r.ess_per_sec_lambda << ',' << r.kendall_tau << ',' << r.coverage
       << ',' << r.mean_abs_error << ',' << r.delta_median << '\n';
}

// ---------------------------------------------------------------- studies

using Progress = std::function<void(const BenchRow&)>;

struct EfficiencyConfig {
  int replicates = 25;
  std::size_t n_comparisons = 800;
  double alpha2 = 1.0;
  long gibbs_iterations = 5000;
  long gibbs_burn_in = 100;
  long mhrw_iterations = 100000;
  long mhrw_burn_in = 1000;
  std::uint64_t seed = 2024;
  std::optional<WardGraph> graph; // surrogate county graph when empty
};

// Per replicate: delta ~ U[0, 1], lambda ~ prior, simulate, fit both samplers.
inline BenchReport run_efficiency_study(const EfficiencyConfig& cfg, const Progress& progress = {}) {
  const WardGraph graph = cfg.graph ? *cfg.graph : surrogate_county_graph().graph;
  const SpatialPrior prior = build_spatial_covariance(graph, cfg.alpha2);
  BenchReport report;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    Rng rng(cfg.seed + 7919ULL * static_cast<std::uint64_t>(rep));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double delta = unif(rng);
    const QualityVector truth = prior.sample(cfg.alpha2, rng);
    const auto data = simulate_comparisons(cfg.n_comparisons, truth, delta, rng);

    SamplerConfig gc;
    gc.n_iterations = cfg.gibbs_iterations;
    gc.burn_in = cfg.gibbs_burn_in;
    gc.seed = cfg.seed + 31ULL * static_cast<std::uint64_t>(rep) + 1;
    const auto pg = run_gibbs(data, prior, gc);
    report.push_back(make_row("efficiency", rep, "pg", data, delta, pg, truth, gc.n_iterations));
    if (progress) progress(report.back());

    SamplerConfig mc = gc;
    mc.n_iterations = cfg.mhrw_iterations;
    mc.burn_in = cfg.mhrw_burn_in;
    const auto mh = run_mhrw_baseline(data, prior, mc);
    report.push_back(make_row("efficiency", rep, "mhrw", data, delta, mh, truth, mc.n_iterations));
    if (progress) progress(report.back());
  }
  return report;
}

struct ScalabilityConfig {
  std::vector<std::size_t> sizes{16, 32, 64, 128, 256, 512, 1024};
  int runs_per_size = 10;
  double delta = 0.5;
  double alpha2 = 1.0;
  long gibbs_iterations = 5000;
  long gibbs_burn_in = 100;
  bool include_mhrw = true;
  std::size_t mhrw_max_wards = 512; // MHRW skipped above this size
  long mhrw_iterations = 100000;
  long mhrw_burn_in = 1000;
  std::uint64_t seed = 4048;
};

// Wishart-simulated prior, lambda from that prior, 10 comparisons per ward.
inline BenchReport run_scalability_study(const ScalabilityConfig& cfg, const Progress& progress = {}) {
  BenchReport report;
  for (auto n : cfg.sizes) {
    for (int run = 0; run < cfg.runs_per_size; ++run) {
      Rng rng(cfg.seed + 1000003ULL * n + static_cast<std::uint64_t>(run));
      const SpatialPrior prior = simulate_prior_covariance_wishart(n, cfg.alpha2, rng);
      const QualityVector truth = prior.sample(cfg.alpha2, rng);
      const auto data = simulate_comparisons(10 * n, truth, cfg.delta, rng);
      const std::string name = "scalability-" + std::to_string(n);

      SamplerConfig gc;
      gc.n_iterations = cfg.gibbs_iterations;
      gc.burn_in = cfg.gibbs_burn_in;
      gc.seed = cfg.seed + static_cast<std::uint64_t>(run) + 17;
      const auto pg = run_gibbs(data, prior, gc);
      report.push_back(make_row(name, run, "pg", data, cfg.delta, pg, truth, gc.n_iterations));
      if (progress) progress(report.back());

      if (cfg.include_mhrw && n <= cfg.mhrw_max_wards) {
        SamplerConfig mc = gc;
        mc.n_iterations = cfg.mhrw_iterations;
        mc.burn_in = cfg.mhrw_burn_in;
        const auto mh = run_mhrw_baseline(data, prior, mc);
        report.push_back(make_row(name, run, "mhrw", data, cfg.delta, mh, truth, mc.n_iterations));
        if (progress) progress(report.back());
      }
    }
  }
  return report;
}

struct SensitivityConfig {
  std::optional<WardGraph> graph; // surrogate county graph when empty
  std::size_t n_comparisons = 800;
  double alpha2 = 1.0;
  double delta = 0.5; // for the alpha2 family
  // Fixed alpha2 values; when empty they are taken from the learned fit:
  // its 97.5% quantile (weak), 2.5% quantile (strong) and a tenth of the
  // 2.5% quantile (very strong).
  std::vector<double> fixed_alpha2;
  std::vector<double> tie_fractions{0.05, 0.20, 0.50, 0.75};
  int runs = 1;
  long iterations = 5000;
  long burn_in = 100;
  std::uint64_t seed = 777;
};

// Family (a): learned vs fixed alpha2 on one dataset per run.
// Family (b): delta calibrated to each target tie fraction; the same truth
// and pair schedule seed is used across fractions within a run.
inline BenchReport run_sensitivity_study(const SensitivityConfig& cfg, const Progress& progress = {}) {
  const WardGraph graph = cfg.graph ? *cfg.graph : surrogate_county_graph().graph;
  const SpatialPrior prior = build_spatial_covariance(graph, cfg.alpha2);
  BenchReport report;
  for (int run = 0; run < cfg.runs; ++run) {
    const std::uint64_t base = cfg.seed + 104729ULL * static_cast<std::uint64_t>(run);
    Rng truth_rng(base);
    const QualityVector truth = prior.sample(cfg.alpha2, truth_rng);

    SamplerConfig sc;
    sc.n_iterations = cfg.iterations;
    sc.burn_in = cfg.burn_in;
    sc.seed = base + 1;

    {
      Rng data_rng(base + 2);
      const auto data = simulate_comparisons(cfg.n_comparisons, truth, cfg.delta, data_rng);
      const auto learned = run_gibbs(data, prior, sc);
      report.push_back(make_row("alpha2-learned", run, "pg", data, cfg.delta, learned, truth, sc.n_iterations));
      if (progress) progress(report.back());

      std::vector<double> levels = cfg.fixed_alpha2;
      if (levels.empty()) {
        const double lo = quantile_of(learned.alpha2_draws, 0.025);
        const double hi = quantile_of(learned.alpha2_draws, 0.975);
        levels = {hi, lo, lo / 10.0};
      }
      for (double a2 : levels) {
        SamplerConfig fc = sc;
        fc.learn_alpha2 = false;
        const auto fixed = run_gibbs(data, prior.with_alpha2(a2), fc);
        auto row = make_row("alpha2-fixed", run, "pg", data, cfg.delta, fixed, truth, fc.n_iterations);
        row.fixed_alpha2 = a2;
        report.push_back(row);
        if (progress) progress(report.back());
      }
    }

    for (double target : cfg.tie_fractions) {
      const double delta = calibrate_delta(target, truth);
      Rng data_rng(base + 3);
      const auto data = simulate_comparisons(cfg.n_comparisons, truth, delta, data_rng);
      const auto fit = run_gibbs(data, prior, sc);
      char name[48];
      std::snprintf(name, sizeof name, "ties-%.2f", target);
      report.push_back(make_row(name, run, "pg", data, delta, fit, truth, sc.n_iterations));
      if (progress) progress(report.back());
    }
  }
  return report;
}

// ------------------------------------------------------- scenario config

// `key = value` lines; '#' starts a comment. Recognised keys: wards,
// comparisons, delta, alpha2, prior (graph|wishart), iterations, burn_in,
// seeds (comma-separated). Unknown keys are kept for the caller.
struct ScenarioFile {
  SimulationScenario scenario;
  long iterations = 5000;
  long burn_in = 100;
  std::vector<std::uint64_t> seeds{1};
  std::map<std::string, std::string> extra;
};

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !(in >> std::ws).eof()) throw ParseError("bad value for '" + key + "': '" + value + "'");
  return out;
}

} // namespace detail

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::istringstream in(value);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = csv::trim(tok);
    if (!tok.empty()) out.push_back(detail::parse_number<T>(key, tok));
  }
  if (out.empty()) throw ParseError("empty list for '" + key + "'");
  return out;
}

inline ScenarioFile parse_scenario(std::istream& in) {
  ScenarioFile f;
  bool comparisons_set = false;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = csv::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = csv::trim(line.substr(0, eq));
    const std::string value = csv::trim(line.substr(eq + 1));
    if (key == "wards") {
      f.scenario.n_wards = detail::parse_number<std::size_t>(key, value);
    } else if (key == "comparisons") {
      f.scenario.n_comparisons = detail::parse_number<std::size_t>(key, value);
      comparisons_set = true;
    } else if (key == "delta") {
      f.scenario.true_delta = detail::parse_number<double>(key, value);
    } else if (key == "alpha2") {
      f.scenario.alpha2 = detail::parse_number<double>(key, value);
    } else if (key == "prior") {
      if (value == "graph")
        f.scenario.prior = PriorSource::Graph;
      else if (value == "wishart")
        f.scenario.prior = PriorSource::Wishart;
      else
        throw ParseError("prior must be graph or wishart, got '" + value + "'");
    } else if (key == "iterations") {
      f.iterations = detail::parse_number<long>(key, value);
    } else if (key == "burn_in") {
      f.burn_in = detail::parse_number<long>(key, value);
    } else if (key == "seeds") {
      f.seeds = parse_list<std::uint64_t>(key, value);
    } else {
      f.extra[key] = value;
    }
  }
  if (!comparisons_set) f.scenario.n_comparisons = 10 * f.scenario.n_wards;
  f.scenario.seed = f.seeds.front();
  f.scenario.validate();
  if (f.burn_in < 0 || f.burn_in >= f.iterations) throw ParseError("burn_in must be below iterations");
  return f;
}

namespace detail {

inline const std::string* extra_value(const ScenarioFile& f, const std::string& key) {
  auto it = f.extra.find(key);
  return it == f.extra.end() ? nullptr : &it->second;
}

} // namespace detail

// Study configs from a scenario file. Study-specific keys live in `extra`:
// replicates, runs, sizes, mhrw_iterations, mhrw_burn_in, mhrw_max_wards,
// tie_fractions, fixed_alpha2.
inline EfficiencyConfig efficiency_config(const ScenarioFile& f) {
  EfficiencyConfig c;
  c.n_comparisons = f.scenario.n_comparisons;
  c.alpha2 = f.scenario.alpha2;
  c.gibbs_iterations = f.iterations;
  c.gibbs_burn_in = f.burn_in;
  c.seed = f.seeds.front();
  if (auto v = detail::extra_value(f, "replicates")) c.replicates = detail::parse_number<int>("replicates", *v);
  if (auto v = detail::extra_value(f, "mhrw_iterations"))
    c.mhrw_iterations = detail::parse_number<long>("mhrw_iterations", *v);
  if (auto v = detail::extra_value(f, "mhrw_burn_in")) c.mhrw_burn_in = detail::parse_number<long>("mhrw_burn_in", *v);
  return c;
}

inline ScalabilityConfig scalability_config(const ScenarioFile& f) {
  ScalabilityConfig c;
  c.delta = f.scenario.true_delta;
  c.alpha2 = f.scenario.alpha2;
  c.gibbs_iterations = f.iterations;
  c.gibbs_burn_in = f.burn_in;
  c.seed = f.seeds.front();
  if (auto v = detail::extra_value(f, "sizes")) c.sizes = parse_list<std::size_t>("sizes", *v);
  if (auto v = detail::extra_value(f, "runs")) c.runs_per_size = detail::parse_number<int>("runs", *v);
  if (auto v = detail::extra_value(f, "mhrw_iterations"))
    c.mhrw_iterations = detail::parse_number<long>("mhrw_iterations", *v);
  if (auto v = detail::extra_value(f, "mhrw_burn_in")) c.mhrw_burn_in = detail::parse_number<long>("mhrw_burn_in", *v);
  if (auto v = detail::extra_value(f, "mhrw_max_wards"))
    c.mhrw_max_wards = detail::parse_number<std::size_t>("mhrw_max_wards", *v);
  if (auto v = detail::extra_value(f, "include_mhrw")) c.include_mhrw = (*v == "true" || *v == "1");
  return c;
}

inline SensitivityConfig sensitivity_config(const ScenarioFile& f) {
  SensitivityConfig c;
  c.n_comparisons = f.scenario.n_comparisons;
  c.alpha2 = f.scenario.alpha2;
  c.delta = f.scenario.true_delta;
  c.iterations = f.iterations;
  c.burn_in = f.burn_in;
  c.seed = f.seeds.front();
  if (auto v = detail::extra_value(f, "runs")) c.runs = detail::parse_number<int>("runs", *v);
  if (auto v = detail::extra_value(f, "tie_fractions")) c.tie_fractions = parse_list<double>("tie_fractions", *v);
  if (auto v = detail::extra_value(f, "fixed_alpha2")) c.fixed_alpha2 = parse_list<double>("fixed_alpha2", *v);
  return c;
}

} // namespace bttie::sim
