// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed
// below. Usage: acceptance [--only name[,name...]] [--strict]
//
// Without --strict the process exits 0 once every criterion has been
// evaluated, so the report itself is the deliverable; with --strict the exit
// code is the number of failed criteria.

#include <bttie/diagnostics.hpp>
#include <bttie/gibbs.hpp>
#include <bttie/model.hpp>
#include <bttie/polya_gamma.hpp>
#include <bttie/simulation.hpp>

#include "support/checks.hpp"
#include "support/oracles.hpp"
#include "support/service_checks.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace bttie;

namespace {

// ---- tolerances
constexpr double kNormalisationTol = 1e-12;
constexpr double kPgSigmas = 4.0;
constexpr double kPgRuntimeSeconds = 120.0;
constexpr double kKsAlpha = 0.01;
constexpr double kWrongSignP = 1e-6;
constexpr double kAgreementSigmas = 3.0;
constexpr double kRecoveryTau = 0.6;
constexpr double kRecoveryCoverage = 0.85;
constexpr double kRecoveryFitSeconds = 300.0;
constexpr int kEfficiencyWins = 8;
constexpr double kRankDisagreement = 0.05;
constexpr double kLargestScaleSeconds = 1800.0;
constexpr double kChiSquareAlpha = 0.01;
constexpr double kShareTol = 0.05; // percentage points, matching one printed decimal

struct Verdict {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

std::vector<double> medians(const PosteriorSamples& s) {
  std::vector<double> out;
  for (Eigen::Index w = 0; w < s.lambda_draws.cols(); ++w) out.push_back(median_of(column(s.lambda_draws, w)));
  return out;
}

// ---------------------------------------------------------------- criteria

Verdict normalisation() {
  Rng rng(20240601);
  std::uniform_real_distribution<double> lam(-10.0, 10.0), del(0.0, 5.0);
  double worst = 0.0;
  QualityVector v(2);
  for (int k = 0; k < 1000; ++k) {
    v << lam(rng), lam(rng);
    const TieParameter d(del(rng));
    const double total = win_probability(v, 0, 1, d) + win_probability(v, 1, 0, d) + tie_probability(v, 0, 1, d);
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {worst <= kNormalisationTol, fmt("max |sum - 1| = %.2e over 1000 triples (tol %.0e)", worst, kNormalisationTol)};
}

Verdict polya_gamma_moments() {
  const auto t0 = Clock::now();
  const std::size_t n = 1000000;
  double worst_z = 0.0, worst_lt = 0.0;
  Rng rng(606);
  std::vector<double> xs(n);
  for (int b : {1, 2, 5})
    for (double c : {0.0, 0.5, 2.0}) {
      const pg::PGParams p{b, c};
      double sum = 0.0, lt_sum = 0.0, lt_sq = 0.0;
      const double s = 1.0;
      for (auto& x : xs) {
        x = pg::sample_pg(p, rng);
        sum += x;
        const double e = std::exp(-s * x);
        lt_sum += e;
        lt_sq += e * e;
      }
      const double expected = c == 0.0 ? b / 4.0 : b * std::tanh(c / 2.0) / (2.0 * c);
      const double se = std::sqrt(pg::variance(p) / static_cast<double>(n));
      worst_z = std::max(worst_z, std::abs(sum / static_cast<double>(n) - expected) / se);
      // E exp(-s w) = [cosh(c/2) / cosh(sqrt(c^2/4 + s/2))]^b
      const double lt = std::pow(std::cosh(c / 2.0) / std::cosh(std::sqrt(c * c / 4.0 + s / 2.0)), b);
      const double lt_mean = lt_sum / static_cast<double>(n);
      const double lt_se = std::sqrt((lt_sq / static_cast<double>(n) - lt_mean * lt_mean) / static_cast<double>(n));
      worst_lt = std::max(worst_lt, std::abs(lt_mean - lt) / lt_se);
    }
  const double elapsed = seconds_since(t0);
  const bool pass = worst_z < kPgSigmas && worst_lt < kPgSigmas && elapsed < kPgRuntimeSeconds;
  return {pass, fmt("worst mean z = %.2f, worst Laplace z = %.2f (tol %.0f SE), %.1f s for 9 x 1e6 draws (limit %.0f s)",
                    worst_z, worst_lt, kPgSigmas, elapsed, kPgRuntimeSeconds)};
}

Verdict conditional_oracles() {
  const checks::LambdaGivenZInstance lz;
  const auto lam_z = checks::lambda_given_z_ks(lz, lz.delta, 20000, 41);
  const auto lam = checks::lambda_full_conditional_ks(checks::TwoWardInstance{}, 3000, 30, 1000);
  const auto delta = checks::delta_conditional_ks(checks::DeltaInstance{}, 4000, 150, 17);
  const double alpha2 = checks::alpha2_conditional_ks(50000, 21);
  const double lam_min = std::min({lam_z.p_first, lam_z.p_second, lam.p_lambda0, lam.p_lambda1, lam.p_difference});
  const bool pass = lam_min > kKsAlpha && delta.p_first > kKsAlpha && delta.p_second < kWrongSignP && alpha2 > kKsAlpha;
  return {pass, fmt("lambda min KS p = %.3f; delta KS p = %.3f (opposite prior sign p = %.1e, must be < %.0e); "
                    "alpha2 KS p = %.3f (alpha %.2f)",
                    lam_min, delta.p_first, delta.p_second, kWrongSignP, alpha2, kKsAlpha)};
}

Verdict cross_sampler() {
  const auto prior = build_spatial_covariance(sim::cycle_graph(4), 1.0);
  Rng rng(4004);
  const QualityVector truth = prior.sample(1.0, rng);
  const auto data = sim::simulate_comparisons(200, truth, 0.5, rng);
  SamplerConfig pg;
  pg.n_iterations = 30000;
  pg.burn_in = 1000;
  pg.seed = 11;
  SamplerConfig mh = pg;
  mh.n_iterations = 120000;
  mh.burn_in = 5000;
  mh.seed = 12;
  const auto a = checks::cross_sampler_agreement(data, prior, pg, mh);
  std::ostringstream zs;
  for (double z : a.z_scores) zs << fmt(" %.2f", z);
  return {a.worst < kAgreementSigmas,
          fmt("worst |diff| / combined MC se = %.2f over 6 lambda differences and delta (tol %.0f); z:%s",
              a.worst, kAgreementSigmas, zs.str().c_str())};
}

Verdict recovery() {
  const auto prior = build_spatial_covariance(sim::lattice_graph(64, 8), 1.0);
  double tau = 0.0, coverage = 0.0, slowest = 0.0;
  const int seeds = 10;
  for (int k = 0; k < seeds; ++k) {
    Rng rng(5000 + static_cast<std::uint64_t>(k));
    const QualityVector truth = prior.sample(1.0, rng);
    const auto data = sim::simulate_comparisons(640, truth, 0.5, rng);
    SamplerConfig cfg;
    cfg.seed = 6000 + static_cast<std::uint64_t>(k);
    const auto t0 = Clock::now();
    const auto s = run_gibbs(data, prior, cfg);
    slowest = std::max(slowest, seconds_since(t0));
    const auto r = sim::recovery_metrics(s, truth);
    tau += r.kendall_tau / seeds;
    coverage += r.coverage / seeds;
  }
  const bool pass = tau >= kRecoveryTau && coverage >= kRecoveryCoverage && slowest < kRecoveryFitSeconds;
  return {pass, fmt("mean tau = %.3f (>= %.2f), mean coverage = %.3f (>= %.2f), slowest fit %.1f s (< %.0f s)", tau,
                    kRecoveryTau, coverage, kRecoveryCoverage, slowest, kRecoveryFitSeconds)};
}

Verdict efficiency() {
  sim::EfficiencyConfig cfg;
  cfg.replicates = 10;
  const auto report = sim::run_efficiency_study(cfg);
  int delta_wins = 0, lambda_wins = 0;
  std::ostringstream ratios;
  for (std::size_t k = 0; k + 1 < report.size(); k += 2) {
    const auto& pg = report[k];
    const auto& mh = report[k + 1];
    if (pg.ess_per_sec_delta > mh.ess_per_sec_delta) ++delta_wins;
    if (pg.ess_per_sec_lambda > mh.ess_per_sec_lambda) ++lambda_wins;
    ratios << fmt(" %.2f/%.2f", pg.ess_per_sec_delta / mh.ess_per_sec_delta,
                  pg.ess_per_sec_lambda / mh.ess_per_sec_lambda);
  }
  const bool pass = delta_wins >= kEfficiencyWins && lambda_wins >= kEfficiencyWins;
  return {pass, fmt("PG ahead on delta ESS/s in %d/10, on mean-lambda ESS/s in %d/10 (need >= %d each); "
                    "ratios delta/lambda:%s",
                    delta_wins, lambda_wins, kEfficiencyWins, ratios.str().c_str())};
}

Verdict sensitivity() {
  const auto graph = sim::surrogate_county_graph().graph;
  const auto prior = build_spatial_covariance(graph, 1.0);
  const int runs = 5;
  double mae20 = 0.0, mae75 = 0.0, worst_disagreement = 0.0;
  int ordered = 0;
  for (int run = 0; run < runs; ++run) {
    const std::uint64_t base = 777 + 104729ULL * static_cast<std::uint64_t>(run);
    Rng truth_rng(base);
    const QualityVector truth = prior.sample(1.0, truth_rng);
    SamplerConfig sc;
    sc.seed = base + 1;

    double mae[2];
    const double fractions[2] = {0.20, 0.75};
    for (int f = 0; f < 2; ++f) {
      Rng data_rng(base + 3); // matched pair schedule across tie levels
      const auto data = sim::simulate_comparisons(800, truth, sim::calibrate_delta(fractions[f], truth), data_rng);
      mae[f] = sim::recovery_metrics(run_gibbs(data, prior, sc), truth).mean_abs_error;
    }
    mae20 += mae[0] / runs;
    mae75 += mae[1] / runs;
    if (mae[1] > mae[0]) ++ordered;

    Rng data_rng(base + 2);
    const auto data = sim::simulate_comparisons(800, truth, 0.5, data_rng);
    const auto learned = run_gibbs(data, prior, sc);
    const double weak = quantile_of(learned.alpha2_draws, 0.975);
    SamplerConfig fc = sc;
    fc.learn_alpha2 = false;
    const auto fixed = run_gibbs(data, prior.with_alpha2(weak), fc);
    worst_disagreement = std::max(worst_disagreement, rank_disagreement(medians(learned), medians(fixed)));
  }
  const bool pass = mae75 > mae20 && worst_disagreement < kRankDisagreement;
  return {pass, fmt("mean MAE 20%% ties = %.3f, 75%% ties = %.3f (75%% larger on %d/%d seeds); "
                    "worst rank disagreement weak fixed vs learned alpha2 = %.2f%% (< %.0f%%)",
                    mae20, mae75, ordered, runs, 100.0 * worst_disagreement, 100.0 * kRankDisagreement)};
}

Verdict scalability() {
  sim::ScalabilityConfig cfg;
  cfg.sizes = {16, 64, 256};
  cfg.runs_per_size = 3;
  cfg.include_mhrw = false;
  const auto report = sim::run_scalability_study(cfg);
  std::vector<double> med;
  for (auto n : cfg.sizes) {
    std::vector<double> t;
    for (const auto& r : report)
      if (r.n_wards == n) t.push_back(r.wall_seconds);
    med.push_back(median_of(t));
  }
  const bool monotone = std::is_sorted(med.begin(), med.end()) && med[0] < med[1] && med[1] < med[2];

  cfg.sizes = {1024};
  cfg.runs_per_size = 1;
  const auto big = sim::run_scalability_study(cfg);
  const double largest = big.front().wall_seconds;
  const bool pass = monotone && largest < kLargestScaleSeconds;
  return {pass, fmt("median wall s at N = 16/64/256: %.2f / %.2f / %.2f (monotone: %s); N = 1024: %.0f s (< %.0f s)",
                    med[0], med[1], med[2], monotone ? "yes" : "no", largest, kLargestScaleSeconds)};
}

Verdict service_checks() {
  const auto replay = checks::restart_replay(500, 64, 31);
  const auto uniform = checks::next_pair_uniformity(10, 100000, 32);
  const double share1 = checks::exported_tie_percentage(877 - 122, 122);
  const double share2 = checks::exported_tie_percentage(766 - 199, 199);
  const bool pass = replay.identical_export && replay.identical_counters && uniform.p_value > kChiSquareAlpha &&
                    uniform.categories == 45 && std::abs(share1 - 13.9) < kShareTol &&
                    std::abs(share2 - 26.0) < kShareTol;
  return {pass, fmt("restart replay of %ld events identical: %s; next_pair chi-square p = %.3f over 45 pairs "
                    "(alpha %.2f); tie shares %.2f%% and %.2f%%",
                    replay.events, replay.identical_export && replay.identical_counters ? "yes" : "no",
                    uniform.p_value, kChiSquareAlpha, share1, share2)};
}

struct Criterion {
  std::string name;
  std::function<Verdict()> run;
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria report"};
  std::vector<std::string> only;
  bool strict = false;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_flag("--strict", strict, "Exit with the number of failed criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"outcome-normalisation", normalisation},
      {"polya-gamma-moments", polya_gamma_moments},
      {"conditional-oracles", conditional_oracles},
      {"cross-sampler-agreement", cross_sampler},
      {"parameter-recovery", recovery},
      {"efficiency-ordering", efficiency},
      {"sensitivity-direction", sensitivity},
      {"scalability-shape", scalability},
      {"service-durability-uniformity", service_checks},
  };
  const std::set<std::string> wanted(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.name)) continue;
    const auto t0 = Clock::now();
    Verdict o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return strict ? failed : 0;
}
