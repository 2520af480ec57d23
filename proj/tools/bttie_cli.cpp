// Command-line entry points: fit, simulate, bench, ess, serve.

#include <bttie/diagnostics.hpp>
#include <bttie/gibbs.hpp>
#include <bttie/io.hpp>
#include <bttie/service/http_api.hpp>
#include <bttie/service/study_service.hpp>
#include <bttie/simulation.hpp>
#include <bttie/summary.hpp>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace bttie;
namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

struct FitOptions {
  std::string data;
  std::string adjacency;
  std::string geojson;
  std::string posterior;
  std::string summary_csv;
  std::string summary_json;
  std::string sampler = "pg";
  SamplerConfig config;
  double alpha2 = 1.0;
};

int run_fit(const FitOptions& o) {
  auto adj_in = open_input(o.adjacency);
  WardGraph graph = read_adjacency_csv(adj_in);
  if (!o.geojson.empty()) {
    auto gj = open_input(o.geojson);
    attach_geojson(graph, nlohmann::json::parse(gj));
  }
  auto data_in = open_input(o.data);
  const auto data = aggregate(read_comparison_csv(data_in), graph);
  const auto prior = build_spatial_covariance(graph, o.alpha2, o.config.alpha2_prior);

  const auto samples = o.sampler == "mhrw" ? run_mhrw_baseline(data, prior, o.config) : run_gibbs(data, prior, o.config);
  const auto summary = summarise(samples, graph.labels());

  if (!o.posterior.empty()) {
    auto out = open_output(o.posterior);
    write_posterior_ndjson(out, samples);
  }
  if (!o.summary_json.empty()) {
    auto out = open_output(o.summary_json);
    out << to_json(summary).dump(2) << '\n';
  }
  if (!o.summary_csv.empty()) {
    auto out = open_output(o.summary_csv);
    write_summary_csv(out, summary);
  } else {
    write_summary_csv(std::cout, summary);
  }
  std::cerr << "wards " << graph.n_wards() << ", comparisons " << data.total_comparisons() << ", ties "
            << data.tie_events() << "\n"
            << "delta " << format_interval(summary.delta) << ", acceptance " << samples.acceptance_rate_delta
            << ", " << samples.elapsed_seconds << " s\n";
  return 0;
}

struct SimulateOptions {
  std::string config;
  std::string out_dir = "simulated";
  sim::SimulationScenario scenario;
  std::string prior = "graph";
};

int run_simulate(SimulateOptions o) {
  if (!o.config.empty()) {
    auto in = open_input(o.config);
    o.scenario = sim::parse_scenario(in).scenario;
  } else {
    o.scenario.prior = o.prior == "wishart" ? sim::PriorSource::Wishart : sim::PriorSource::Graph;
    o.scenario.validate();
  }
  const auto& sc = o.scenario;
  Rng rng(sc.seed);
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(sc.n_wards))));
  const WardGraph graph = sim::lattice_graph(sc.n_wards, cols);
  const SpatialPrior prior = sc.prior == sim::PriorSource::Graph
                                 ? build_spatial_covariance(graph, sc.alpha2)
                                 : sim::simulate_prior_covariance_wishart(sc.n_wards, sc.alpha2, rng);
  const QualityVector truth = prior.sample(sc.alpha2, rng);
  const auto data = sim::simulate_comparisons(sc, truth, rng);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  {
    auto out = open_output(dir / "comparisons.csv");
    write_comparison_csv(out, disaggregate(data, graph.labels()));
  }
  {
    auto out = open_output(dir / "adjacency.csv");
    write_adjacency_csv(out, sc.prior == sim::PriorSource::Graph ? graph : WardGraph(graph.labels()));
  }
  {
    auto out = open_output(dir / "truth.csv");
    out << "ward,lambda\n";
    for (std::size_t k = 0; k < sc.n_wards; ++k)
      out << graph.labels()[k] << ',' << truth(static_cast<Eigen::Index>(k)) << '\n';
    out << "# delta: " << sc.true_delta << '\n';
  }
  std::cerr << "wrote " << data.total_comparisons() << " comparisons (" << data.tie_events() << " ties) to "
            << dir.string() << '\n';
  return 0;
}

int run_bench(const std::string& kind, const std::string& config, const std::string& out_path) {
  sim::ScenarioFile file;
  if (!config.empty()) {
    auto in = open_input(config);
    file = sim::parse_scenario(in);
  }
  auto progress = [](const sim::BenchRow& r) {
    std::cerr << r.scenario << " run " << r.run << ' ' << r.sampler << ": " << r.wall_seconds
              << " s, ESS/s delta " << r.ess_per_sec_delta << ", ESS/s lambda " << r.ess_per_sec_lambda << '\n';
  };
  sim::BenchReport report;
  if (kind == "efficiency") {
    auto c = config.empty() ? sim::EfficiencyConfig{} : sim::efficiency_config(file);
    report = sim::run_efficiency_study(c, progress);
  } else if (kind == "scalability") {
    auto c = config.empty() ? sim::ScalabilityConfig{} : sim::scalability_config(file);
    report = sim::run_scalability_study(c, progress);
  } else if (kind == "sensitivity") {
    auto c = config.empty() ? sim::SensitivityConfig{} : sim::sensitivity_config(file);
    report = sim::run_sensitivity_study(c, progress);
  } else {
    throw InvalidArgument("unknown bench '" + kind + "'");
  }
  if (out_path.empty() || out_path == "-") {
    sim::write_report_csv(std::cout, report);
  } else {
    auto out = open_output(out_path);
    sim::write_report_csv(out, report);
  }
  return 0;
}

int run_ess(const std::string& chain_path) {
  std::vector<double> chain;
  if (chain_path == "-") {
    chain = read_chain(std::cin);
  } else {
    auto in = open_input(chain_path);
    chain = read_chain(in);
  }
  const double ess = effective_sample_size(chain);
  std::cout << "n " << chain.size() << "\nmean " << mean_of(chain) << "\ness " << ess << '\n';
  return 0;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

int run_serve(int port, std::string data_dir, std::uint64_t seed, const std::string& host) {
  if (const char* env = std::getenv("DATA_DIR"); env && *env) data_dir = env;
  if (const char* env = std::getenv("PORT"); env && *env) port = std::stoi(env);
  service::StudyService svc(service::ServiceOptions{data_dir, seed});
  httplib::Server server;
  service::install_routes(server, svc);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cerr << "serving on " << host << ':' << port << ", data in " << data_dir << '\n';
  if (!server.listen(host, port)) throw Error("cannot listen on port " + std::to_string(port));
  g_server = nullptr;
  svc.wait_for_fits();
  svc.compact_all();
  return 0;
}

void add_sampler_flags(CLI::App* cmd, SamplerConfig& c) {
  cmd->add_option("--iterations", c.n_iterations, "Total iterations")->capture_default_str();
  cmd->add_option("--burn-in", c.burn_in, "Discarded initial iterations")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--delta-rate", c.delta_prior_rate, "Rate of the exponential prior on delta")
      ->capture_default_str();
  cmd->add_option("--alpha2-shape", c.alpha2_prior.shape, "Inverse-gamma shape for alpha2")->capture_default_str();
  cmd->add_option("--alpha2-scale", c.alpha2_prior.scale, "Inverse-gamma scale for alpha2")->capture_default_str();
  cmd->add_option("--delta-updates", c.delta_updates, "Random-walk steps on delta per iteration")
      ->capture_default_str();
  cmd->add_flag("!--fixed-alpha2", c.learn_alpha2, "Hold alpha2 at --alpha2 instead of learning it");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian Bradley-Terry with ties: fitting, simulation, benchmarks and the study service"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a comparison dataset under the spatial prior");
  fit_cmd->add_option("--data", fit.data, "Comparison CSV (judge_id,ward_i,ward_j,outcome,timestamp)")
      ->required();
  fit_cmd->add_option("--adjacency", fit.adjacency, "Adjacency CSV (ward_a,ward_b)")->required();
  fit_cmd->add_option("--geojson", fit.geojson, "GeoJSON FeatureCollection with properties.name");
  fit_cmd->add_option("--posterior", fit.posterior, "Write retained draws as NDJSON");
  fit_cmd->add_option("--summary", fit.summary_csv, "Write per-ward summary CSV (stdout otherwise)");
  fit_cmd->add_option("--summary-json", fit.summary_json, "Write the full summary as JSON");
  fit_cmd->add_option("--sampler", fit.sampler, "pg or mhrw")
      ->check(CLI::IsMember({"pg", "mhrw"}))
      ->capture_default_str();
  fit_cmd->add_option("--alpha2", fit.alpha2, "Initial (or fixed) alpha2")->capture_default_str();
  add_sampler_flags(fit_cmd, fit.config);

  SimulateOptions simo;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a synthetic comparison dataset");
  sim_cmd->add_option("--config", simo.config, "Scenario file (key = value lines)");
  sim_cmd->add_option("--out-dir", simo.out_dir, "Output directory")->capture_default_str();
  sim_cmd->add_option("--wards", simo.scenario.n_wards)->capture_default_str();
  sim_cmd->add_option("--comparisons", simo.scenario.n_comparisons)->capture_default_str();
  sim_cmd->add_option("--delta", simo.scenario.true_delta)->capture_default_str();
  sim_cmd->add_option("--alpha2", simo.scenario.alpha2)->capture_default_str();
  sim_cmd->add_option("--prior", simo.prior)->check(CLI::IsMember({"graph", "wishart"}))->capture_default_str();
  sim_cmd->add_option("--seed", simo.scenario.seed)->capture_default_str();

  std::string bench_kind, bench_config, bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Run the efficiency, scalability or sensitivity study");
  bench_cmd->add_option("kind", bench_kind)->required()->check(
      CLI::IsMember({"efficiency", "scalability", "sensitivity"}));
  bench_cmd->add_option("--config", bench_config, "Scenario file");
  bench_cmd->add_option("--out", bench_out, "Report CSV (stdout when omitted)");

  std::string chain_path;
  auto* ess_cmd = app.add_subcommand("ess", "Effective sample size of a chain file");
  ess_cmd->add_option("chain", chain_path, "Whitespace-separated draws, '-' for stdin")->required();

  int port = 8080;
  std::string data_dir = "data";
  std::uint64_t serve_seed = 1;
  std::string host = "0.0.0.0";
  auto* serve_cmd = app.add_subcommand("serve", "Host the study API (DATA_DIR and PORT override flags)");
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--data-dir", data_dir)->capture_default_str();
  serve_cmd->add_option("--seed", serve_seed, "Seed for pair scheduling")->capture_default_str();
  serve_cmd->add_option("--host", host)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) return run_simulate(simo);
    if (*bench_cmd) return run_bench(bench_kind, bench_config, bench_out);
    if (*ess_cmd) return run_ess(chain_path);
    if (*serve_cmd) return run_serve(port, data_dir, serve_seed, host);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
