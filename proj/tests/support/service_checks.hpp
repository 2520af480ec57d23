#pragma once

// Study service checks shared by the unit tests and the acceptance binary.

#include <bttie/service/study_service.hpp>
#include <bttie/simulation.hpp>

#include "oracles.hpp"

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace checks {

using namespace bttie;
namespace svc = bttie::service;

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bttie-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
};

// The surrogate county as a study definition, adjacency included.
inline svc::StudyDefinition county_definition(const std::string& name = "county") {
  const auto county = sim::surrogate_county_graph();
  svc::StudyDefinition d;
  d.name = name;
  const auto& labels = county.graph.labels();
  for (std::size_t k = 0; k < labels.size(); ++k) d.wards.push_back({labels[k], county.regions[k], std::nullopt});
  d.adjacency_provided = true;
  const auto& a = county.graph.adjacency();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0.0) d.adjacency.emplace_back(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]);
  return d;
}

// A small study whose wards sit in regions "r0" .. "r{k-1}" with the given sizes.
inline svc::StudyDefinition regional_definition(const std::vector<std::size_t>& sizes) {
  svc::StudyDefinition d;
  d.name = "regional";
  std::size_t n = 0;
  for (std::size_t r = 0; r < sizes.size(); ++r)
    for (std::size_t k = 0; k < sizes[r]; ++k) d.wards.push_back({"w" + std::to_string(n++), "r" + std::to_string(r), {}});
  return d;
}

inline std::string export_csv(const svc::StudyExport& e) {
  std::ostringstream os;
  write_comparison_csv(os, e.records);
  return os.str();
}

struct ReplayResult {
  bool identical_export = false;
  bool identical_counters = false;
  long events = 0;
  std::string detail;
};

// Records `n_events` random judgements from three judges (with periodic
// compaction every `snapshot_every` records), restarts the service on the
// same directory and compares exports and per-judge counters.
inline ReplayResult restart_replay(std::size_t n_events, long snapshot_every, std::uint64_t seed) {
  TempDir dir("replay");
  ReplayResult out;
  std::string before_csv;
  std::vector<long> before_counts;
  std::string study_id;
  std::vector<std::string> judges;
  {
    svc::StudyService s({dir.path(), seed, snapshot_every});
    study_id = s.create_study(county_definition(), "replay-token");
    judges = {s.register_judge(study_id, {"A"}), s.register_judge(study_id, {"B", "C"}),
              s.register_judge(study_id, {"A", "B", "C", "D"})};
    Rng rng(seed);
    std::uniform_int_distribution<int> outcome(0, 3), who(0, 2);
    const auto& wards = s.study(study_id).definition().wards;
    for (std::size_t k = 0; k < n_events; ++k) {
      const auto& j = judges[static_cast<std::size_t>(who(rng))];
      const auto [a, b] = s.next_pair(study_id, j, rng);
      s.record_judgement(study_id, j, wards[a].label, wards[b].label, static_cast<Outcome>(outcome(rng)),
                         k % 7 == 0 ? "key-" + std::to_string(k) : std::string{});
    }
    before_csv = export_csv(s.export_dataset(study_id));
    for (const auto& j : judges) before_counts.push_back(s.judge_json(study_id, j)["comparisons_made"].get<long>());
  }
  svc::StudyService s({dir.path(), seed + 1, snapshot_every});
  const auto after = s.export_dataset(study_id);
  out.events = after.totals.events;
  out.identical_export = export_csv(after) == before_csv;
  std::vector<long> after_counts;
  for (const auto& j : judges) after_counts.push_back(s.judge_json(study_id, j)["comparisons_made"].get<long>());
  out.identical_counters = after_counts == before_counts;
  if (!out.identical_export) out.detail = "export differs after restart";
  if (!out.identical_counters) out.detail += " judge counters differ after restart";
  return out;
}

struct UniformityResult {
  double p_value = 0.0;
  std::size_t categories = 0;
  double first_position_share = 0.0; // how often the lower index came first
};

// Chi-square test of next_pair over the C(m, 2) unordered pairs of a judge
// familiar with exactly `m` wards.
inline UniformityResult next_pair_uniformity(std::size_t m, std::size_t draws, std::uint64_t seed) {
  TempDir dir("uniform");
  svc::StudyService s({dir.path(), seed, 1000});
  const auto id = s.create_study(regional_definition({m, 7}));
  const auto judge = s.register_judge(id, {"r0"});
  std::vector<std::vector<long>> counts(m, std::vector<long>(m, 0));
  long lower_first = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    const auto [a, b] = s.next_pair(id, judge);
    if (a >= m || b >= m || a == b) return {0.0, 0, 0.0};
    ++counts[std::min(a, b)][std::max(a, b)];
    if (a < b) ++lower_first;
  }
  std::vector<long> flat;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) flat.push_back(counts[a][b]);
  const double statistic = oracle::chi_square_uniform(flat);
  return {oracle::chi_square_p_value(statistic, static_cast<double>(flat.size() - 1)), flat.size(),
          static_cast<double>(lower_first) / static_cast<double>(draws)};
}

// Tie percentage reported by the export of a study holding exactly `wins`
// decisive judgements, `ties` ties and `skips` skips.
inline double exported_tie_percentage(long wins, long ties, long skips = 0) {
  TempDir dir("shares");
  svc::StudyService s({dir.path(), 5, 100000});
  const auto id = s.create_study(regional_definition({6}));
  const auto judge = s.register_judge(id, {"r0"});
  const auto& wards = s.study(id).definition().wards;
  Rng rng(5);
  std::vector<Outcome> outcomes;
  outcomes.insert(outcomes.end(), static_cast<std::size_t>(wins), Outcome::WardI);
  outcomes.insert(outcomes.end(), static_cast<std::size_t>(ties), Outcome::Tie);
  outcomes.insert(outcomes.end(), static_cast<std::size_t>(skips), Outcome::Skip);
  std::shuffle(outcomes.begin(), outcomes.end(), rng);
  for (const auto o : outcomes) {
    const auto [a, b] = s.next_pair(id, judge, rng);
    s.record_judgement(id, judge, wards[a].label, wards[b].label, o);
  }
  return s.export_dataset(id).totals.tie_percentage;
}

} // namespace checks
