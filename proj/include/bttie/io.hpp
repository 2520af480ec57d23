#pragma once

// File formats: comparison CSV, adjacency CSV, GeoJSON ward geometry and
// plain-text chains.

#include <bttie/csv.hpp>
#include <bttie/errors.hpp>
#include <bttie/model.hpp>
#include <bttie/spatial_prior.hpp>

#include <json.hpp>

#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bttie {

enum class Outcome { WardI, WardJ, Tie, Skip };

inline std::string_view to_string(Outcome o) {
  switch (o) {
  case Outcome::WardI: return "i";
  case Outcome::WardJ: return "j";
  case Outcome::Tie: return "tie";
  case Outcome::Skip: return "skip";
  }
  return "?";
}

inline Outcome parse_outcome(std::string_view s) {
  if (s == "i") return Outcome::WardI;
  if (s == "j") return Outcome::WardJ;
  if (s == "tie") return Outcome::Tie;
  if (s == "skip") return Outcome::Skip;
  throw ParseError("outcome must be one of i, j, tie, skip; got '" + std::string(s) + "'");
}

// One row of the comparison CSV.
struct ComparisonRecord {
  std::string judge_id;
  std::string ward_i;
  std::string ward_j;
  Outcome outcome;
  std::string timestamp;
};

inline const std::vector<std::string>& comparison_csv_header() {
  static const std::vector<std::string> h{"judge_id", "ward_i", "ward_j", "outcome", "timestamp"};
  return h;
}

inline std::vector<ComparisonRecord> read_comparison_csv(std::istream& in) {
  std::vector<ComparisonRecord> out;
  for (auto& row : csv::read_table(in, comparison_csv_header()))
    out.push_back({row[0], row[1], row[2], parse_outcome(row[3]), row[4]});
  return out;
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRecord>& records) {
  os << "judge_id,ward_i,ward_j,outcome,timestamp\n";
  for (const auto& r : records)
    os << csv::escape(r.judge_id) << ',' << csv::escape(r.ward_i) << ',' << csv::escape(r.ward_j) << ','
       << to_string(r.outcome) << ',' << csv::escape(r.timestamp) << '\n';
}

// Folds records into counts. Wards resolve through the graph's label table.
inline ComparisonDataset aggregate(const std::vector<ComparisonRecord>& records, const WardGraph& graph) {
  ComparisonDataset data(graph.n_wards());
  for (const auto& r : records) {
    const auto i = graph.require_index(r.ward_i);
    const auto j = graph.require_index(r.ward_j);
    if (i == j) throw InvalidPair("ward '" + r.ward_i + "' compared with itself");
    switch (r.outcome) {
    case Outcome::WardI: data.add_win(i, j); break;
    case Outcome::WardJ: data.add_win(j, i); break;
    case Outcome::Tie: data.add_tie(i, j); break;
    case Outcome::Skip: data.add_skip(); break;
    }
  }
  return data;
}

// Expands counts back into one record per win or tie event, ties listed
// once per unordered pair event. Skips carry no ward pair and are dropped.
inline std::vector<ComparisonRecord> disaggregate(const ComparisonDataset& data,
                                                  const std::vector<std::string>& labels,
                                                  const std::string& judge_id = "simulated") {
  if (labels.size() != data.n_wards()) throw DimensionMismatch("label count does not match dataset wards");
  std::vector<ComparisonRecord> out;
  const auto n = static_cast<Eigen::Index>(data.n_wards());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& li = labels[static_cast<std::size_t>(i)];
      const auto& lj = labels[static_cast<std::size_t>(j)];
      for (std::int64_t k = 0; k < data.wins()(i, j); ++k) out.push_back({judge_id, li, lj, Outcome::WardI, ""});
      if (i < j)
        for (std::int64_t k = 0; k < data.ties()(i, j); ++k) out.push_back({judge_id, li, lj, Outcome::Tie, ""});
    }
  return out;
}

// Edge list with header `ward_a,ward_b`. A row with an empty ward_b declares
// an isolated ward. Labels are numbered in order of first appearance unless
// an explicit ward list is given.
inline WardGraph read_adjacency_csv(std::istream& in,
                                    std::optional<std::vector<std::string>> ward_labels = std::nullopt) {
  const auto rows = csv::read_table(in, {"ward_a", "ward_b"});
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> index;
  const bool fixed = ward_labels.has_value();
  if (fixed) {
    labels = std::move(*ward_labels);
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (!index.emplace(labels[k], k).second) throw InvalidArgument("duplicate ward label '" + labels[k] + "'");
  }
  auto lookup = [&](const std::string& label) -> std::size_t {
    if (label.empty()) throw ParseError("empty ward label in adjacency CSV");
    auto it = index.find(label);
    if (it != index.end()) return it->second;
    if (fixed) throw InvalidArgument("adjacency references unknown ward '" + label + "'");
    index.emplace(label, labels.size());
    labels.push_back(label);
    return labels.size() - 1;
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& row : rows) {
    const auto a = lookup(row[0]);
    if (row[1].empty()) continue;
    edges.emplace_back(a, lookup(row[1]));
  }
  return WardGraph::from_edges(std::move(labels), edges);
}

inline void write_adjacency_csv(std::ostream& os, const WardGraph& g) {
  os << "ward_a,ward_b\n";
  const auto& a = g.adjacency();
  std::vector<bool> has_edge(g.n_wards(), false);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0.0) {
        os << csv::escape(g.labels()[static_cast<std::size_t>(i)]) << ','
           << csv::escape(g.labels()[static_cast<std::size_t>(j)]) << '\n';
        has_edge[static_cast<std::size_t>(i)] = has_edge[static_cast<std::size_t>(j)] = true;
      }
  for (std::size_t k = 0; k < g.n_wards(); ++k)
    if (!has_edge[k]) os << csv::escape(g.labels()[k]) << ",\n";
}

// Attaches geometry from a GeoJSON FeatureCollection whose features carry a
// `name` property. Features naming unknown wards are ignored; returns how
// many wards received geometry.
inline std::size_t attach_geojson(WardGraph& graph, const nlohmann::json& collection) {
  if (!collection.is_object() || collection.value("type", "") != "FeatureCollection")
    throw ParseError("GeoJSON input must be a FeatureCollection");
  std::size_t attached = 0;
  for (const auto& f : collection.at("features")) {
    if (!f.contains("properties") || !f["properties"].contains("name")) continue;
    const auto name = f["properties"]["name"].get<std::string>();
    if (auto idx = graph.index_of(name); idx && f.contains("geometry")) {
      graph.set_geometry(*idx, f["geometry"].dump());
      ++attached;
    }
  }
  return attached;
}

// Whitespace-separated numbers, '#' comments allowed.
inline std::vector<double> read_chain(std::istream& in) {
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw ParseError("bad number '" + tok + "'");
      } catch (const std::logic_error&) {
        throw ParseError("bad number '" + tok + "' in chain file");
      }
    }
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open '" + path + "'");
  return in;
}

} // namespace bttie
