#pragma once

// Comparative-judgement studies: ward setup, judge registration with
// familiarity subsets, uniform pair scheduling, judgement recording, export
// and background fits. State is event-sourced from an append-only log per
// study, compacted into a snapshot every `snapshot_every` records.

#include <bttie/errors.hpp>
#include <bttie/gibbs.hpp>
#include <bttie/io.hpp>
#include <bttie/model.hpp>
#include <bttie/service/event_log.hpp>
#include <bttie/simulation.hpp>
#include <bttie/spatial_prior.hpp>
#include <bttie/summary.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bttie::service {

using nlohmann::json;

struct WardEntry {
  std::string label;
  std::string region;
  std::optional<json> geometry;
};

struct StudyDefinition {
  std::string name;
  std::vector<WardEntry> wards;
  int target_comparisons = 30;
  std::vector<std::pair<std::string, std::string>> adjacency; // edges by label
  bool adjacency_provided = false; // an explicit, possibly empty, edge list

  static StudyDefinition from_json(const json& j) {
    StudyDefinition d;
    d.name = j.value("name", "");
    d.target_comparisons = j.value("target_comparisons", 30);
    if (!j.contains("wards") || !j["wards"].is_array()) throw ValidationError("study needs a 'wards' array");
    for (const auto& w : j["wards"]) {
      WardEntry e;
      if (w.is_string()) {
        e.label = w.get<std::string>();
        e.region = "default";
      } else {
        e.label = w.at("label").get<std::string>();
        e.region = w.value("region", "default");
        if (w.contains("geometry") && !w["geometry"].is_null()) e.geometry = w["geometry"];
      }
      d.wards.push_back(std::move(e));
    }
    d.adjacency_provided = j.contains("adjacency") && !j["adjacency"].is_null();
    if (d.adjacency_provided)
      for (const auto& edge : j["adjacency"]) {
        if (!edge.is_array() || edge.size() != 2) throw ValidationError("adjacency edges are [ward_a, ward_b]");
        d.adjacency.emplace_back(edge[0].get<std::string>(), edge[1].get<std::string>());
      }
    d.validate();
    return d;
  }

  json to_json() const {
    json wards = json::array();
    for (const auto& w : this->wards) {
      json e{{"label", w.label}, {"region", w.region}};
      if (w.geometry) e["geometry"] = *w.geometry;
      wards.push_back(std::move(e));
    }
    json adj = json::array();
    for (const auto& [a, b] : adjacency) adj.push_back({a, b});
    json out{{"name", name}, {"wards", wards}, {"target_comparisons", target_comparisons}};
    if (adjacency_provided) out["adjacency"] = adj;
    return out;
  }

  void validate() const {
    if (wards.empty()) throw ValidationError("ward table is empty");
    if (target_comparisons < 1) throw ValidationError("target_comparisons must be >= 1");
    std::set<std::string> seen;
    for (const auto& w : wards) {
      if (w.label.empty()) throw ValidationError("ward label must be non-empty");
      if (w.region.empty()) throw ValidationError("ward '" + w.label + "' has no region");
      if (!seen.insert(w.label).second) throw ValidationError("duplicate ward label '" + w.label + "'");
    }
    for (const auto& [a, b] : adjacency) {
      if (!seen.count(a) || !seen.count(b)) throw ValidationError("adjacency names an unknown ward");
      if (a == b) throw ValidationError("adjacency self-loop on '" + a + "'");
    }
  }
};

struct Judge {
  std::string id;
  std::set<std::string> familiar_regions;
  std::vector<std::size_t> familiar_wards; // sorted ward indices
  long comparisons_made = 0;
};

struct JudgementEvent {
  long sequence = 0;
  std::string judge_id;
  std::size_t ward_i = 0;
  std::size_t ward_j = 0;
  Outcome outcome = Outcome::Skip;
  std::string timestamp;
};

struct Acknowledgement {
  long sequence;
  long comparisons_made;
  bool duplicate; // idempotency key already seen
};

struct ExportTotals {
  long events = 0;
  long wins = 0;
  long ties = 0;
  long skips = 0;
  double tie_percentage = 0.0; // ties / (wins + ties) * 100
};

struct StudyExport {
  ComparisonDataset dataset;
  std::vector<ComparisonRecord> records;
  ExportTotals totals;
};

enum class FitStatus { Running, Completed, Failed };

inline std::string to_string(FitStatus s) {
  switch (s) {
  case FitStatus::Running: return "running";
  case FitStatus::Completed: return "completed";
  case FitStatus::Failed: return "failed";
  }
  return "unknown";
}

struct FitRecord {
  std::string id;
  FitStatus status = FitStatus::Running;
  SamplerConfig config;
  json summary;
  std::string error;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string random_token(std::size_t bytes = 16) {
  static thread_local std::random_device rd;
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (std::size_t k = 0; k < bytes; ++k) {
    const auto v = rd() & 0xffU;
    out += hex[v >> 4];
    out += hex[v & 0xf];
  }
  return out;
}

// Totals computed by folding the event list.
inline ExportTotals compute_totals(const std::vector<JudgementEvent>& events) {
  ExportTotals t;
  for (const auto& e : events) {
    ++t.events;
    switch (e.outcome) {
    case Outcome::WardI:
    case Outcome::WardJ: ++t.wins; break;
    case Outcome::Tie: ++t.ties; break;
    case Outcome::Skip: ++t.skips; break;
    }
  }
  const long informative = t.wins + t.ties;
  t.tie_percentage = informative == 0 ? 0.0 : 100.0 * static_cast<double>(t.ties) / static_cast<double>(informative);
  return t;
}

SamplerConfig sampler_config_from_json(const json& j);

// One study's state and its log. All mutation goes through the study's
// writer lock; readers take it shared.
class Study {
public:
  Study(std::string id, StudyDefinition def, std::string client_token)
      : id_(std::move(id)), def_(std::move(def)), client_token_(std::move(client_token)) {
    for (std::size_t k = 0; k < def_.wards.size(); ++k) {
      index_[def_.wards[k].label] = k;
      regions_.insert(def_.wards[k].region);
    }
  }

  const std::string& id() const noexcept { return id_; }
  const StudyDefinition& definition() const noexcept { return def_; }
  const std::string& client_token() const noexcept { return client_token_; }
  std::size_t n_wards() const noexcept { return def_.wards.size(); }

  std::optional<std::size_t> ward_index(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  WardGraph graph() const {
    std::vector<std::string> labels;
    for (const auto& w : def_.wards) labels.push_back(w.label);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& [a, b] : def_.adjacency) edges.emplace_back(index_.at(a), index_.at(b));
    WardGraph g = WardGraph::from_edges(labels, edges);
    for (std::size_t k = 0; k < def_.wards.size(); ++k)
      if (def_.wards[k].geometry) g.set_geometry(k, def_.wards[k].geometry->dump());
    return g;
  }

  // ---- state transitions (caller holds the writer lock)

  Judge& apply_judge(const std::string& judge_id, const std::vector<std::string>& regions) {
    if (regions.empty()) throw ValidationError("familiar_regions must be non-empty");
    Judge j;
    j.id = judge_id;
    for (const auto& r : regions) {
      if (!regions_.count(r)) throw ValidationError("unknown region '" + r + "'");
      j.familiar_regions.insert(r);
    }
    for (std::size_t k = 0; k < def_.wards.size(); ++k)
      if (j.familiar_regions.count(def_.wards[k].region)) j.familiar_wards.push_back(k);
    return judges_[judge_id] = std::move(j);
  }

  void check_judgement(const Judge& judge, std::size_t i, std::size_t j) const {
    if (i == j) throw ValidationError("a ward cannot be compared with itself");
    auto familiar = [&](std::size_t w) {
      return std::binary_search(judge.familiar_wards.begin(), judge.familiar_wards.end(), w);
    };
    if (!familiar(i) || !familiar(j)) throw ValidationError("ward outside the judge's familiar regions");
  }

  void apply_judgement(JudgementEvent e) {
    auto& judge = judges_.at(e.judge_id);
    ++judge.comparisons_made;
    events_.push_back(std::move(e));
  }

  Judge& judge(const std::string& judge_id) {
    auto it = judges_.find(judge_id);
    if (it == judges_.end()) throw NotFound("unknown judge '" + judge_id + "'");
    return it->second;
  }
  const Judge& judge(const std::string& judge_id) const {
    auto it = judges_.find(judge_id);
    if (it == judges_.end()) throw NotFound("unknown judge '" + judge_id + "'");
    return it->second;
  }

  const std::vector<JudgementEvent>& events() const noexcept { return events_; }
  const std::map<std::string, Judge>& judges() const noexcept { return judges_; }

  StudyExport export_dataset() const {
    StudyExport out{ComparisonDataset(n_wards()), {}, compute_totals(events_)};
    for (const auto& e : events_) {
      switch (e.outcome) {
      case Outcome::WardI: out.dataset.add_win(e.ward_i, e.ward_j); break;
      case Outcome::WardJ: out.dataset.add_win(e.ward_j, e.ward_i); break;
      case Outcome::Tie: out.dataset.add_tie(e.ward_i, e.ward_j); break;
      case Outcome::Skip: out.dataset.add_skip(); break;
      }
      out.records.push_back({e.judge_id, def_.wards[e.ward_i].label, def_.wards[e.ward_j].label, e.outcome,
                             e.timestamp});
    }
    return out;
  }

  // ---- persistence

  json snapshot_json() const {
    json judges = json::array();
    for (const auto& [id, j] : judges_)
      judges.push_back({{"judge_id", id}, {"familiar_regions", j.familiar_regions}});
    json events = json::array();
    for (const auto& e : events_) events.push_back(event_json(e));
    json keys = json::object();
    for (const auto& [k, v] : idempotency_) keys[k] = v;
    return {{"study_id", id_}, {"client_token", client_token_}, {"definition", def_.to_json()},
            {"sequence", sequence_}, {"judges", judges}, {"events", events}, {"idempotency", keys},
            {"fit_counter", fit_counter_}};
  }

  static json event_json(const JudgementEvent& e) {
    return {{"type", "judgement"}, {"seq", e.sequence}, {"judge_id", e.judge_id}, {"ward_i", e.ward_i},
            {"ward_j", e.ward_j}, {"outcome", std::string(to_string(e.outcome))}, {"timestamp", e.timestamp}};
  }

  // Replays one log record; records at or below the current sequence are
  // already reflected and skipped.
  void replay(const json& rec) {
    const long seq = rec.at("seq").get<long>();
    if (seq <= sequence_) return;
    const auto type = rec.at("type").get<std::string>();
    if (type == "judge") {
      apply_judge(rec.at("judge_id").get<std::string>(), rec.at("familiar_regions").get<std::vector<std::string>>());
    } else if (type == "judgement") {
      JudgementEvent e;
      e.sequence = seq;
      e.judge_id = rec.at("judge_id").get<std::string>();
      e.ward_i = rec.at("ward_i").get<std::size_t>();
      e.ward_j = rec.at("ward_j").get<std::size_t>();
      e.outcome = parse_outcome(rec.at("outcome").get<std::string>());
      e.timestamp = rec.value("timestamp", "");
      if (rec.contains("key")) idempotency_[rec["key"].get<std::string>()] = seq;
      apply_judgement(std::move(e));
    } else if (type == "fit") {
      fit_counter_ = std::max(fit_counter_, rec.at("fit_number").get<long>());
    }
    sequence_ = seq;
  }

  static std::unique_ptr<Study> from_snapshot(const json& snap) {
    auto s = std::make_unique<Study>(snap.at("study_id").get<std::string>(),
                                     StudyDefinition::from_json(snap.at("definition")),
                                     snap.value("client_token", ""));
    for (const auto& j : snap.at("judges"))
      s->apply_judge(j.at("judge_id").get<std::string>(), j.at("familiar_regions").get<std::vector<std::string>>());
    for (const auto& rec : snap.at("events")) s->replay(rec);
    for (const auto& [k, v] : snap.at("idempotency").items()) s->idempotency_[k] = v.get<long>();
    s->sequence_ = snap.at("sequence").get<long>();
    s->fit_counter_ = snap.value("fit_counter", 0L);
    return s;
  }

  long sequence() const noexcept { return sequence_; }
  long next_sequence() noexcept { return ++sequence_; }
  std::optional<long> idempotent_sequence(const std::string& key) const {
    auto it = idempotency_.find(key);
    if (it == idempotency_.end()) return std::nullopt;
    return it->second;
  }
  void remember_key(const std::string& key, long seq) { idempotency_[key] = seq; }
  long next_fit_number() noexcept { return ++fit_counter_; }

  mutable std::shared_mutex mutex;
  AppendLog log;
  long records_since_snapshot = 0;

  // Fit bookkeeping, guarded by fit_mutex.
  std::mutex fit_mutex;
  std::map<std::string, FitRecord> fits;
  std::optional<std::string> running_fit;
  std::string latest_fit;

private:
  std::string id_;
  StudyDefinition def_;
  std::string client_token_;
  std::unordered_map<std::string, std::size_t> index_;
  std::set<std::string> regions_;
  std::map<std::string, Judge> judges_;
  std::vector<JudgementEvent> events_;
  std::unordered_map<std::string, long> idempotency_;
  long sequence_ = 0;
  long fit_counter_ = 0;
};

struct ServiceOptions {
  fs::path data_dir = "data";
  std::uint64_t seed = 1;
  long snapshot_every = 1000;
};

class StudyService {
public:
  explicit StudyService(ServiceOptions opts) : opts_(std::move(opts)), rng_(opts_.seed) {
    fs::create_directories(opts_.data_dir);
    load_all();
  }
  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;
  ~StudyService() { wait_for_fits(); }

  // Idempotent on (client_token, identical definition).
  std::string create_study(const StudyDefinition& def, const std::string& client_token = {}) {
    def.validate();
    std::unique_lock lock(studies_mutex_);
    if (!client_token.empty()) {
      for (const auto& [id, s] : studies_)
        if (s->client_token() == client_token) {
          if (s->definition().to_json() == def.to_json()) return id;
          throw Conflict("client token already used for a different study definition");
        }
    }
    const std::string id = random_token(8);
    auto study = std::make_unique<Study>(id, def, client_token);
    const fs::path dir = opts_.data_dir / id;
    fs::create_directories(dir / "fits");
    AppendLog::write_atomic(dir / "snapshot.json", study->snapshot_json().dump());
    study->log = AppendLog(dir / "events.ndjson");
    studies_.emplace(id, std::move(study));
    return id;
  }

  Study& study(const std::string& id) const {
    std::shared_lock lock(studies_mutex_);
    auto it = studies_.find(id);
    if (it == studies_.end()) throw NotFound("unknown study '" + id + "'");
    return *it->second;
  }

  std::vector<std::string> study_ids() const {
    std::shared_lock lock(studies_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : studies_) out.push_back(id);
    return out;
  }

  std::string register_judge(const std::string& study_id, const std::vector<std::string>& familiar_regions) {
    auto& s = study(study_id);
    std::unique_lock lock(s.mutex);
    const std::string judge_id = random_token(16);
    const long seq = s.sequence() + 1;
    s.apply_judge(judge_id, familiar_regions); // validates before logging
    json rec{{"type", "judge"}, {"seq", seq}, {"judge_id", judge_id}, {"familiar_regions", familiar_regions}};
    s.log.append(rec.dump());
    s.next_sequence();
    after_write(s);
    return judge_id;
  }

  // Uniform over the C(m, 2) pairs of the judge's familiar wards; the
  // returned order is itself uniformly random.
  template <typename R>
  std::pair<std::size_t, std::size_t> next_pair(const std::string& study_id, const std::string& judge_id, R& rng) const {
    auto& s = study(study_id);
    std::shared_lock lock(s.mutex);
    const auto& judge = s.judge(judge_id);
    const auto m = judge.familiar_wards.size();
    if (m < 2) throw NoPairAvailable("judge is familiar with fewer than two wards");
    const auto [a, b] = sim::uniform_pair(m, rng);
    return {judge.familiar_wards[a], judge.familiar_wards[b]};
  }

  std::pair<std::size_t, std::size_t> next_pair(const std::string& study_id, const std::string& judge_id) {
    std::lock_guard lock(rng_mutex_);
    return next_pair(study_id, judge_id, rng_);
  }

  Acknowledgement record_judgement(const std::string& study_id, const std::string& judge_id,
                                   const std::string& ward_i, const std::string& ward_j, Outcome outcome,
                                   const std::string& idempotency_key = {}) {
    auto& s = study(study_id);
    std::unique_lock lock(s.mutex);
    auto& judge = s.judge(judge_id);
    if (!idempotency_key.empty())
      if (auto seq = s.idempotent_sequence(idempotency_key)) return {*seq, judge.comparisons_made, true};
    const auto i = s.ward_index(ward_i);
    const auto j = s.ward_index(ward_j);
    if (!i || !j) throw ValidationError("unknown ward in judgement");
    s.check_judgement(judge, *i, *j);

    JudgementEvent e{s.sequence() + 1, judge_id, *i, *j, outcome, utc_timestamp()};
    json rec = Study::event_json(e);
    if (!idempotency_key.empty()) rec["key"] = idempotency_key;
    s.log.append(rec.dump());
    s.next_sequence();
    if (!idempotency_key.empty()) s.remember_key(idempotency_key, e.sequence);
    const long seq = e.sequence;
    s.apply_judgement(std::move(e));
    after_write(s);
    return {seq, judge.comparisons_made, false};
  }

  StudyExport export_dataset(const std::string& study_id) const {
    auto& s = study(study_id);
    std::shared_lock lock(s.mutex);
    return s.export_dataset();
  }

  // Starts a background fit on a snapshot of the current data.
  std::string run_fit(const std::string& study_id, const SamplerConfig& config) {
    config.validate();
    auto& s = study(study_id);
    StudyExport snapshot;
    WardGraph graph;
    std::string fit_id;
    {
      std::unique_lock lock(s.mutex);
      snapshot = s.export_dataset();
      if (snapshot.dataset.total_comparisons() == 0) throw ValidationError("no informative judgements to fit");
      if (!s.definition().adjacency_provided)
        throw ValidationError("study has no adjacency; provide one to fit the spatial prior");
      graph = s.graph();
      std::lock_guard fl(s.fit_mutex);
      if (s.running_fit) throw Conflict("a fit is already running for this study");
      const long n = s.next_fit_number();
      fit_id = "fit-" + std::to_string(n);
      json rec{{"type", "fit"}, {"seq", s.sequence() + 1}, {"fit_number", n}};
      s.log.append(rec.dump());
      s.next_sequence();
      s.running_fit = fit_id;
      s.latest_fit = fit_id;
      s.fits[fit_id] = FitRecord{fit_id, FitStatus::Running, config, {}, {}};
    }
    const fs::path out = opts_.data_dir / s.id() / "fits" / (fit_id + ".json");
    std::lock_guard tl(threads_mutex_);
    threads_.emplace_back([&s, fit_id, config, graph = std::move(graph), data = std::move(snapshot.dataset), out]() {
      FitRecord result{fit_id, FitStatus::Running, config, {}, {}};
      try {
        const auto prior = build_spatial_covariance(graph, 1.0, config.alpha2_prior);
        const auto samples = run_gibbs(data, prior, config);
        result.summary = to_json(summarise(samples, graph.labels()));
        result.status = FitStatus::Completed;
      } catch (const std::exception& e) {
        result.status = FitStatus::Failed;
        result.error = e.what();
      }
      json rec{{"fit_id", fit_id}, {"status", to_string(result.status)}, {"summary", result.summary},
               {"error", result.error}, {"seed", config.seed}};
      try {
        AppendLog::write_atomic(out, rec.dump());
      } catch (...) {
      }
      std::lock_guard fl(s.fit_mutex);
      s.fits[fit_id] = std::move(result);
      s.running_fit.reset();
    });
    return fit_id;
  }

  // Status and summary of the latest (or named) fit.
  json results(const std::string& study_id, const std::string& fit_id = {}) {
    auto& s = study(study_id);
    std::lock_guard fl(s.fit_mutex);
    const std::string id = fit_id.empty() ? s.latest_fit : fit_id;
    if (id.empty()) throw NotFound("no fit has been run for this study");
    auto it = s.fits.find(id);
    if (it == s.fits.end()) throw NotFound("unknown fit '" + id + "'");
    json out{{"fit_id", id}, {"status", to_string(it->second.status)}};
    if (it->second.status == FitStatus::Completed) out["summary"] = it->second.summary;
    if (it->second.status == FitStatus::Failed) out["error"] = it->second.error;
    return out;
  }

  void wait_for_fits() {
    std::vector<std::thread> threads;
    {
      std::lock_guard tl(threads_mutex_);
      threads.swap(threads_);
    }
    for (auto& t : threads)
      if (t.joinable()) t.join();
  }

  json study_json(const std::string& study_id) const {
    auto& s = study(study_id);
    std::shared_lock lock(s.mutex);
    std::set<std::string> regions;
    for (const auto& w : s.definition().wards) regions.insert(w.region);
    return {{"study_id", s.id()},
            {"name", s.definition().name},
            {"status", "active"},
            {"n_wards", s.n_wards()},
            {"regions", regions},
            {"n_judges", s.judges().size()},
            {"n_events", s.events().size()},
            {"target_comparisons", s.definition().target_comparisons}};
  }

  json judge_json(const std::string& study_id, const std::string& judge_id) const {
    auto& s = study(study_id);
    std::shared_lock lock(s.mutex);
    const auto& j = s.judge(judge_id);
    return {{"judge_id", j.id},
            {"familiar_regions", j.familiar_regions},
            {"familiar_wards", j.familiar_wards.size()},
            {"comparisons_made", j.comparisons_made},
            {"target_comparisons", s.definition().target_comparisons}};
  }

  json wards_json(const std::string& study_id) const {
    auto& s = study(study_id);
    std::shared_lock lock(s.mutex);
    json wards = json::array();
    json features = json::array();
    for (const auto& w : s.definition().wards) {
      wards.push_back({{"label", w.label}, {"region", w.region}, {"has_geometry", w.geometry.has_value()}});
      if (w.geometry)
        features.push_back({{"type", "Feature"},
                            {"properties", {{"name", w.label}, {"region", w.region}}},
                            {"geometry", *w.geometry}});
    }
    return {{"wards", wards},
            {"target_comparisons", s.definition().target_comparisons},
            {"geojson", {{"type", "FeatureCollection"}, {"features", features}}}};
  }

  // Writes a snapshot of every study and truncates the logs.
  void compact_all() {
    for (const auto& id : study_ids()) {
      auto& s = study(id);
      std::unique_lock lock(s.mutex);
      compact(s);
    }
  }

  const ServiceOptions& options() const noexcept { return opts_; }

private:
  void after_write(Study& s) {
    if (++s.records_since_snapshot >= opts_.snapshot_every) compact(s);
  }

  // Snapshot first, then a fresh log; replay skips anything the snapshot
  // already covers, so a crash in between loses nothing.
  void compact(Study& s) {
    const fs::path dir = opts_.data_dir / s.id();
    AppendLog::write_atomic(dir / "snapshot.json", s.snapshot_json().dump());
    const fs::path log_path = dir / "events.ndjson";
    AppendLog::write_atomic(log_path, "");
    s.log = AppendLog(log_path);
    s.records_since_snapshot = 0;
  }

  void load_all() {
    for (const auto& entry : fs::directory_iterator(opts_.data_dir)) {
      if (!entry.is_directory()) continue;
      const fs::path snap_path = entry.path() / "snapshot.json";
      if (!fs::exists(snap_path)) continue;
      std::ifstream in(snap_path);
      auto study = Study::from_snapshot(json::parse(in));
      const fs::path log_path = entry.path() / "events.ndjson";
      for (const auto& line : AppendLog::read_lines(log_path)) study->replay(json::parse(line));
      study->log = AppendLog(log_path);
      load_fits(*study, entry.path() / "fits");
      const auto id = study->id();
      studies_.emplace(id, std::move(study));
    }
  }

  static void load_fits(Study& s, const fs::path& dir) {
    if (!fs::exists(dir)) return;
    long best = 0;
    for (const auto& f : fs::directory_iterator(dir)) {
      if (f.path().extension() != ".json") continue;
      std::ifstream in(f.path());
      const auto rec = json::parse(in, nullptr, false);
      if (rec.is_discarded()) continue;
      FitRecord r;
      r.id = rec.value("fit_id", "");
      r.status = rec.value("status", "") == "completed" ? FitStatus::Completed : FitStatus::Failed;
      r.summary = rec.value("summary", json());
      r.error = rec.value("error", "");
      const long n = std::stol(r.id.substr(r.id.find('-') + 1));
      if (n > best) {
        best = n;
        s.latest_fit = r.id;
      }
      s.fits[r.id] = std::move(r);
    }
  }

  ServiceOptions opts_;
  mutable std::shared_mutex studies_mutex_;
  std::map<std::string, std::unique_ptr<Study>> studies_;
  std::mutex rng_mutex_;
  Rng rng_;
  std::mutex threads_mutex_;
  std::vector<std::thread> threads_;
};

inline SamplerConfig sampler_config_from_json(const json& j) {
  SamplerConfig c;
  if (j.is_null()) return c;
  c.n_iterations = j.value("iterations", c.n_iterations);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.delta_prior_rate = j.value("delta_prior_rate", c.delta_prior_rate);
  c.alpha2_prior.shape = j.value("alpha2_shape", c.alpha2_prior.shape);
  c.alpha2_prior.scale = j.value("alpha2_scale", c.alpha2_prior.scale);
  c.learn_alpha2 = j.value("learn_alpha2", c.learn_alpha2);
  c.seed = j.value("seed", c.seed);
  c.delta_updates = j.value("delta_updates", c.delta_updates);
  if (j.contains("fixed_delta") && !j["fixed_delta"].is_null()) c.fixed_delta = j["fixed_delta"].get<double>();
  c.validate();
  return c;
}

} // namespace bttie::service
