#pragma once

// JSON-over-HTTP front end for StudyService.

#include <bttie/service/study_service.hpp>

#include <httplib.h>
#include <json.hpp>

#include <sstream>
#include <string>

namespace bttie::service {

inline int http_status_for(const std::exception& e) {
  if (dynamic_cast<const NotFound*>(&e)) return 404;
  if (dynamic_cast<const Conflict*>(&e)) return 409;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const InvalidArgument*>(&e) ||
      dynamic_cast<const ParseError*>(&e) || dynamic_cast<const nlohmann::json::exception*>(&e))
    return 400;
  return 500;
}

inline void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline json dataset_json(const StudyExport& ex, const std::vector<std::string>& labels) {
  const auto& d = ex.dataset;
  const auto n = static_cast<Eigen::Index>(d.n_wards());
  json wins = json::array(), ties = json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    json wr = json::array(), tr = json::array();
    for (Eigen::Index j = 0; j < n; ++j) {
      wr.push_back(d.wins()(i, j));
      tr.push_back(d.ties()(i, j));
    }
    wins.push_back(std::move(wr));
    ties.push_back(std::move(tr));
  }
  json events = json::array();
  for (const auto& r : ex.records)
    events.push_back({{"judge_id", r.judge_id}, {"ward_i", r.ward_i}, {"ward_j", r.ward_j},
                      {"outcome", std::string(to_string(r.outcome))}, {"timestamp", r.timestamp}});
  return {{"labels", labels},
          {"wins", wins},
          {"ties", ties},
          {"events", events},
          {"totals",
           {{"events", ex.totals.events},
            {"wins", ex.totals.wins},
            {"ties", ex.totals.ties},
            {"skips", ex.totals.skips},
            {"tie_percentage", ex.totals.tie_percentage}}}};
}

// Registers every route on `server`. The service must outlive the server.
inline void install_routes(httplib::Server& server, StudyService& svc) {
  auto guarded = [](auto handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const std::exception& e) {
        send_json(res, {{"error", e.what()}}, http_status_for(e));
      }
    };
  };
  auto body = [](const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
  };

  server.Post("/studies", guarded([&svc, body](const httplib::Request& req, httplib::Response& res) {
                const json j = body(req);
                const auto def = StudyDefinition::from_json(j);
                const auto id = svc.create_study(def, j.value("client_token", ""));
                send_json(res, svc.study_json(id), 201);
              }));

  server.Get(R"(/studies/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, svc.study_json(req.matches[1]));
             }));

  server.Post(R"(/studies/([^/]+)/judges)",
              guarded([&svc, body](const httplib::Request& req, httplib::Response& res) {
                const json j = body(req);
                if (!j.contains("familiar_regions") || !j["familiar_regions"].is_array())
                  throw ValidationError("familiar_regions must be an array of region names");
                const auto jid =
                    svc.register_judge(req.matches[1], j["familiar_regions"].get<std::vector<std::string>>());
                send_json(res, svc.judge_json(req.matches[1], jid), 201);
              }));

  server.Get(R"(/studies/([^/]+)/judges/([^/]+))",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, svc.judge_json(req.matches[1], req.matches[2]));
             }));

  server.Get(R"(/studies/([^/]+)/judges/([^/]+)/next-pair)",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string sid = req.matches[1], jid = req.matches[2];
               const auto [i, j] = svc.next_pair(sid, jid);
               const auto& s = svc.study(sid);
               const auto& wi = s.definition().wards[i];
               const auto& wj = s.definition().wards[j];
               auto card = [](const WardEntry& w) {
                 json c{{"label", w.label}, {"region", w.region}};
                 c["geometry"] = w.geometry ? *w.geometry : json(nullptr);
                 return c;
               };
               const auto judge = svc.judge_json(sid, jid);
               send_json(res, {{"ward_i", card(wi)},
                               {"ward_j", card(wj)},
                               {"comparisons_made", judge["comparisons_made"]},
                               {"target_comparisons", judge["target_comparisons"]}});
             }));

  server.Post(R"(/studies/([^/]+)/judges/([^/]+)/judgements)",
              guarded([&svc, body](const httplib::Request& req, httplib::Response& res) {
                const json j = body(req);
                const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
                std::string key = j.value("idempotency_key", "");
                if (key.empty() && req.has_header("Idempotency-Key")) key = req.get_header_value("Idempotency-Key");
                const auto ack = svc.record_judgement(req.matches[1], req.matches[2],
                                                      j.at("ward_i").get<std::string>(),
                                                      j.at("ward_j").get<std::string>(), outcome, key);
                send_json(res,
                          {{"sequence", ack.sequence},
                           {"comparisons_made", ack.comparisons_made},
                           {"duplicate", ack.duplicate}},
                          ack.duplicate ? 200 : 201);
              }));

  server.Get(R"(/studies/([^/]+)/export)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string sid = req.matches[1];
               const auto ex = svc.export_dataset(sid);
               const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
               if (format == "csv") {
                 std::ostringstream os;
                 write_comparison_csv(os, ex.records);
                 res.set_header("X-Tie-Percentage", std::to_string(ex.totals.tie_percentage));
                 res.set_content(os.str(), "text/csv");
               } else if (format == "json") {
                 std::vector<std::string> labels;
                 for (const auto& w : svc.study(sid).definition().wards) labels.push_back(w.label);
                 send_json(res, dataset_json(ex, labels));
               } else {
                 throw ValidationError("format must be csv or json");
               }
             }));

  server.Post(R"(/studies/([^/]+)/fits)", guarded([&svc, body](const httplib::Request& req, httplib::Response& res) {
                const json j = body(req);
                const auto config = sampler_config_from_json(j.contains("config") ? j["config"] : j);
                const auto fit_id = svc.run_fit(req.matches[1], config);
                send_json(res, {{"fit_id", fit_id}, {"status", "running"}}, 202);
              }));

  server.Get(R"(/studies/([^/]+)/results)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string fit = req.has_param("fit") ? req.get_param_value("fit") : "";
               send_json(res, svc.results(req.matches[1], fit));
             }));

  server.Get(R"(/studies/([^/]+)/wards)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, svc.wards_json(req.matches[1]));
             }));

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Idempotency-Key");
    res.status = 204;
  });
}

} // namespace bttie::service
