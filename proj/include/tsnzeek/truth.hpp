#pragma once

// Ground-truth files for generated corpora and matching of emitted notices
// against them.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsnzeek/notice.hpp"

namespace tsnzeek {

class TruthError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One expected notice. Evidence predicates are exact string matches on the
/// listed keys; unlisted keys are unconstrained.
struct TruthEntry {
  NoticeCode code{};
  std::optional<Rule> rule;  // informational
  std::optional<StreamId> stream_id;
  double t_min = 0.0;
  double t_max = 0.0;
  Evidence evidence;
  std::uint32_t min_count = 1;
  // Tolerated if emitted, never required.
  bool known_benign = false;
  std::string description;

  bool operator==(const TruthEntry&) const = default;

  [[nodiscard]] bool matches(const Notice& n) const {
    if (n.code != code) return false;
    if (stream_id && n.stream_id != stream_id) return false;
    if (n.ts < t_min || n.ts > t_max) return false;
    for (const auto& [k, v] : evidence) {
      auto it = n.evidence.find(k);
      if (it == n.evidence.end() || it->second != v) return false;
    }
    return true;
  }
};

struct GroundTruth {
  std::string scenario;
  std::uint64_t seed = 0;
  double start_time = 0.0;
  double duration_s = 0.0;
  std::uint64_t frames = 0;
  std::vector<TruthEntry> expectations;

  bool operator==(const GroundTruth&) const = default;
};

inline nlohmann::ordered_json to_json(const TruthEntry& e) {
  nlohmann::ordered_json j;
  j["code"] = short_name(e.code);
  if (e.rule) j["rule"] = to_string(*e.rule);
  j["stream_id"] = e.stream_id ? nlohmann::ordered_json(e.stream_id->to_hex())
                               : nlohmann::ordered_json();
  j["t_min"] = e.t_min;
  j["t_max"] = e.t_max;
  j["evidence"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : e.evidence) j["evidence"][k] = v;
  j["min_count"] = e.min_count;
  j["known_benign"] = e.known_benign;
  j["description"] = e.description;
  return j;
}

inline nlohmann::ordered_json to_json(const GroundTruth& t) {
  nlohmann::ordered_json j;
  j["scenario"] = t.scenario;
  j["seed"] = t.seed;
  j["start_time"] = t.start_time;
  j["duration_s"] = t.duration_s;
  j["frames"] = t.frames;
  j["expectations"] = nlohmann::ordered_json::array();
  for (const auto& e : t.expectations) j["expectations"].push_back(to_json(e));
  return j;
}

inline TruthEntry truth_entry_from_json(const nlohmann::json& j) {
  TruthEntry e;
  try {
    auto code = parse_notice_code(j.at("code").get<std::string>());
    if (!code) throw TruthError("unknown notice code " + j.at("code").dump());
    e.code = *code;
    if (j.contains("rule")) {
      e.rule = parse_rule(j.at("rule").get<std::string>());
      if (!e.rule) throw TruthError("unknown rule " + j.at("rule").dump());
    }
    if (j.contains("stream_id") && !j.at("stream_id").is_null()) {
      e.stream_id = StreamId::from_hex(j.at("stream_id").get<std::string>());
      if (!e.stream_id) throw TruthError("bad stream_id " + j.at("stream_id").dump());
    }
    e.t_min = j.at("t_min").get<double>();
    e.t_max = j.at("t_max").get<double>();
    if (j.contains("evidence")) e.evidence = j.at("evidence").get<Evidence>();
    e.min_count = j.value("min_count", 1u);
    e.known_benign = j.value("known_benign", false);
    e.description = j.value("description", std::string());
  } catch (const nlohmann::json::exception& ex) {
    throw TruthError(std::string("truth entry: ") + ex.what());
  }
  if (e.t_max < e.t_min) throw TruthError("truth entry: t_max < t_min");
  return e;
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth t;
  try {
    t.scenario = j.value("scenario", std::string());
    t.seed = j.value("seed", std::uint64_t{0});
    t.start_time = j.value("start_time", 0.0);
    t.duration_s = j.value("duration_s", 0.0);
    t.frames = j.value("frames", std::uint64_t{0});
    for (const auto& e : j.at("expectations")) t.expectations.push_back(truth_entry_from_json(e));
  } catch (const nlohmann::json::exception& ex) {
    throw TruthError(std::string("ground truth: ") + ex.what());
  }
  return t;
}

struct ExpectationResult {
  std::size_t index = 0;
  std::uint32_t matched = 0;
  bool satisfied = false;
};

struct VerifyReport {
  std::vector<ExpectationResult> expectations;
  std::vector<Notice> unexpected;
  std::uint64_t benign_matches = 0;

  [[nodiscard]] bool passed() const noexcept {
    if (!unexpected.empty()) return false;
    for (const auto& e : expectations) {
      if (!e.satisfied) return false;
    }
    return true;
  }
};

/// Every required entry needs min_count matching notices; every notice must
/// match at least one entry (required or known-benign).
[[nodiscard]] inline VerifyReport verify_notices(const GroundTruth& truth,
                                                 const std::vector<Notice>& notices) {
  VerifyReport report;
  for (std::size_t i = 0; i < truth.expectations.size(); ++i) {
    report.expectations.push_back({i, 0, truth.expectations[i].known_benign});
  }
  for (const auto& n : notices) {
    bool any = false;
    bool benign_only = true;
    for (std::size_t i = 0; i < truth.expectations.size(); ++i) {
      const auto& e = truth.expectations[i];
      if (!e.matches(n)) continue;
      any = true;
      benign_only = benign_only && e.known_benign;
      ++report.expectations[i].matched;
    }
    if (!any) report.unexpected.push_back(n);
    else if (benign_only) ++report.benign_matches;
  }
  for (std::size_t i = 0; i < truth.expectations.size(); ++i) {
    const auto& e = truth.expectations[i];
    auto& r = report.expectations[i];
    if (!e.known_benign) r.satisfied = r.matched >= e.min_count;
  }
  return report;
}

/// Human-readable per-expectation diff.
[[nodiscard]] inline std::string format_report(const GroundTruth& truth, const VerifyReport& r) {
  std::ostringstream out;
  for (const auto& res : r.expectations) {
    const auto& e = truth.expectations[res.index];
    const char* status = e.known_benign ? "BENIGN" : (res.satisfied ? "OK" : "MISSING");
    out << status << "  " << short_name(e.code);
    if (e.stream_id) out << " stream=" << e.stream_id->to_hex();
    out << " t=[" << evidence_number(e.t_min) << "," << evidence_number(e.t_max) << "]";
    for (const auto& [k, v] : e.evidence) out << " " << k << "=" << v;
    out << "  matched " << res.matched;
    if (!e.known_benign) out << "/" << e.min_count;
    if (!e.description.empty()) out << "  (" << e.description << ")";
    out << "\n";
  }
  for (const auto& n : r.unexpected) {
    out << "UNEXPECTED  " << short_name(n.code);
    if (n.stream_id) out << " stream=" << n.stream_id->to_hex();
    out << " t=" << evidence_number(n.ts);
    for (const auto& [k, v] : n.evidence) out << " " << k << "=" << v;
    out << "\n";
  }
  out << (r.passed() ? "verify: PASS" : "verify: FAIL") << "\n";
  return out.str();
}

}  // namespace tsnzeek
