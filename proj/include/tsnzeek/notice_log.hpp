#pragma once

// Newline-delimited JSON notice log. Schema: docs/notice-schema.json.

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "tsnzeek/notice.hpp"

namespace tsnzeek {

class NoticeLogError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Serialized form of a Notice.
struct NoticeRecord {
  double ts = 0.0;
  std::string note;
  std::string msg;
  std::optional<std::string> stream_id;
  std::map<std::string, std::string> evidence;
  std::string rule;
  std::uint32_t repeats = 0;

  bool operator==(const NoticeRecord&) const = default;
};

[[nodiscard]] inline NoticeRecord to_record(const Notice& n) {
  NoticeRecord r;
  r.ts = n.ts;
  r.note = std::string(note_name(n.code));
  r.msg = n.msg;
  if (n.stream_id) r.stream_id = n.stream_id->to_hex();
  r.evidence = n.evidence;
  r.rule = to_string(n.rule);
  r.repeats = n.repeats;
  return r;
}

[[nodiscard]] inline Notice from_record(const NoticeRecord& r) {
  auto code = parse_notice_code(r.note);
  auto rule = parse_rule(r.rule);
  if (!code) throw NoticeLogError("unknown note " + r.note);
  if (!rule) throw NoticeLogError("unknown rule " + r.rule);
  Notice n;
  n.code = *code;
  n.rule = *rule;
  n.ts = r.ts;
  n.msg = r.msg;
  if (r.stream_id) {
    n.stream_id = StreamId::from_hex(*r.stream_id);
    if (!n.stream_id) throw NoticeLogError("bad stream_id " + *r.stream_id);
  }
  n.evidence = r.evidence;
  n.repeats = r.repeats;
  return n;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const NoticeRecord& r) {
  nlohmann::ordered_json j;
  j["ts"] = r.ts;
  j["note"] = r.note;
  j["msg"] = r.msg;
  j["stream_id"] = r.stream_id ? nlohmann::ordered_json(*r.stream_id) : nlohmann::ordered_json();
  j["rule"] = r.rule;
  j["evidence"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.evidence) j["evidence"][k] = v;
  j["repeats"] = r.repeats;
  return j;
}

/// Parses and schema-checks one record, including the per-code evidence keys.
[[nodiscard]] inline NoticeRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw NoticeLogError("notice record is not an object");
  static const std::set<std::string> fields = {"ts",   "note",     "msg",    "stream_id",
                                               "rule", "evidence", "repeats"};
  for (const auto& [k, v] : j.items()) {
    if (!fields.count(k)) throw NoticeLogError("unexpected field " + k);
  }
  NoticeRecord r;
  try {
    r.ts = j.at("ts").get<double>();
    r.note = j.at("note").get<std::string>();
    r.msg = j.at("msg").get<std::string>();
    const auto& sid = j.at("stream_id");
    if (!sid.is_null()) r.stream_id = sid.get<std::string>();
    r.rule = j.at("rule").get<std::string>();
    r.evidence = j.at("evidence").get<std::map<std::string, std::string>>();
    r.repeats = j.at("repeats").get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw NoticeLogError(std::string("notice record: ") + e.what());
  }
  auto code = parse_notice_code(r.note);
  if (!code || r.note.size() == 2) throw NoticeLogError("unknown note " + r.note);
  if (!parse_rule(r.rule)) throw NoticeLogError("unknown rule " + r.rule);
  if (!evidence_conforms(*code, r.evidence)) {
    throw NoticeLogError("evidence keys do not match schema for " + r.note);
  }
  return r;
}

[[nodiscard]] inline std::string to_json_line(const Notice& n) {
  return to_json(to_record(n)).dump();
}

[[nodiscard]] inline NoticeRecord parse_json_line(const std::string& line) {
  try {
    return record_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::parse_error& e) {
    throw NoticeLogError(std::string("notice line: ") + e.what());
  }
}

/// Sole writer of a notice log. One JSON object per line, flushed per line.
class NoticeLog {
public:
  explicit NoticeLog(std::ostream& out) : out_(&out) {}

  explicit NoticeLog(const std::string& path)
      : file_(std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc)),
        out_(file_.get()) {
    if (!*file_) throw NoticeLogError("cannot open notice log " + path);
  }

  void emit(const Notice& n) {
    const std::string line = to_json_line(n);
    std::lock_guard lock(mutex_);
    *out_ << line << '\n';
    out_->flush();
    if (!*out_) throw NoticeLogError("notice log write failed");
    ++written_;
  }

  [[nodiscard]] std::uint64_t written() const noexcept { return written_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
  std::mutex mutex_;
  std::uint64_t written_ = 0;
};

}  // namespace tsnzeek
