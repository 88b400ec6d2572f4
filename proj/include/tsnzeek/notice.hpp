#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tsnzeek/wire.hpp"

namespace tsnzeek {

enum class NoticeCode : std::uint8_t {
  N1_ExcessiveResourceRequest = 1,
  N2_DeviatingResourceRequest,
  N3_TooManyRequests,
  N4_ChangingExistingAllocation,
  N5_DanglingResources,
  N6_OutOfOrderFrames,
  N7_ExcessiveMemberStreams,
  N8_TerminatedMemberStreams,
};

enum class Rule : std::uint8_t { A1 = 1, A2, A3, A4, A5, A6, A7 };

inline constexpr std::array kAllNoticeCodes = {
    NoticeCode::N1_ExcessiveResourceRequest, NoticeCode::N2_DeviatingResourceRequest,
    NoticeCode::N3_TooManyRequests,          NoticeCode::N4_ChangingExistingAllocation,
    NoticeCode::N5_DanglingResources,        NoticeCode::N6_OutOfOrderFrames,
    NoticeCode::N7_ExcessiveMemberStreams,   NoticeCode::N8_TerminatedMemberStreams,
};

inline constexpr std::array kAllRules = {Rule::A1, Rule::A2, Rule::A3, Rule::A4,
                                         Rule::A5, Rule::A6, Rule::A7};

/// Short form, e.g. "N6".
inline std::string short_name(NoticeCode c) {
  return "N" + std::to_string(static_cast<int>(c));
}

inline std::string to_string(Rule r) { return "A" + std::to_string(static_cast<int>(r)); }

/// Log form, e.g. "N6.FRER.OutOfOrderFrames".
inline std::string_view note_name(NoticeCode c) noexcept {
  switch (c) {
    case NoticeCode::N1_ExcessiveResourceRequest: return "N1.SRP.ExcessiveResourceRequest";
    case NoticeCode::N2_DeviatingResourceRequest: return "N2.SRP.DeviatingResourceRequest";
    case NoticeCode::N3_TooManyRequests: return "N3.SRP.TooManyRequests";
    case NoticeCode::N4_ChangingExistingAllocation: return "N4.SRP.ChangingExistingAllocation";
    case NoticeCode::N5_DanglingResources: return "N5.SRP.DanglingResources";
    case NoticeCode::N6_OutOfOrderFrames: return "N6.FRER.OutOfOrderFrames";
    case NoticeCode::N7_ExcessiveMemberStreams: return "N7.FRER.ExcessiveMemberStreams";
    case NoticeCode::N8_TerminatedMemberStreams: return "N8.FRER.TerminatedMemberStreams";
  }
  return "";
}

/// Accepts "N6", "N6.FRER.OutOfOrderFrames" or anything starting with "N<d>.".
inline std::optional<NoticeCode> parse_notice_code(std::string_view text) {
  if (text.size() < 2 || text[0] != 'N' || text[1] < '1' || text[1] > '8') return std::nullopt;
  if (text.size() > 2 && text[2] != '.') return std::nullopt;
  auto code = static_cast<NoticeCode>(text[1] - '0');
  if (text.size() > 2 && text != note_name(code)) return std::nullopt;
  return code;
}

inline std::optional<Rule> parse_rule(std::string_view text) {
  if (text.size() != 2 || text[0] != 'A' || text[1] < '1' || text[1] > '7') return std::nullopt;
  return static_cast<Rule>(text[1] - '0');
}

using Evidence = std::map<std::string, std::string>;

struct Notice {
  NoticeCode code{};
  double ts = 0.0;
  std::optional<StreamId> stream_id;
  Evidence evidence;
  Rule rule{};
  std::string msg;
  // Identical notices folded into this one by deduplication.
  std::uint32_t repeats = 0;

  bool operator==(const Notice&) const = default;
};

/// Formats a number for evidence maps: integers without a fractional part,
/// everything else in shortest round-trip form.
inline std::string evidence_number(double v) {
  char buf[64];
  auto [end, ec] = std::abs(v) < 1e15 ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                                      : std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

inline std::string evidence_number(std::uint64_t v) { return std::to_string(v); }
inline std::string evidence_number(std::int64_t v) { return std::to_string(v); }
inline std::string evidence_number(unsigned v) { return std::to_string(v); }
inline std::string evidence_number(int v) { return std::to_string(v); }

// ---------------------------------------------------------------------------
// Evidence schema. Each code admits one or more exact key sets.

using EvidenceKeys = std::set<std::string>;

inline const std::vector<EvidenceKeys>& evidence_schema(NoticeCode c) {
  static const std::map<NoticeCode, std::vector<EvidenceKeys>> schema = {
      {NoticeCode::N1_ExcessiveResourceRequest,
       {{"bandwidth_bps", "max_bandwidth_bps", "frame_rate", "max_frame_rate"}}},
      {NoticeCode::N2_DeviatingResourceRequest,
       {{"bandwidth_ratio", "frame_rate_ratio", "factor"}}},
      {NoticeCode::N3_TooManyRequests, {{"requests", "limit", "window_s"}}},
      {NoticeCode::N4_ChangingExistingAllocation,
       {{"previous_bandwidth_bps", "requested_bandwidth_bps", "previous_redundancy",
         "requested_redundancy"}}},
      {NoticeCode::N5_DanglingResources, {{}}},
      {NoticeCode::N6_OutOfOrderFrames, {{"observed", "expected", "decision"}}},
      {NoticeCode::N7_ExcessiveMemberStreams,
       {{"sequence", "copies", "redundancy"},
        {"observed", "previous", "delta"},
        {"link", "shared_nodes", "paths"}}},
      {NoticeCode::N8_TerminatedMemberStreams, {{"silent_s", "timeout_s", "last_sequence"}}},
  };
  return schema.at(c);
}

[[nodiscard]] inline bool evidence_conforms(NoticeCode c, const Evidence& ev) {
  EvidenceKeys keys;
  for (const auto& [k, v] : ev) keys.insert(k);
  const auto& variants = evidence_schema(c);
  return std::find(variants.begin(), variants.end(), keys) != variants.end();
}

/// Notices each detection function may raise.
inline const std::set<NoticeCode>& notices_for_rule(Rule r) {
  using N = NoticeCode;
  static const std::map<Rule, std::set<NoticeCode>> table = {
      {Rule::A1, {N::N1_ExcessiveResourceRequest, N::N2_DeviatingResourceRequest}},
      {Rule::A2,
       {N::N1_ExcessiveResourceRequest, N::N2_DeviatingResourceRequest, N::N3_TooManyRequests}},
      {Rule::A3,
       {N::N1_ExcessiveResourceRequest, N::N2_DeviatingResourceRequest,
        N::N4_ChangingExistingAllocation}},
      {Rule::A4, {N::N5_DanglingResources}},
      {Rule::A5, {N::N6_OutOfOrderFrames, N::N7_ExcessiveMemberStreams}},
      {Rule::A6, {N::N7_ExcessiveMemberStreams}},
      {Rule::A7, {N::N7_ExcessiveMemberStreams, N::N8_TerminatedMemberStreams}},
  };
  return table.at(r);
}

}  // namespace tsnzeek
