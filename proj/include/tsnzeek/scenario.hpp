#pragma once

// Synthetic SRP/FRER corpora: benign reservations and redundant streams on a
// small bridged topology, optionally perturbed by one scripted attack, plus
// the ground truth the detector is expected to report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsnzeek/config.hpp"
#include "tsnzeek/pcap.hpp"
#include "tsnzeek/recovery.hpp"
#include "tsnzeek/routes.hpp"
#include "tsnzeek/truth.hpp"
#include "tsnzeek/wire.hpp"

namespace tsnzeek {

class InvalidScript : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class AttackKind : std::uint8_t { A1 = 1, A2, A3, A4, A5, A6, A7 };

inline std::optional<AttackKind> parse_attack_kind(std::string_view s) {
  auto r = parse_rule(s);
  if (!r) return std::nullopt;
  return static_cast<AttackKind>(static_cast<int>(*r));
}

struct Topology {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> links;

  [[nodiscard]] bool has_node(const std::string& n) const {
    return std::find(nodes.begin(), nodes.end(), n) != nodes.end();
  }
  [[nodiscard]] bool has_link(const std::string& a, const std::string& b) const {
    return std::any_of(links.begin(), links.end(), [&](const auto& l) {
      return (l.first == a && l.second == b) || (l.first == b && l.second == a);
    });
  }

  /// Three bridges in a ring; talker EP1 on TSN3, listener EP2 on TSN2 and a
  /// malicious endpoint MEP on TSN1.
  static Topology ring() {
    return {{"TSN1", "TSN2", "TSN3", "EP1", "EP2", "MEP"},
            {{"TSN1", "TSN2"}, {"TSN2", "TSN3"}, {"TSN3", "TSN1"},
             {"EP1", "TSN3"}, {"EP2", "TSN2"}, {"MEP", "TSN1"}}};
  }
};

struct StreamSpec {
  std::vector<Path> paths;  // one member stream per path
};

inline std::vector<Path> default_paths() {
  return {{"EP1", "TSN3", "TSN2", "EP2"}, {"EP1", "TSN3", "TSN1", "TSN2", "EP2"}};
}

struct AttackSpec {
  AttackKind kind{};
  double start_s = 1.0;
  nlohmann::json params = nlohmann::json::object();
};

struct ScenarioScript {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double duration_s = 10.0;
  double start_time = 1.7e9;
  Topology topology = Topology::ring();
  std::vector<StreamSpec> streams;
  std::uint32_t frame_rate_hz = 100;
  std::uint32_t payload_bytes = 128;
  std::uint32_t hop_latency_us = 10;
  std::optional<AttackSpec> attack;
  double hub_delay_ms = 0.0;  // extra delay on member path 1 of stream 0
  DetectorConfig detector;
  nlohmann::json detector_overrides = nlohmann::json::object();
};

inline std::vector<StreamSpec> default_streams(std::size_t n) {
  return std::vector<StreamSpec>(n, StreamSpec{default_paths()});
}

namespace detail {

template <typename T>
T script_get(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScript(std::string("script field ") + key + ": " + e.what());
  }
}

}  // namespace detail

/// Parses a script; unknown keys are rejected. Does not run validate_script.
inline ScenarioScript script_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidScript("script must be a JSON object");
  static const std::set<std::string> keys = {
      "name",          "seed",           "duration_s", "start_time", "topology",
      "streams",       "benign_streams", "frame_rate_hz", "payload_bytes", "hop_latency_us",
      "attack",        "hub_delay_ms",   "detector"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw InvalidScript("unknown script key: " + k);
  }
  ScenarioScript s;
  s.name = detail::script_get(j, "name", s.name);
  s.seed = detail::script_get(j, "seed", s.seed);
  s.duration_s = detail::script_get(j, "duration_s", s.duration_s);
  s.start_time = detail::script_get(j, "start_time", s.start_time);
  s.frame_rate_hz = detail::script_get(j, "frame_rate_hz", s.frame_rate_hz);
  s.payload_bytes = detail::script_get(j, "payload_bytes", s.payload_bytes);
  s.hop_latency_us = detail::script_get(j, "hop_latency_us", s.hop_latency_us);
  s.hub_delay_ms = detail::script_get(j, "hub_delay_ms", s.hub_delay_ms);

  try {
    if (j.contains("topology")) {
      const auto& t = j.at("topology");
      s.topology.nodes = t.at("nodes").get<std::vector<std::string>>();
      s.topology.links.clear();
      for (const auto& l : t.at("links")) {
        auto pair = l.get<std::vector<std::string>>();
        if (pair.size() != 2) throw InvalidScript("topology link must have two nodes");
        s.topology.links.emplace_back(pair[0], pair[1]);
      }
    }
    if (j.contains("streams")) {
      if (j.contains("benign_streams")) {
        throw InvalidScript("give either streams or benign_streams, not both");
      }
      for (const auto& st : j.at("streams")) {
        StreamSpec spec;
        for (const auto& p : st.at("paths")) spec.paths.push_back(p.get<Path>());
        s.streams.push_back(std::move(spec));
      }
    } else {
      s.streams = default_streams(detail::script_get<std::size_t>(j, "benign_streams", 6));
    }
    if (j.contains("attack")) {
      const auto& a = j.at("attack");
      for (const auto& [k, v] : a.items()) {
        if (k != "kind" && k != "start_s" && k != "params") {
          throw InvalidScript("unknown attack key: " + k);
        }
      }
      AttackSpec spec;
      const auto kind = a.at("kind").get<std::string>();
      auto parsed = parse_attack_kind(kind);
      if (!parsed) throw InvalidScript("unknown attack kind: " + kind);
      spec.kind = *parsed;
      spec.start_s = a.value("start_s", spec.start_s);
      if (a.contains("params")) spec.params = a.at("params");
      if (!spec.params.is_object()) throw InvalidScript("attack params must be an object");
      s.attack = std::move(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScript(std::string("script: ") + e.what());
  }

  if (j.contains("detector")) {
    s.detector_overrides = j.at("detector");
    try {
      s.detector = detector_config_from_json(s.detector_overrides);
    } catch (const ConfigError& e) {
      throw InvalidScript(std::string("script detector: ") + e.what());
    }
  }
  return s;
}

inline ScenarioScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidScript("cannot open script " + path);
  try {
    return script_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidScript(path + ": " + e.what());
  }
}

inline void validate_script(const ScenarioScript& s) {
  if (!(s.duration_s > 0)) throw InvalidScript("duration_s must be > 0");
  if (!(s.start_time >= 0)) throw InvalidScript("start_time must be >= 0");
  if (s.streams.empty()) throw InvalidScript("at least one stream is required");
  if (s.streams.size() > 200) throw InvalidScript("at most 200 streams are supported");
  if (s.frame_rate_hz == 0 || 1'000'000 % s.frame_rate_hz != 0) {
    throw InvalidScript("frame_rate_hz must divide 1000000");
  }
  if (s.payload_bytes + 14 + kFrerMinPayload > 1514) {
    throw InvalidScript("payload_bytes too large for an Ethernet frame");
  }
  if (s.hub_delay_ms < 0) throw InvalidScript("hub_delay_ms must be >= 0");
  if (s.hub_delay_ms > 0 && s.attack) throw InvalidScript("hub delay cannot be combined with an attack");
  for (const auto& l : s.topology.links) {
    if (!s.topology.has_node(l.first) || !s.topology.has_node(l.second)) {
      throw InvalidScript("link " + l.first + "-" + l.second + " names an unknown node");
    }
  }
  const std::uint32_t period_us = 1'000'000 / s.frame_rate_hz;
  for (std::size_t i = 0; i < s.streams.size(); ++i) {
    const auto& paths = s.streams[i].paths;
    if (paths.empty() || paths.size() > 255) throw InvalidScript("stream needs 1..255 paths");
    for (const auto& p : paths) {
      if (p.size() < 2) throw InvalidScript("path with fewer than two nodes");
      for (std::size_t k = 1; k < p.size(); ++k) {
        if (!s.topology.has_link(p[k - 1], p[k])) {
          throw InvalidScript("path uses missing link " + p[k - 1] + "-" + p[k]);
        }
      }
      if ((p.size() - 1) * s.hop_latency_us * 2 >= period_us) {
        throw InvalidScript("path latency must stay below half the frame period");
      }
    }
  }
  if (s.hub_delay_ms > 0 && s.streams[0].paths.size() < 2) {
    throw InvalidScript("hub delay needs a second member path on stream 0");
  }
  if (s.attack && !(s.attack->start_s >= 0 && s.attack->start_s < s.duration_s)) {
    throw InvalidScript("attack.start_s must lie in [0, duration_s)");
  }
}

struct GeneratedCorpus {
  std::vector<TimestampedFrame> frames;
  GroundTruth truth;
  RouteConfig routes;
  DetectorConfig detector;
};

namespace detail {

inline constexpr MacAddress kTalkerMac{0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
inline constexpr MacAddress kListenerMac{0x02, 0x00, 0x00, 0x00, 0x00, 0x02};
inline constexpr MacAddress kAttackerMac{0x02, 0x00, 0x00, 0x00, 0x00, 0x66};
inline constexpr MacAddress kSrpGroupMac{0x01, 0x80, 0xC2, 0x00, 0x00, 0x0E};
inline constexpr std::uint16_t kDataEtherType = 0x88B5;
inline constexpr std::int64_t kAdvertiseStaggerUs = 50'000;
inline constexpr std::int64_t kReadyDelayUs = 2'000;
inline constexpr std::int64_t kDataDelayUs = 10'000;
inline constexpr double kWindowSlack = 0.002;

inline StreamId stream_id_for(const MacAddress& talker, std::uint16_t uid) {
  return StreamId{talker, uid};
}

inline MacAddress stream_dst_for(std::uint8_t hi, std::uint8_t lo) {
  return MacAddress{0x91, 0xE0, 0xF0, 0x00, hi, lo};
}

struct Pending {
  std::int64_t us;
  std::uint64_t order;
  EtherFrame frame;
};

/// One copy of a FRER frame as it reached the capture point.
struct Arrival {
  std::int64_t us;
  std::uint64_t order;
  std::int64_t index;  // frame index within the stream
};

struct BenignStream {
  StreamId id;
  MacAddress dst;
  std::vector<Path> paths;
  std::int64_t advertise_us = 0;
  std::int64_t data_start_us = 0;
  std::uint16_t seq0 = 0;

  [[nodiscard]] std::uint16_t seq(std::int64_t k) const {
    return static_cast<std::uint16_t>(seq0 + static_cast<std::uint64_t>(k));
  }
};

class Builder {
public:
  Builder(const ScenarioScript& s) : s_(s), rng_(s.seed) {
    start_us_ = to_micros(s.start_time);
    duration_us_ = static_cast<std::int64_t>(std::llround(s.duration_s * 1e6));
    period_us_ = 1'000'000 / s.frame_rate_hz;
  }

  GeneratedCorpus run() {
    GeneratedCorpus out;
    out.detector = s_.detector;
    setup_streams();
    for (const auto& st : streams_) {
      out.routes.streams.push_back({st.id, st.paths});
    }

    if (s_.attack) prepare_attack(out);
    for (std::size_t i = 0; i < streams_.size(); ++i) emit_stream(i);
    if (s_.attack) finish_attack(out);
    if (s_.hub_delay_ms > 0) hub_delay_truth();

    std::stable_sort(pending_.begin(), pending_.end(), [](const Pending& a, const Pending& b) {
      return a.us < b.us || (a.us == b.us && a.order < b.order);
    });
    out.frames.reserve(pending_.size());
    for (auto& p : pending_) out.frames.push_back({from_micros(start_us_ + p.us), std::move(p.frame)});

    out.truth.scenario = s_.name;
    out.truth.seed = s_.seed;
    out.truth.start_time = s_.start_time;
    out.truth.duration_s = s_.duration_s;
    out.truth.frames = out.frames.size();
    out.truth.expectations = std::move(truth_);
    return out;
  }

private:
  // Portable draws: raw engine output only, no std distributions.
  std::uint64_t draw(std::uint64_t n) { return rng_() % n; }
  std::uint16_t draw_seq() { return static_cast<std::uint16_t>(rng_() >> 48); }
  Bytes draw_bytes(std::size_t n) {
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng_() >> 56);
    return b;
  }

  [[nodiscard]] double abs_s(std::int64_t us) const { return from_micros(start_us_ + us); }

  void add(std::int64_t us, EtherFrame frame) {
    pending_.push_back({us, next_order_++, std::move(frame)});
  }

  TrafficSpecification benign_spec() const {
    return {1, s_.frame_rate_hz, 1,
            static_cast<std::uint16_t>(kEthernetHeaderLen + kFrerMinPayload + s_.payload_bytes)};
  }

  void advertise(std::int64_t us, const StreamId& id, const MacAddress& dst,
                 const TrafficSpecification& spec, std::uint8_t trees, const MacAddress& src) {
    SrpTalkerAdvertise adv{id, spec, {trees, 2000}, dst};
    add(us, encode(adv, Addressing{kSrpGroupMac, src}));
  }

  void respond(std::int64_t us, const StreamId& id, TalkerStatus status) {
    add(us, encode(SrpListenerResponse{id, status}, Addressing{kSrpGroupMac, kListenerMac}));
  }

  RTagFrame data_frame(const StreamId& handle, std::uint16_t seq, Bytes data) const {
    RTagFrame f;
    f.stream_handle = handle;
    f.sequence_number = seq;
    f.encapsulated_ethertype = kDataEtherType;
    f.payload_len = static_cast<std::uint32_t>(data.size() + 2);
    f.data = std::move(data);
    return f;
  }

  void setup_streams() {
    for (std::size_t i = 0; i < s_.streams.size(); ++i) {
      BenignStream st;
      st.id = stream_id_for(kTalkerMac, static_cast<std::uint16_t>(0x0100 + i));
      st.dst = stream_dst_for(0x01, static_cast<std::uint8_t>(i));
      st.paths = s_.streams[i].paths;
      st.advertise_us = kAdvertiseStaggerUs * static_cast<std::int64_t>(i);
      st.data_start_us = st.advertise_us + kDataDelayUs;
      st.seq0 = draw_seq();
      streams_.push_back(std::move(st));
    }
  }

  [[nodiscard]] std::int64_t send_us(const BenignStream& st, std::int64_t k) const {
    return st.data_start_us + k * period_us_;
  }

  /// First frame index sent at or after `us`, if it is sent before the end.
  [[nodiscard]] std::optional<std::int64_t> index_at(const BenignStream& st,
                                                     std::int64_t us) const {
    const std::int64_t rel = us - st.data_start_us;
    const std::int64_t k = rel <= 0 ? 0 : (rel + period_us_ - 1) / period_us_;
    if (send_us(st, k) >= duration_us_) return std::nullopt;
    return k;
  }

  [[nodiscard]] std::int64_t hop_us(const Path& p) const {
    return static_cast<std::int64_t>(p.size() - 1) * s_.hop_latency_us;
  }

  void emit_stream(std::size_t i) {
    auto& st = streams_[i];
    const auto trees = static_cast<std::uint8_t>(st.paths.size());
    advertise(st.advertise_us, st.id, st.dst, benign_spec(), trees, kTalkerMac);
    respond(st.advertise_us + kReadyDelayUs, st.id, TalkerStatus::Ready);

    const StreamId handle{st.dst, st.id.unique_id};
    const std::int64_t hub_delay_us =
        i == 0 ? static_cast<std::int64_t>(std::llround(s_.hub_delay_ms * 1000.0)) : 0;
    for (std::int64_t k = 0; send_us(st, k) < duration_us_; ++k) {
      const std::int64_t t = send_us(st, k);
      if (i == 0 && suppress_ && t >= suppress_->first && t < suppress_->second) continue;
      if (i == 0 && rebase_ && t >= suppress_->second) {
        // Attacker-originated continuation: one copy, forged sequence base.
        const auto seq = static_cast<std::uint16_t>(*rebase_ + (k - rebase_index_));
        add(t + kAttackerHopUs, encode(data_frame(handle, seq, draw_bytes(s_.payload_bytes)),
                                       kAttackerMac));
        if (!rebase_first_us_) rebase_first_us_ = t + kAttackerHopUs;
        continue;
      }
      const Bytes data = draw_bytes(s_.payload_bytes);
      for (std::size_t p = 0; p < st.paths.size(); ++p) {
        std::int64_t at = t + hop_us(st.paths[p]);
        if (p == 1) at += hub_delay_us;
        const std::uint64_t order = next_order_;
        add(at, encode(data_frame(handle, st.seq(k), data), kTalkerMac));
        if (i == 0) {
          arrivals_.push_back({at, order, k});
          last_copy_us_ = std::max(last_copy_us_, at);
        }
      }
    }
  }

  // ---- attacks ----------------------------------------------------------

  static constexpr std::int64_t kAttackerHopUs = 20;

  double param(const char* key, double fallback) const {
    const auto& p = s_.attack->params;
    if (!p.contains(key)) return fallback;
    if (!p.at(key).is_number()) throw InvalidScript(std::string("attack param ") + key + " must be a number");
    return p.at(key).get<double>();
  }

  void expect(NoticeCode code, Rule rule, std::optional<StreamId> id, double t_min, double t_max,
              Evidence ev, std::string description, std::uint32_t min_count = 1,
              bool benign = false) {
    TruthEntry e;
    e.code = code;
    e.rule = rule;
    e.stream_id = id;
    e.t_min = t_min;
    e.t_max = t_max;
    e.evidence = std::move(ev);
    e.min_count = min_count;
    e.known_benign = benign;
    e.description = std::move(description);
    truth_.push_back(std::move(e));
  }

  [[nodiscard]] std::int64_t attack_us() const {
    return static_cast<std::int64_t>(std::llround(s_.attack->start_s * 1e6));
  }

  [[nodiscard]] std::int64_t last_advertise_us() const { return streams_.back().advertise_us; }

  void prepare_attack(GeneratedCorpus& out) {
    const auto& cfg = s_.detector;
    const std::int64_t t0 = attack_us();
    auto& s0 = streams_[0];
    switch (s_.attack->kind) {
      case AttackKind::A5: {
        if (cfg.recovery_variant != RecoveryVariant::Vector) {
          throw InvalidScript("A5 fixtures assume vector recovery");
        }
        auto k = index_at(s0, t0);
        if (!k) throw InvalidScript("A5 starts after stream 0 ends");
        const double expected = param("expected_seq", -1);
        if (expected >= 0) {
          if (expected > 65535) throw InvalidScript("expected_seq must fit 16 bits");
          s0.seq0 = static_cast<std::uint16_t>(static_cast<std::uint32_t>(expected) - *k);
        }
        break;
      }
      case AttackKind::A6: {
        auto& paths = out.routes.streams[0].paths;
        if (paths.size() < 2) throw InvalidScript("A6 needs two member paths on stream 0");
        paths[1] = paths[0];
        break;
      }
      case AttackKind::A7: {
        const double gap = param("gap_s", 3.0);
        if (gap < cfg.recovery_timeout_s + cfg.sweep_period_s) {
          throw InvalidScript("A7 gap_s must be >= recovery_timeout_s + sweep_period_s");
        }
        const auto gap_us = static_cast<std::int64_t>(std::llround(gap * 1e6));
        if (t0 <= s0.data_start_us) throw InvalidScript("A7 must start after stream 0 data");
        auto resume = index_at(s0, t0 + gap_us);
        if (!resume) throw InvalidScript("A7 resumes after the end of the capture");
        suppress_ = std::make_pair(t0, t0 + gap_us);
        rebase_index_ = *resume;
        const std::int64_t before = *index_at(s0, t0) - 1;
        const std::uint16_t last = s0.seq(before);
        std::uint16_t forged = 0;
        do {
          forged = draw_seq();
        } while (sequence_delta(forged, last) > 0 &&
                 sequence_delta(forged, last) <= cfg.vector_future_max);
        rebase_ = forged;
        rebase_prev_ = last;
        break;
      }
      default:
        break;
    }
  }

  void finish_attack(GeneratedCorpus& out) {
    const auto& cfg = s_.detector;
    const std::int64_t t0 = attack_us();
    const auto& s0 = streams_[0];
    const double t0s = abs_s(t0);
    const StreamId rogue = stream_id_for(kAttackerMac, 0x0666);
    const MacAddress rogue_dst = stream_dst_for(0x06, 0x66);

    switch (s_.attack->kind) {
      case AttackKind::A1: {
        if (s_.streams.size() < cfg.min_samples || t0 <= last_advertise_us()) {
          throw InvalidScript("A1 needs min_samples benign advertisements before start_s");
        }
        advertise(t0, rogue, rogue_dst, {1, 100'000, 1, 1500}, 1, kAttackerMac);
        respond(t0 + kReadyDelayUs, rogue, TalkerStatus::Failed);
        expect(NoticeCode::N1_ExcessiveResourceRequest, Rule::A1, rogue, t0s, t0s + kWindowSlack,
               {}, "oversized traffic specification");
        expect(NoticeCode::N2_DeviatingResourceRequest, Rule::A1, rogue, t0s, t0s + kWindowSlack,
               {}, "request far above the rolling average");
        break;
      }
      case AttackKind::A2: {
        const auto n = static_cast<std::int64_t>(param("requests", 40));
        const double rate = param("rate_hz", 100);
        if (n < 1 || n > 0xFFFF || !(rate > 0)) throw InvalidScript("A2 requests/rate_hz invalid");
        const std::int64_t step = static_cast<std::int64_t>(std::llround(1e6 / rate));
        const std::int64_t limit = cfg.request_rate_limit.count;
        if (n <= limit || static_cast<double>(limit * step) >= cfg.request_rate_limit.window_s * 1e6) {
          throw InvalidScript("A2 flood does not exceed the configured request rate");
        }
        for (std::int64_t j = 0; j < n; ++j) {
          const auto uid = static_cast<std::uint16_t>(0x2000 + j);
          advertise(t0 + j * step, stream_id_for(kAttackerMac, uid),
                    stream_dst_for(0x20, static_cast<std::uint8_t>(j)), benign_spec(), 1,
                    kAttackerMac);
        }
        expect(NoticeCode::N3_TooManyRequests, Rule::A2, std::nullopt, t0s,
               abs_s(t0 + (n - 1) * step) + kWindowSlack, {}, "SRP request flood",
               static_cast<std::uint32_t>(1));
        break;
      }
      case AttackKind::A3: {
        if (t0 <= s0.advertise_us + kReadyDelayUs) {
          throw InvalidScript("A3 must start after stream 0 is accepted");
        }
        TrafficSpecification bigger = benign_spec();
        bigger.max_frame_size = static_cast<std::uint16_t>(bigger.max_frame_size * 4 / 3);
        advertise(t0, s0.id, s0.dst, bigger, static_cast<std::uint8_t>(s0.paths.size()),
                  kAttackerMac);
        expect(NoticeCode::N4_ChangingExistingAllocation, Rule::A3, s0.id, t0s,
               t0s + kWindowSlack, {}, "re-advertisement of an accepted stream");
        break;
      }
      case AttackKind::A4: {
        const std::int64_t ready = t0 + kReadyDelayUs;
        const double due = abs_s(ready) + cfg.dangling_timeout_s;
        if (abs_s(ready) + cfg.dangling_timeout_s + 2 * cfg.sweep_period_s >
            abs_s(duration_us_) - 0.1) {
          throw InvalidScript("A4 needs duration_s beyond start_s + dangling_timeout_s + 2 sweeps");
        }
        advertise(t0, rogue, rogue_dst, benign_spec(), 1, kAttackerMac);
        respond(ready, rogue, TalkerStatus::Ready);
        expect(NoticeCode::N5_DanglingResources, Rule::A4, rogue, due,
               due + cfg.sweep_period_s + kWindowSlack, {}, "accepted reservation without data");
        break;
      }
      case AttackKind::A5:
        inject_a5(s0);
        break;
      case AttackKind::A6: {
        const auto& paths = out.routes.streams[0].paths;
        std::set<std::string> endpoints;
        for (const auto& p : paths) {
          endpoints.insert(p.front());
          endpoints.insert(p.back());
        }
        const double first = abs_s(0);
        for (std::size_t k = 1; k < paths[0].size(); ++k) {
          const auto& a = paths[0][k - 1];
          const auto& b = paths[0][k];
          if (endpoints.count(a) || endpoints.count(b)) continue;
          const std::string link = a < b ? a + "-" + b : b + "-" + a;
          expect(NoticeCode::N7_ExcessiveMemberStreams, Rule::A6, s0.id, first - kWindowSlack,
                 first + kWindowSlack, {{"link", link}}, "member paths share link " + link);
        }
        break;
      }
      case AttackKind::A7: {
        const double silent_from = abs_s(last_copy_us_);
        expect(NoticeCode::N8_TerminatedMemberStreams, Rule::A7, s0.id,
               silent_from + cfg.recovery_timeout_s,
               silent_from + cfg.recovery_timeout_s + cfg.sweep_period_s + kWindowSlack,
               {{"last_sequence", std::to_string(rebase_prev_)}}, "member streams suppressed");
        const double resumed = abs_s(*rebase_first_us_);
        expect(NoticeCode::N7_ExcessiveMemberStreams, Rule::A7, s0.id, resumed,
               resumed + kWindowSlack,
               {{"observed", std::to_string(*rebase_)}, {"previous", std::to_string(rebase_prev_)}},
               "stream resumed with a forged sequence base");
        break;
      }
    }
  }

  /// One out-of-range injection at start_s, one surplus copy after a dedup
  /// window, then random rogue probes, each a dedup window apart.
  void inject_a5(const BenignStream& s0) {
    const auto& cfg = s_.detector;
    const StreamId handle{s0.dst, s0.id.unique_id};
    const auto spacing = static_cast<std::int64_t>(std::llround((cfg.dedup_window_s + 0.2) * 1e6));
    const auto probes = static_cast<std::int64_t>(param("probes", 2));
    const std::int64_t t0 = attack_us();
    const auto redundancy = static_cast<std::uint32_t>(s0.paths.size());
    const auto h = static_cast<std::int32_t>(cfg.vector_history_H);

    auto at_index = [&](std::int64_t when) {
      auto k = index_at(s0, when);
      if (!k || send_us(s0, *k) + period_us_ / 2 >= duration_us_) {
        throw InvalidScript("A5 injections run past the end of the capture");
      }
      return *k;
    };
    auto inject = [&](std::int64_t k, std::uint16_t seq) {
      const std::int64_t when = send_us(s0, k) + period_us_ / 2;
      add(when, encode(data_frame(handle, seq, draw_bytes(s_.payload_bytes)), kAttackerMac));
      return abs_s(when);
    };
    auto rogue = [&](std::int64_t k, std::uint16_t seq, const char* what) {
      const std::uint16_t expected = s0.seq(k);
      const double t = inject(k, seq);
      expect(NoticeCode::N6_OutOfOrderFrames, Rule::A5, s0.id, t, t + kWindowSlack,
             {{"observed", std::to_string(seq)}, {"expected", std::to_string(expected)}}, what);
    };

    const std::int64_t k0 = at_index(t0);
    const double injected = param("injected_seq", -1);
    std::uint16_t first = 0;
    if (injected >= 0) {
      if (injected > 65535) throw InvalidScript("injected_seq must fit 16 bits");
      first = static_cast<std::uint16_t>(injected);
    } else {
      do {
        first = draw_seq();
      } while (!is_rogue(first, s0.seq(k0), h, cfg.vector_future_max));
    }
    if (!is_rogue(first, s0.seq(k0), h, cfg.vector_future_max)) {
      throw InvalidScript("injected_seq would be accepted by vector recovery");
    }
    rogue(k0, first, "injected out-of-range sequence number");

    if (redundancy < 255) {
      const std::int64_t kd = at_index(t0 + spacing);
      const std::uint16_t seq = s0.seq(kd);
      const double t = inject(kd, seq);
      expect(NoticeCode::N6_OutOfOrderFrames, Rule::A5, s0.id, t, t + kWindowSlack,
             {{"observed", std::to_string(seq)}, {"decision", "DiscardDuplicate"}},
             "surplus copy of an accepted frame");
      expect(NoticeCode::N7_ExcessiveMemberStreams, Rule::A5, s0.id, t, t + kWindowSlack,
             {{"sequence", std::to_string(seq)},
              {"copies", std::to_string(redundancy + 1)},
              {"redundancy", std::to_string(redundancy)}},
             "more copies than member streams");
    }

    for (std::int64_t j = 0; j < probes; ++j) {
      const std::int64_t k = at_index(t0 + spacing * (j + 2));
      std::uint16_t seq = 0;
      do {
        seq = draw_seq();
      } while (!is_rogue(seq, s0.seq(k), h, cfg.vector_future_max));
      rogue(k, seq, "random sequence number probe");
    }
  }

  static bool is_rogue(std::uint16_t seq, std::uint16_t highest, std::int32_t h,
                       std::int32_t future_max) {
    const std::int32_t d = sequence_delta(seq, highest);
    return d > future_max || d <= -h;
  }

  /// Replays the arrival order of stream 0's copies against the configured
  /// recovery variant, using frame indices instead of wrapped sequence numbers.
  void hub_delay_truth() {
    auto order = arrivals_;
    std::sort(order.begin(), order.end(), [](const Arrival& a, const Arrival& b) {
      return a.us < b.us || (a.us == b.us && a.order < b.order);
    });
    const bool match = s_.detector.recovery_variant == RecoveryVariant::Match;
    const std::int64_t h = s_.detector.vector_history_H;
    std::int64_t highest = -1;
    std::uint32_t late = 0;
    std::optional<std::int64_t> first_late_us;
    for (const auto& a : order) {
      if (a.index > highest) {
        highest = a.index;
        continue;
      }
      const std::int64_t behind = highest - a.index;
      const bool flagged = match ? behind > 0 : behind >= h;
      if (flagged) {
        ++late;
        if (!first_late_us) first_late_us = a.us;
      }
    }
    if (late == 0) return;
    expect(NoticeCode::N6_OutOfOrderFrames, Rule::A5, streams_[0].id, abs_s(*first_late_us),
           abs_s(duration_us_ + static_cast<std::int64_t>(std::llround(s_.hub_delay_ms * 1000))) +
               kWindowSlack,
           {}, std::to_string(late) + " delayed member-stream copies arrive out of order", 1,
           true);
  }

  const ScenarioScript& s_;
  std::mt19937_64 rng_;
  std::int64_t start_us_ = 0;
  std::int64_t duration_us_ = 0;
  std::int64_t period_us_ = 0;
  std::uint64_t next_order_ = 0;
  std::vector<Pending> pending_;
  std::vector<BenignStream> streams_;
  std::vector<TruthEntry> truth_;
  std::vector<Arrival> arrivals_;
  std::int64_t last_copy_us_ = 0;

  std::optional<std::pair<std::int64_t, std::int64_t>> suppress_;
  std::optional<std::uint16_t> rebase_;
  std::uint16_t rebase_prev_ = 0;
  std::int64_t rebase_index_ = 0;
  std::optional<std::int64_t> rebase_first_us_;
};

}  // namespace detail

/// Deterministic in (script, seed): same input, byte-identical corpus.
[[nodiscard]] inline GeneratedCorpus generate(const ScenarioScript& script) {
  validate_script(script);
  return detail::Builder(script).run();
}

/// Benign corpus with stream 0's second member path delayed by `delay_ms`.
[[nodiscard]] inline GeneratedCorpus generate_hub_delay(ScenarioScript script, double delay_ms) {
  if (!(delay_ms > 0)) throw InvalidScript("hub delay must be > 0 ms");
  script.attack.reset();
  script.hub_delay_ms = delay_ms;
  return generate(script);
}

/// Writes <prefix>.pcap, .truth.json, .routes.json and .config.json.
inline void write_corpus(const GeneratedCorpus& c, const std::string& prefix) {
  write_pcap(prefix + ".pcap", c.frames);
  auto dump = [](const std::string& path, const auto& j) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
  };
  dump(prefix + ".truth.json", to_json(c.truth));
  dump(prefix + ".routes.json", to_json(c.routes));
  dump(prefix + ".config.json", to_json(c.detector));
}

}  // namespace tsnzeek
