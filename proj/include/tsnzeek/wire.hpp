#pragma once

// Byte-level codec for the SRP and FRER frame formats. Layouts are documented
// in docs/wire-format.md; all multi-byte fields are big-endian.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tsnzeek/bytes.hpp"

namespace tsnzeek {

inline constexpr std::uint16_t kEtherTypeSrp = 0x22EA;
inline constexpr std::uint16_t kEtherTypeRTag = 0xF1C1;
inline constexpr std::size_t kEthernetHeaderLen = 14;
inline constexpr std::size_t kMaxEthernetPayload = 1500;

inline constexpr std::uint8_t kSrpTalkerAdvertise = 1;
inline constexpr std::uint8_t kSrpListenerResponse = 2;

inline constexpr std::size_t kSrpTalkerLen = 1 + 8 + 12 + 5 + 6;
inline constexpr std::size_t kSrpListenerLen = 1 + 8 + 1;
inline constexpr std::size_t kRTagLen = 6;
// R-TAG followed by the 2-byte stream unique id.
inline constexpr std::size_t kFrerMinPayload = kRTagLen + 2;

enum class WireErrorCode { TruncatedFrame, BadMessageType, BadEnum, InvalidModel };

inline std::string_view to_string(WireErrorCode c) noexcept {
  switch (c) {
    case WireErrorCode::TruncatedFrame: return "TruncatedFrame";
    case WireErrorCode::BadMessageType: return "BadMessageType";
    case WireErrorCode::BadEnum: return "BadEnum";
    case WireErrorCode::InvalidModel: return "InvalidModel";
  }
  return "Unknown";
}

class WireError : public std::runtime_error {
public:
  WireError(WireErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  [[nodiscard]] WireErrorCode code() const noexcept { return code_; }

private:
  WireErrorCode code_;
};

using MacAddress = std::array<std::uint8_t, 6>;

inline std::string format_mac(const MacAddress& mac) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3],
                mac[4], mac[5]);
  return buf;
}

namespace detail {
inline int hex_value(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Parses exactly out.size()*2 hex digits, skipping ':' and '-' separators.
inline bool parse_hex_bytes(std::string_view text, std::span<std::uint8_t> out) {
  std::size_t n = 0;
  int hi = -1;
  for (char c : text) {
    if (c == ':' || c == '-') continue;
    int v = hex_value(c);
    if (v < 0 || n >= out.size()) return false;
    if (hi < 0) {
      hi = v;
    } else {
      out[n++] = static_cast<std::uint8_t>((hi << 4) | v);
      hi = -1;
    }
  }
  return n == out.size() && hi < 0;
}
}  // namespace detail

inline std::optional<MacAddress> parse_mac(std::string_view text) {
  MacAddress mac{};
  if (!detail::parse_hex_bytes(text, mac)) return std::nullopt;
  return mac;
}

/// Stream identity: 6-byte MAC plus 16-bit unique id, 8 bytes on the wire.
struct StreamId {
  MacAddress mac{};
  std::uint16_t unique_id = 0;

  auto operator<=>(const StreamId&) const = default;

  /// 16 lowercase hex digits, MAC then unique id.
  [[nodiscard]] std::string to_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%02x%02x%02x%02x%02x%02x%04x", mac[0], mac[1], mac[2], mac[3],
                  mac[4], mac[5], unique_id);
    return buf;
  }

  static std::optional<StreamId> from_hex(std::string_view text) {
    std::array<std::uint8_t, 8> raw{};
    if (!detail::parse_hex_bytes(text, raw)) return std::nullopt;
    StreamId id;
    std::copy_n(raw.begin(), 6, id.mac.begin());
    id.unique_id = static_cast<std::uint16_t>((raw[6] << 8) | raw[7]);
    return id;
  }
};

struct TrafficSpecification {
  std::uint32_t interval_numerator = 1;  // seconds, as a fraction
  std::uint32_t interval_denominator = 1;
  std::uint16_t max_frames_per_interval = 1;
  std::uint16_t max_frame_size = 64;

  bool operator==(const TrafficSpecification&) const = default;

  [[nodiscard]] double interval_s() const noexcept {
    return static_cast<double>(interval_numerator) / interval_denominator;
  }
  [[nodiscard]] double frame_rate() const noexcept {
    return static_cast<double>(max_frames_per_interval) * interval_denominator /
           interval_numerator;
  }
  [[nodiscard]] double bandwidth_bps() const noexcept {
    return static_cast<double>(max_frames_per_interval) * max_frame_size * 8.0 *
           interval_denominator / interval_numerator;
  }
};

struct UserToNetworkRequirements {
  std::uint8_t num_seamless_trees = 1;
  std::uint32_t max_latency_us = 0;

  bool operator==(const UserToNetworkRequirements&) const = default;
};

struct SrpTalkerAdvertise {
  StreamId stream_id;
  TrafficSpecification traffic_spec;
  UserToNetworkRequirements requirements;
  MacAddress dst_mac_of_stream{};

  bool operator==(const SrpTalkerAdvertise&) const = default;
};

enum class TalkerStatus : std::uint8_t { None = 0, Ready = 1, Failed = 2 };

inline std::string_view to_string(TalkerStatus s) noexcept {
  switch (s) {
    case TalkerStatus::None: return "None";
    case TalkerStatus::Ready: return "Ready";
    case TalkerStatus::Failed: return "Failed";
  }
  return "Unknown";
}

struct SrpListenerResponse {
  StreamId stream_id;
  TalkerStatus talker_status = TalkerStatus::None;

  bool operator==(const SrpListenerResponse&) const = default;
};

/// FRER data frame. The stream handle is (destination MAC, unique id carried
/// in the two bytes following the R-TAG).
struct RTagFrame {
  StreamId stream_handle;
  std::uint16_t sequence_number = 0;
  std::uint16_t encapsulated_ethertype = 0;
  std::uint32_t payload_len = 2;  // bytes after the R-TAG, unique id included
  Bytes data;                     // bytes after the unique id

  bool operator==(const RTagFrame&) const = default;
};

using SrpMessage = std::variant<SrpTalkerAdvertise, SrpListenerResponse>;
using TsnFrame = std::variant<SrpTalkerAdvertise, SrpListenerResponse, RTagFrame>;

struct EtherFrame {
  MacAddress dst_mac{};
  MacAddress src_mac{};
  std::uint16_t ethertype = 0;
  Bytes payload;

  bool operator==(const EtherFrame&) const = default;
};

enum class FrameKind { SrpTalker, SrpListener, Frer, Other };

inline std::string_view to_string(FrameKind k) noexcept {
  switch (k) {
    case FrameKind::SrpTalker: return "SrpTalker";
    case FrameKind::SrpListener: return "SrpListener";
    case FrameKind::Frer: return "Frer";
    case FrameKind::Other: return "Other";
  }
  return "Other";
}

// ---------------------------------------------------------------------------
// Model validation

inline void validate(const TrafficSpecification& ts) {
  if (ts.interval_denominator == 0) {
    throw WireError(WireErrorCode::InvalidModel, "interval denominator is zero");
  }
  if (ts.interval_numerator == 0) {
    throw WireError(WireErrorCode::InvalidModel, "interval numerator is zero");
  }
  if (ts.max_frame_size < 64) {
    throw WireError(WireErrorCode::InvalidModel,
                    "max frame size " + std::to_string(ts.max_frame_size) + " below 64");
  }
  if (ts.max_frames_per_interval == 0) {
    throw WireError(WireErrorCode::InvalidModel, "zero frames per interval");
  }
}

inline void validate(const UserToNetworkRequirements& req) {
  if (req.num_seamless_trees == 0) {
    throw WireError(WireErrorCode::InvalidModel, "num_seamless_trees must be >= 1");
  }
}

inline void validate(const SrpTalkerAdvertise& adv) {
  validate(adv.traffic_spec);
  validate(adv.requirements);
}

inline void validate(const SrpListenerResponse& resp) {
  if (static_cast<std::uint8_t>(resp.talker_status) > 2) {
    throw WireError(WireErrorCode::InvalidModel, "talker status out of range");
  }
}

inline void validate(const RTagFrame& f) {
  if (f.payload_len != f.data.size() + 2) {
    throw WireError(WireErrorCode::InvalidModel, "payload_len does not match data size");
  }
  if (kRTagLen + f.payload_len > kMaxEthernetPayload) {
    throw WireError(WireErrorCode::InvalidModel, "FRER payload exceeds 1500 bytes");
  }
}

// ---------------------------------------------------------------------------
// Classification and parsing

[[nodiscard]] inline FrameKind classify(const EtherFrame& frame) noexcept {
  switch (frame.ethertype) {
    case kEtherTypeSrp:
      if (frame.payload.empty()) return FrameKind::Other;
      if (frame.payload[0] == kSrpTalkerAdvertise) return FrameKind::SrpTalker;
      if (frame.payload[0] == kSrpListenerResponse) return FrameKind::SrpListener;
      return FrameKind::Other;
    case kEtherTypeRTag:
      return FrameKind::Frer;
    default:
      return FrameKind::Other;
  }
}

struct SrpParse {
  SrpMessage message;
  std::size_t trailing_bytes = 0;
};

namespace detail {
inline StreamId read_stream_id(ByteReader& r) {
  StreamId id;
  id.mac = r.array<6>();
  id.unique_id = r.u16();
  return id;
}

inline void write_stream_id(ByteWriter& w, const StreamId& id) {
  w.bytes(id.mac);
  w.u16(id.unique_id);
}
}  // namespace detail

/// Parses an SRP payload (message-type byte first). Trailing bytes beyond the
/// fixed layout are ignored and reported in SrpParse::trailing_bytes.
[[nodiscard]] inline SrpParse parse_srp(std::span<const std::uint8_t> payload) {
  if (payload.empty()) {
    throw WireError(WireErrorCode::TruncatedFrame, "empty SRP payload");
  }
  const std::uint8_t type = payload[0];
  if (type != kSrpTalkerAdvertise && type != kSrpListenerResponse) {
    throw WireError(WireErrorCode::BadMessageType,
                    "SRP message type " + std::to_string(type));
  }
  const std::size_t need = type == kSrpTalkerAdvertise ? kSrpTalkerLen : kSrpListenerLen;
  if (payload.size() < need) {
    throw WireError(WireErrorCode::TruncatedFrame, "SRP payload of " +
                                                       std::to_string(payload.size()) +
                                                       " bytes, need " + std::to_string(need));
  }

  ByteReader r(payload);
  r.u8();
  SrpParse out;
  if (type == kSrpTalkerAdvertise) {
    SrpTalkerAdvertise adv;
    adv.stream_id = detail::read_stream_id(r);
    adv.traffic_spec.interval_numerator = r.u32();
    adv.traffic_spec.interval_denominator = r.u32();
    adv.traffic_spec.max_frames_per_interval = r.u16();
    adv.traffic_spec.max_frame_size = r.u16();
    adv.requirements.num_seamless_trees = r.u8();
    adv.requirements.max_latency_us = r.u32();
    adv.dst_mac_of_stream = r.array<6>();
    validate(adv);
    out.message = adv;
  } else {
    SrpListenerResponse resp;
    resp.stream_id = detail::read_stream_id(r);
    const std::uint8_t status = r.u8();
    if (status > 2) {
      throw WireError(WireErrorCode::BadEnum, "talker status " + std::to_string(status));
    }
    resp.talker_status = static_cast<TalkerStatus>(status);
    out.message = resp;
  }
  out.trailing_bytes = r.remaining();
  return out;
}

[[nodiscard]] inline RTagFrame parse_rtag(const EtherFrame& frame) {
  if (frame.payload.size() < kFrerMinPayload) {
    throw WireError(WireErrorCode::TruncatedFrame,
                    "FRER payload of " + std::to_string(frame.payload.size()) + " bytes, need " +
                        std::to_string(kFrerMinPayload));
  }
  ByteReader r(frame.payload);
  RTagFrame out;
  r.u16();  // reserved
  out.sequence_number = r.u16();
  out.encapsulated_ethertype = r.u16();
  out.payload_len = static_cast<std::uint32_t>(r.remaining());
  out.stream_handle.mac = frame.dst_mac;
  out.stream_handle.unique_id = r.u16();
  auto rest = r.rest();
  out.data.assign(rest.begin(), rest.end());
  return out;
}

/// Classifies and parses in one step. Returns nullopt for FrameKind::Other;
/// throws WireError for malformed TSN frames.
[[nodiscard]] inline std::optional<TsnFrame> decode_tsn(const EtherFrame& frame) {
  switch (classify(frame)) {
    case FrameKind::SrpTalker:
    case FrameKind::SrpListener: {
      auto parsed = parse_srp(frame.payload);
      return std::visit([](auto&& m) -> TsnFrame { return m; }, parsed.message);
    }
    case FrameKind::Frer:
      return parse_rtag(frame);
    case FrameKind::Other:
      break;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Encoding

struct Addressing {
  MacAddress dst{};
  MacAddress src{};
};

[[nodiscard]] inline Bytes encode_payload(const SrpTalkerAdvertise& adv) {
  validate(adv);
  Bytes out;
  out.reserve(kSrpTalkerLen);
  ByteWriter w(out);
  w.u8(kSrpTalkerAdvertise);
  detail::write_stream_id(w, adv.stream_id);
  w.u32(adv.traffic_spec.interval_numerator);
  w.u32(adv.traffic_spec.interval_denominator);
  w.u16(adv.traffic_spec.max_frames_per_interval);
  w.u16(adv.traffic_spec.max_frame_size);
  w.u8(adv.requirements.num_seamless_trees);
  w.u32(adv.requirements.max_latency_us);
  w.bytes(adv.dst_mac_of_stream);
  return out;
}

[[nodiscard]] inline Bytes encode_payload(const SrpListenerResponse& resp) {
  validate(resp);
  Bytes out;
  out.reserve(kSrpListenerLen);
  ByteWriter w(out);
  w.u8(kSrpListenerResponse);
  detail::write_stream_id(w, resp.stream_id);
  w.u8(static_cast<std::uint8_t>(resp.talker_status));
  return out;
}

[[nodiscard]] inline Bytes encode_payload(const RTagFrame& f) {
  validate(f);
  Bytes out;
  out.reserve(kRTagLen + f.payload_len);
  ByteWriter w(out);
  w.u16(0);
  w.u16(f.sequence_number);
  w.u16(f.encapsulated_ethertype);
  w.u16(f.stream_handle.unique_id);
  w.bytes(f.data);
  return out;
}

[[nodiscard]] inline EtherFrame encode(const SrpTalkerAdvertise& adv, const Addressing& addr) {
  return EtherFrame{addr.dst, addr.src, kEtherTypeSrp, encode_payload(adv)};
}

[[nodiscard]] inline EtherFrame encode(const SrpListenerResponse& resp, const Addressing& addr) {
  return EtherFrame{addr.dst, addr.src, kEtherTypeSrp, encode_payload(resp)};
}

/// The destination MAC of a FRER frame is the stream handle's MAC.
[[nodiscard]] inline EtherFrame encode(const RTagFrame& f, const MacAddress& src) {
  return EtherFrame{f.stream_handle.mac, src, kEtherTypeRTag, encode_payload(f)};
}

// ---------------------------------------------------------------------------
// Raw Ethernet bytes

[[nodiscard]] inline Bytes to_wire(const EtherFrame& f) {
  Bytes out(kEthernetHeaderLen + f.payload.size());
  auto it = std::copy(f.dst_mac.begin(), f.dst_mac.end(), out.begin());
  it = std::copy(f.src_mac.begin(), f.src_mac.end(), it);
  *it++ = static_cast<std::uint8_t>(f.ethertype >> 8);
  *it++ = static_cast<std::uint8_t>(f.ethertype);
  std::copy(f.payload.begin(), f.payload.end(), it);
  return out;
}

[[nodiscard]] inline EtherFrame from_wire(std::span<const std::uint8_t> raw) {
  if (raw.size() < kEthernetHeaderLen) {
    throw WireError(WireErrorCode::TruncatedFrame,
                    "ethernet frame of " + std::to_string(raw.size()) + " bytes");
  }
  ByteReader r(raw);
  EtherFrame f;
  f.dst_mac = r.array<6>();
  f.src_mac = r.array<6>();
  f.ethertype = r.u16();
  auto rest = r.rest();
  f.payload.assign(rest.begin(), rest.end());
  return f;
}

}  // namespace tsnzeek
