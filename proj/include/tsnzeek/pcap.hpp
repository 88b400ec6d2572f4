#pragma once

// Classic microsecond pcap (not pcapng), Ethernet link type only.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tsnzeek/wire.hpp"

namespace tsnzeek {

inline constexpr std::uint32_t kPcapMagic = 0xA1B2C3D4;
inline constexpr std::uint32_t kPcapMagicSwapped = 0xD4C3B2A1;
inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::uint32_t kPcapSnapLen = 65535;
inline constexpr std::size_t kPcapFileHeaderLen = 24;
inline constexpr std::size_t kPcapRecordHeaderLen = 16;

enum class PcapErrorCode { BadMagic, UnsupportedLinkType, TruncatedRecord, IoFailure, OutOfOrder };

inline std::string_view to_string(PcapErrorCode c) noexcept {
  switch (c) {
    case PcapErrorCode::BadMagic: return "BadMagic";
    case PcapErrorCode::UnsupportedLinkType: return "UnsupportedLinkType";
    case PcapErrorCode::TruncatedRecord: return "TruncatedRecord";
    case PcapErrorCode::IoFailure: return "IoFailure";
    case PcapErrorCode::OutOfOrder: return "OutOfOrder";
  }
  return "";
}

class PcapError : public std::runtime_error {
public:
  PcapError(PcapErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  [[nodiscard]] PcapErrorCode code() const noexcept { return code_; }

private:
  PcapErrorCode code_;
};

/// A captured frame as raw bytes; decoding is left to the consumer.
struct RawFrame {
  double ts = 0.0;
  Bytes bytes;
};

struct TimestampedFrame {
  double ts = 0.0;  // seconds since epoch, microsecond precision
  EtherFrame frame;

  bool operator==(const TimestampedFrame&) const = default;
};

/// Seconds to integral microseconds, rounding to nearest.
[[nodiscard]] inline std::int64_t to_micros(double ts) noexcept {
  return static_cast<std::int64_t>(std::llround(ts * 1e6));
}

[[nodiscard]] inline double from_micros(std::int64_t us) noexcept {
  const std::int64_t sec = us / 1'000'000;
  const std::int64_t frac = us % 1'000'000;
  return static_cast<double>(sec) + static_cast<double>(frac) * 1e-6;
}

class PcapReader {
public:
  explicit PcapReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw PcapError(PcapErrorCode::IoFailure, "cannot open " + path);
    std::uint8_t header[kPcapFileHeaderLen];
    if (!in_.read(reinterpret_cast<char*>(header), sizeof header)) {
      throw PcapError(PcapErrorCode::BadMagic, path + ": shorter than a pcap header");
    }
    const std::uint32_t magic = le32(header);
    if (magic == kPcapMagic) {
      swapped_ = false;
    } else if (magic == kPcapMagicSwapped) {
      swapped_ = true;
    } else {
      throw PcapError(PcapErrorCode::BadMagic, path + ": magic " + hex(magic));
    }
    snaplen_ = u32(header + 16);
    link_type_ = u32(header + 20);
    if (link_type_ != kLinkTypeEthernet) {
      throw PcapError(PcapErrorCode::UnsupportedLinkType,
                      path + ": link type " + std::to_string(link_type_));
    }
  }

  /// Next record in file order, or nullopt at a clean end of file.
  std::optional<RawFrame> next() {
    std::uint8_t rec[kPcapRecordHeaderLen];
    in_.read(reinterpret_cast<char*>(rec), sizeof rec);
    if (in_.gcount() == 0 && in_.eof()) return std::nullopt;
    if (in_.gcount() != static_cast<std::streamsize>(sizeof rec)) {
      throw PcapError(PcapErrorCode::TruncatedRecord, "partial record header");
    }
    const std::uint32_t sec = u32(rec);
    const std::uint32_t usec = u32(rec + 4);
    const std::uint32_t incl = u32(rec + 8);
    if (usec >= 1'000'000) {
      throw PcapError(PcapErrorCode::TruncatedRecord, "microsecond field out of range");
    }
    if (incl > std::max(snaplen_, kPcapSnapLen)) {
      throw PcapError(PcapErrorCode::TruncatedRecord,
                      "record length " + std::to_string(incl) + " exceeds snaplen");
    }
    RawFrame out;
    out.ts = from_micros(static_cast<std::int64_t>(sec) * 1'000'000 + usec);
    out.bytes.resize(incl);
    if (incl > 0 && !in_.read(reinterpret_cast<char*>(out.bytes.data()), incl)) {
      throw PcapError(PcapErrorCode::TruncatedRecord, "record data shorter than " +
                                                          std::to_string(incl) + " bytes");
    }
    ++records_;
    return out;
  }

  [[nodiscard]] std::uint32_t link_type() const noexcept { return link_type_; }
  [[nodiscard]] std::uint64_t records_read() const noexcept { return records_; }

private:
  static std::uint32_t le32(const std::uint8_t* p) noexcept {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  static std::uint32_t be32(const std::uint8_t* p) noexcept {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
  }
  std::uint32_t u32(const std::uint8_t* p) const noexcept { return swapped_ ? be32(p) : le32(p); }
  static std::string hex(std::uint32_t v) {
    char buf[11];
    std::snprintf(buf, sizeof buf, "0x%08X", v);
    return buf;
  }

  std::ifstream in_;
  bool swapped_ = false;
  std::uint32_t snaplen_ = kPcapSnapLen;
  std::uint32_t link_type_ = 0;
  std::uint64_t records_ = 0;
};

/// Writes little-endian microsecond pcap. Timestamps must not decrease.
class PcapWriter {
public:
  explicit PcapWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw PcapError(PcapErrorCode::IoFailure, "cannot create " + path);
    std::uint8_t header[kPcapFileHeaderLen]{};
    put32(header, kPcapMagic);
    header[4] = 2;  // version 2.4
    header[6] = 4;
    put32(header + 16, kPcapSnapLen);
    put32(header + 20, kLinkTypeEthernet);
    write_raw(header, sizeof header);
  }

  void write(double ts, std::span<const std::uint8_t> bytes) {
    const std::int64_t us = to_micros(ts);
    if (us < 0) throw PcapError(PcapErrorCode::OutOfOrder, "negative timestamp");
    if (us < last_us_) {
      throw PcapError(PcapErrorCode::OutOfOrder, "timestamp decreases in " + path_);
    }
    last_us_ = us;
    std::uint8_t rec[kPcapRecordHeaderLen];
    put32(rec, static_cast<std::uint32_t>(us / 1'000'000));
    put32(rec + 4, static_cast<std::uint32_t>(us % 1'000'000));
    put32(rec + 8, static_cast<std::uint32_t>(bytes.size()));
    put32(rec + 12, static_cast<std::uint32_t>(bytes.size()));
    write_raw(rec, sizeof rec);
    write_raw(bytes.data(), bytes.size());
  }

  void write(const TimestampedFrame& f) { write(f.ts, to_wire(f.frame)); }
  void write(const RawFrame& f) { write(f.ts, f.bytes); }

  void close() {
    out_.flush();
    if (!out_) throw PcapError(PcapErrorCode::IoFailure, "write failed for " + path_);
    out_.close();
  }

private:
  static void put32(std::uint8_t* p, std::uint32_t v) noexcept {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
  void write_raw(const void* data, std::size_t n) {
    if (n == 0) return;
    if (!out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n))) {
      throw PcapError(PcapErrorCode::IoFailure, "write failed for " + path_);
    }
  }

  std::string path_;
  std::ofstream out_;
  std::int64_t last_us_ = 0;
};

/// Reads every record and decodes the Ethernet header. Records too short to be
/// Ethernet raise WireError.
[[nodiscard]] inline std::vector<TimestampedFrame> read_pcap(const std::string& path) {
  PcapReader reader(path);
  std::vector<TimestampedFrame> out;
  while (auto rec = reader.next()) {
    out.push_back({rec->ts, from_wire(rec->bytes)});
  }
  return out;
}

/// Validates ordering before touching the file.
template <typename Frame>
void write_pcap(const std::string& path, std::span<const Frame> frames) {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (to_micros(frames[i].ts) < to_micros(frames[i - 1].ts)) {
      throw PcapError(PcapErrorCode::OutOfOrder,
                      "frame " + std::to_string(i) + " precedes its predecessor");
    }
  }
  PcapWriter w(path);
  for (const auto& f : frames) w.write(f);
  w.close();
}

inline void write_pcap(const std::string& path, const std::vector<TimestampedFrame>& frames) {
  write_pcap<TimestampedFrame>(path, std::span<const TimestampedFrame>(frames));
}

inline void write_pcap(const std::string& path, const std::vector<RawFrame>& frames) {
  write_pcap<RawFrame>(path, std::span<const RawFrame>(frames));
}

}  // namespace tsnzeek
