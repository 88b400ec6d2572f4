#pragma once

// Feeds captured frames into the event bus: decode, classify, parse, publish.

#include <algorithm>
#include <array>
#include <chrono>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tsnzeek/bus.hpp"
#include "tsnzeek/pcap.hpp"
#include "tsnzeek/wire.hpp"

namespace tsnzeek {

/// Anything with `std::optional<RawFrame> next()`.
template <typename S>
concept FrameSource = requires(S s) {
  { s.next() } -> std::same_as<std::optional<RawFrame>>;
};

/// Adapts an in-memory frame sequence to FrameSource.
template <typename Frame>
class SpanSource {
public:
  explicit SpanSource(std::span<const Frame> frames) : frames_(frames) {}

  std::optional<RawFrame> next() {
    if (pos_ >= frames_.size()) return std::nullopt;
    const auto& f = frames_[pos_++];
    if constexpr (std::same_as<Frame, RawFrame>) {
      return f;
    } else {
      return RawFrame{f.ts, to_wire(f.frame)};
    }
  }

private:
  std::span<const Frame> frames_;
  std::size_t pos_ = 0;
};

template <typename Frame>
SpanSource(std::span<const Frame>) -> SpanSource<Frame>;

/// Latency histogram with 1 us buckets up to 100 ms plus an overflow bucket.
class LagHistogram {
public:
  static constexpr std::size_t kBuckets = 100'000;

  LagHistogram() : buckets_(kBuckets + 1, 0) {}

  void record(std::chrono::nanoseconds lag) {
    const auto us = std::max<std::int64_t>(0, lag.count() / 1000);
    ++buckets_[static_cast<std::size_t>(std::min<std::int64_t>(us, kBuckets))];
    ++count_;
    max_ns_ = std::max<std::int64_t>(max_ns_, lag.count());
  }

  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }

  /// Quantile in milliseconds at bucket resolution (upper bucket edge).
  [[nodiscard]] double quantile_ms(double q) const {
    if (count_ == 0) return 0.0;
    const auto target = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(count_)));
    std::uint64_t seen = 0;
    for (std::size_t i = 0; i < buckets_.size(); ++i) {
      seen += buckets_[i];
      if (seen >= std::max<std::uint64_t>(1, target)) {
        return i == kBuckets ? max_ms() : static_cast<double>(i + 1) / 1000.0;
      }
    }
    return max_ms();
  }

  [[nodiscard]] double max_ms() const noexcept { return static_cast<double>(max_ns_) / 1e6; }

private:
  std::vector<std::uint64_t> buckets_;
  std::uint64_t count_ = 0;
  std::int64_t max_ns_ = 0;
};

struct ReplayReport {
  std::uint64_t frames_in = 0;
  std::uint64_t frames_published = 0;
  std::uint64_t other_count = 0;
  std::uint64_t parse_errors = 0;
  std::array<std::uint64_t, 4> published_by_kind{};  // indexed by FrameKind
  double lag_median_ms = 0.0;
  double lag_p99_ms = 0.0;
  double lag_max_ms = 0.0;
  double wall_s = 0.0;
  double capture_span_s = 0.0;
  std::optional<double> first_ts;
  std::optional<double> last_ts;

  /// Every frame is accounted for exactly once.
  [[nodiscard]] bool lossless() const noexcept {
    return frames_in == frames_published + other_count + parse_errors;
  }
};

/// Replays `source` into `bus`. speed_factor scales inter-frame gaps by
/// 1/speed_factor; 0 replays as fast as possible. Parse errors are counted,
/// never fatal. Published timestamps never decrease.
template <FrameSource Source>
ReplayReport replay(Source& source, EventBus& bus, double speed_factor = 0.0) {
  if (speed_factor < 0) throw std::invalid_argument("speed_factor must be >= 0");
  using Clock = std::chrono::steady_clock;
  ReplayReport report;
  LagHistogram lag;
  const auto wall_start = Clock::now();
  double last_published_ts = 0.0;

  while (auto raw = source.next()) {
    ++report.frames_in;
    if (!report.first_ts) report.first_ts = raw->ts;
    report.last_ts = raw->ts;

    if (speed_factor > 0) {
      const double offset = (raw->ts - *report.first_ts) / speed_factor;
      std::this_thread::sleep_until(wall_start + std::chrono::duration_cast<Clock::duration>(
                                                     std::chrono::duration<double>(offset)));
    }

    const auto handoff = Clock::now();
    std::optional<TsnFrame> model;
    FrameKind kind = FrameKind::Other;
    try {
      EtherFrame frame = from_wire(raw->bytes);
      if (frame.payload.size() > kMaxEthernetPayload) {
        throw WireError(WireErrorCode::TruncatedFrame, "payload exceeds 1500 bytes");
      }
      kind = classify(frame);
      model = decode_tsn(frame);
    } catch (const WireError&) {
      ++report.parse_errors;
      lag.record(Clock::now() - handoff);
      continue;
    } catch (const OutOfBounds&) {
      ++report.parse_errors;
      lag.record(Clock::now() - handoff);
      continue;
    }
    lag.record(Clock::now() - handoff);

    if (!model) {
      ++report.other_count;
      continue;
    }
    const double ts = std::max(raw->ts, last_published_ts);
    last_published_ts = ts;
    bus.publish(make_event(ts, std::move(*model)));
    ++report.frames_published;
    ++report.published_by_kind[static_cast<std::size_t>(kind)];
  }

  report.wall_s = std::chrono::duration<double>(Clock::now() - wall_start).count();
  if (report.first_ts) report.capture_span_s = *report.last_ts - *report.first_ts;
  report.lag_median_ms = lag.quantile_ms(0.5);
  report.lag_p99_ms = lag.quantile_ms(0.99);
  report.lag_max_ms = lag.max_ms();
  return report;
}

}  // namespace tsnzeek
