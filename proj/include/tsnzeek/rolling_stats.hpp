#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>

namespace tsnzeek {

/// Ratios of a new request to the rolling means before it was added.
/// Unset while fewer than the configured minimum samples have been seen.
struct DeviationReport {
  std::optional<double> bandwidth_ratio;
  std::optional<double> frame_rate_ratio;

  /// True if either ratio lies outside [1/k, k].
  [[nodiscard]] bool deviates(double k) const noexcept {
    auto off = [k](const std::optional<double>& r) { return r && (*r > k || *r < 1.0 / k); };
    return off(bandwidth_ratio) || off(frame_rate_ratio);
  }
};

/// Rolling window over requested bandwidth and frame rate with incremental means.
class RollingStats {
public:
  RollingStats(std::size_t window, std::uint32_t min_samples)
      : window_(window), min_samples_(min_samples) {
    if (window_ == 0) throw std::invalid_argument("rolling window must be >= 1");
  }

  DeviationReport update(double bandwidth_bps, double frame_rate) {
    if (!(bandwidth_bps > 0) || !(frame_rate > 0)) {
      throw std::invalid_argument("rolling stats samples must be finite and > 0");
    }
    DeviationReport report;
    if (count_ >= min_samples_ && !samples_.empty()) {
      report.bandwidth_ratio = bandwidth_bps / mean_bandwidth();
      report.frame_rate_ratio = frame_rate / mean_frame_rate();
    }
    samples_.push_back({bandwidth_bps, frame_rate});
    sum_bandwidth_ += bandwidth_bps;
    sum_rate_ += frame_rate;
    if (samples_.size() > window_) {
      sum_bandwidth_ -= samples_.front().bandwidth;
      sum_rate_ -= samples_.front().rate;
      samples_.pop_front();
    }
    if (count_ < UINT32_MAX) ++count_;
    return report;
  }

  [[nodiscard]] double mean_bandwidth() const noexcept {
    return samples_.empty() ? 0.0 : sum_bandwidth_ / static_cast<double>(samples_.size());
  }
  [[nodiscard]] double mean_frame_rate() const noexcept {
    return samples_.empty() ? 0.0 : sum_rate_ / static_cast<double>(samples_.size());
  }
  /// Samples seen so far, including those that left the window.
  [[nodiscard]] std::uint32_t count() const noexcept { return count_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] std::size_t window() const noexcept { return window_; }

  struct Sample {
    double bandwidth;
    double rate;
  };
  [[nodiscard]] const std::deque<Sample>& samples() const noexcept { return samples_; }

private:
  std::size_t window_;
  std::uint32_t min_samples_;
  std::deque<Sample> samples_;
  double sum_bandwidth_ = 0.0;
  double sum_rate_ = 0.0;
  std::uint32_t count_ = 0;
};

}  // namespace tsnzeek
