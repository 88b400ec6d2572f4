#pragma once

// Sequence recovery as performed by FRER elimination points, mirrored by the
// monitor so it can tell which frames a bridge would drop.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace tsnzeek {

enum class RecoveryVariant : std::uint8_t { Match, Vector };

inline std::string_view to_string(RecoveryVariant v) noexcept {
  return v == RecoveryVariant::Match ? "match" : "vector";
}

enum class AcceptDecision : std::uint8_t { Accept, DiscardDuplicate, DiscardStale, RogueOutOfRange };

inline std::string_view to_string(AcceptDecision d) noexcept {
  switch (d) {
    case AcceptDecision::Accept: return "Accept";
    case AcceptDecision::DiscardDuplicate: return "DiscardDuplicate";
    case AcceptDecision::DiscardStale: return "DiscardStale";
    case AcceptDecision::RogueOutOfRange: return "RogueOutOfRange";
  }
  return "";
}

inline constexpr std::uint16_t kMaxRecoveryHistory = 1024;

struct RecoveryParams {
  RecoveryVariant variant = RecoveryVariant::Vector;
  std::uint16_t history = 64;        // H, vector only
  std::uint16_t future_max = 2048;   // forward acceptance window, vector only
};

/// Signed circular distance from `ref` to `seq` in [-2^15, 2^15).
[[nodiscard]] constexpr std::int32_t sequence_delta(std::uint16_t seq, std::uint16_t ref) noexcept {
  const auto forward = static_cast<std::uint16_t>(seq - ref + 0x8000U);
  return static_cast<std::int32_t>(forward) - 0x8000;
}

struct TimeoutEvent {
  double last_frame_at = 0.0;
  double silent_s = 0.0;
  std::uint16_t last_sequence = 0;
};

class RecoveryState {
public:
  explicit RecoveryState(RecoveryParams params = {}) : params_(params) {
    if (params_.variant == RecoveryVariant::Vector &&
        (params_.history < 1 || params_.history > kMaxRecoveryHistory)) {
      throw std::invalid_argument("vector recovery history must be in [1, 1024]");
    }
    if (params_.variant == RecoveryVariant::Vector && params_.future_max < 1) {
      throw std::invalid_argument("vector recovery future window must be >= 1");
    }
    copies_.assign(window(), 0);
  }

  /// Runs the elimination decision for one frame and updates the state.
  /// The first frame, and the first frame after a timeout, (re)initialise the
  /// state and are accepted.
  AcceptDecision accept(std::uint16_t seq, double now) {
    last_frame_at_ = now;
    rebased_ = false;
    if (!initialized_ || timed_out_) {
      if (initialized_) {
        rebased_ = true;
        revoked_ = highest_;
      }
      reset_to(seq);
      timed_out_ = false;
      return AcceptDecision::Accept;
    }

    const std::int32_t d = sequence_delta(seq, highest_);
    if (params_.variant == RecoveryVariant::Match) {
      if (d > 0) {
        reset_to(seq);
        return AcceptDecision::Accept;
      }
      if (d == 0) {
        bump(0);
        return AcceptDecision::DiscardDuplicate;
      }
      return AcceptDecision::DiscardStale;
    }

    const auto h = static_cast<std::int32_t>(params_.history);
    if (d > 0 && d <= params_.future_max) {
      advance(static_cast<std::uint32_t>(d));
      return AcceptDecision::Accept;
    }
    if (d <= 0 && d > -h) {
      const auto age = static_cast<std::size_t>(-d);
      if (slot(age) == 0) {
        slot(age) = 1;
        return AcceptDecision::Accept;
      }
      bump(age);
      return AcceptDecision::DiscardDuplicate;
    }
    return AcceptDecision::RogueOutOfRange;
  }

  /// Edge-triggered: returns an event once per quiet period longer than timeout_s.
  std::optional<TimeoutEvent> check_timeout(double now, double timeout_s) {
    if (timeout_s <= 0) throw std::invalid_argument("recovery timeout must be > 0");
    if (!initialized_ || timed_out_) return std::nullopt;
    const double silent = now - last_frame_at_;
    if (silent <= timeout_s) return std::nullopt;
    timed_out_ = true;
    return TimeoutEvent{last_frame_at_, silent, highest_};
  }

  [[nodiscard]] const RecoveryParams& params() const noexcept { return params_; }
  [[nodiscard]] bool initialized() const noexcept { return initialized_; }
  [[nodiscard]] std::uint16_t highest_seq() const noexcept { return highest_; }
  [[nodiscard]] double last_frame_at() const noexcept { return last_frame_at_; }
  [[nodiscard]] bool timed_out() const noexcept { return timed_out_; }
  /// Copies seen of the current highest sequence number (saturates at 255).
  [[nodiscard]] std::uint8_t seen_this_seq() const noexcept { return copies_[head_]; }
  /// True when the most recent accept() re-initialised the state after a timeout.
  [[nodiscard]] bool rebased() const noexcept { return rebased_; }
  /// Highest sequence number revoked by the most recent timeout, if any.
  [[nodiscard]] std::optional<std::uint16_t> revoked_seq() const noexcept { return revoked_; }

  /// Copies seen of `seq` if it lies inside the tracked window.
  [[nodiscard]] std::optional<std::uint8_t> copies_of(std::uint16_t seq) const noexcept {
    if (!initialized_) return std::nullopt;
    const std::int32_t d = sequence_delta(seq, highest_);
    if (d > 0 || -d >= static_cast<std::int32_t>(window())) return std::nullopt;
    return copies_[index(static_cast<std::size_t>(-d))];
  }

private:
  [[nodiscard]] std::size_t window() const noexcept {
    return params_.variant == RecoveryVariant::Vector ? params_.history : 1;
  }
  [[nodiscard]] std::size_t index(std::size_t age) const noexcept {
    return (head_ + age) % copies_.size();
  }
  std::uint8_t& slot(std::size_t age) noexcept { return copies_[index(age)]; }

  void bump(std::size_t age) noexcept {
    auto& c = slot(age);
    if (c < 255) ++c;
  }

  void reset_to(std::uint16_t seq) {
    std::fill(copies_.begin(), copies_.end(), std::uint8_t{0});
    head_ = 0;
    highest_ = seq;
    copies_[0] = 1;
    initialized_ = true;
  }

  void advance(std::uint32_t d) {
    const std::size_t n = copies_.size();
    if (d >= n) {
      std::fill(copies_.begin(), copies_.end(), std::uint8_t{0});
      head_ = 0;
    } else {
      head_ = (head_ + n - d) % n;
      for (std::size_t i = 0; i < d; ++i) copies_[index(i)] = 0;
    }
    highest_ = static_cast<std::uint16_t>(highest_ + d);
    copies_[head_] = 1;
  }

  RecoveryParams params_;
  std::vector<std::uint8_t> copies_;  // copies_[index(age)] counts highest - age
  std::size_t head_ = 0;
  std::uint16_t highest_ = 0;
  double last_frame_at_ = 0.0;
  bool initialized_ = false;
  bool timed_out_ = false;
  bool rebased_ = false;
  std::optional<std::uint16_t> revoked_;
};

}  // namespace tsnzeek
