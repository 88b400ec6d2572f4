#pragma once

// Detection rules A1-A7 over parsed SRP/FRER frames and periodic sweeps.

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tsnzeek/bus.hpp"
#include "tsnzeek/config.hpp"
#include "tsnzeek/ledger.hpp"
#include "tsnzeek/notice.hpp"
#include "tsnzeek/recovery.hpp"
#include "tsnzeek/rolling_stats.hpp"
#include "tsnzeek/routes.hpp"

namespace tsnzeek {

/// Per-frame and periodic rules. Every handler returns the notices raised by
/// that input (possibly none) and never throws on well-formed models.
class Detector {
public:
  explicit Detector(DetectorConfig config)
      : config_((config.validate(), config)),
        stats_(config_.rolling_window, config_.min_samples) {}

  /// A1 thresholds and deviation, A2 rate limit, A3 modification of an
  /// accepted reservation. Ledger and statistics are updated exactly once.
  std::vector<Notice> on_srp_talker(const SrpTalkerAdvertise& adv, double now) {
    std::vector<Notice> out;
    const auto& spec = adv.traffic_spec;
    const double bandwidth = spec.bandwidth_bps();
    const double rate = spec.frame_rate();

    if (bandwidth > static_cast<double>(config_.max_bandwidth_bps) ||
        rate > config_.max_frame_rate) {
      out.push_back(make(NoticeCode::N1_ExcessiveResourceRequest, Rule::A1, now, adv.stream_id,
                         {{"bandwidth_bps", evidence_number(bandwidth)},
                          {"max_bandwidth_bps", evidence_number(config_.max_bandwidth_bps)},
                          {"frame_rate", evidence_number(rate)},
                          {"max_frame_rate", evidence_number(config_.max_frame_rate)}},
                         "requested " + evidence_number(bandwidth) + " bit/s at " +
                             evidence_number(rate) + " frames/s exceeds configured maximum"));
    }

    const DeviationReport dev = stats_.update(bandwidth, rate);
    if (dev.deviates(config_.deviation_factor_k)) {
      out.push_back(make(NoticeCode::N2_DeviatingResourceRequest, Rule::A1, now, adv.stream_id,
                         {{"bandwidth_ratio", evidence_number(*dev.bandwidth_ratio)},
                          {"frame_rate_ratio", evidence_number(*dev.frame_rate_ratio)},
                          {"factor", evidence_number(config_.deviation_factor_k)}},
                         "request deviates from the rolling average by a factor of " +
                             evidence_number(*dev.bandwidth_ratio)));
    }

    request_times_.push_back(now);
    while (!request_times_.empty() &&
           request_times_.front() <= now - config_.request_rate_limit.window_s) {
      request_times_.pop_front();
    }
    if (request_times_.size() > config_.request_rate_limit.count) {
      out.push_back(make(NoticeCode::N3_TooManyRequests, Rule::A2, now, adv.stream_id,
                         {{"requests", evidence_number(request_times_.size())},
                          {"limit", evidence_number(config_.request_rate_limit.count)},
                          {"window_s", evidence_number(config_.request_rate_limit.window_s)}},
                         evidence_number(request_times_.size()) + " SRP requests within " +
                             evidence_number(config_.request_rate_limit.window_s) + " s"));
    }

    std::optional<StreamReservation> previous;
    if (const auto* r = ledger_.find(adv.stream_id)) previous = *r;
    if (ledger_.upsert(adv, now) == UpsertResult::ModifiesExisting) {
      out.push_back(make(
          NoticeCode::N4_ChangingExistingAllocation, Rule::A3, now, adv.stream_id,
          {{"previous_bandwidth_bps", evidence_number(previous->traffic_spec.bandwidth_bps())},
           {"requested_bandwidth_bps", evidence_number(bandwidth)},
           {"previous_redundancy", evidence_number(previous->redundancy_degree)},
           {"requested_redundancy", evidence_number(adv.requirements.num_seamless_trees)}},
          "SRP request for already accepted stream " + adv.stream_id.to_hex()));
    }
    return out;
  }

  /// Updates reservation status only; acceptance feeds the A3/A4 context.
  std::vector<Notice> on_srp_listener(const SrpListenerResponse& resp, double now) {
    ledger_.apply_listener_response(resp, now);
    return {};
  }

  /// A5 forged sequence numbers and excess copies, A7 re-based sequence after
  /// a recovery timeout.
  std::vector<Notice> on_frer_frame(const RTagFrame& frame, double now) {
    std::vector<Notice> out;
    const auto owner = ledger_.resolve(frame.stream_handle);
    ledger_.record_data_frame(frame.stream_handle, now);
    const StreamId id = owner.value_or(frame.stream_handle);
    std::uint8_t redundancy = config_.default_redundancy;
    if (owner) redundancy = ledger_.find(*owner)->redundancy_degree;

    auto& state =
        recovery_.try_emplace(frame.stream_handle, config_.recovery_params()).first->second;
    const std::uint16_t seq = frame.sequence_number;
    const std::uint16_t expected = state.highest_seq();
    const AcceptDecision decision = state.accept(seq, now);

    if (state.rebased()) {
      const std::uint16_t previous = *state.revoked_seq();
      const std::int32_t delta = sequence_delta(seq, previous);
      if (delta <= 0 || delta > config_.vector_future_max) {
        out.push_back(make(NoticeCode::N7_ExcessiveMemberStreams, Rule::A7, now, id,
                           {{"observed", evidence_number(seq)},
                            {"previous", evidence_number(previous)},
                            {"delta", evidence_number(delta)}},
                           "stream resumed after recovery timeout with new sequence " +
                               std::to_string(seq) + " (previous " + std::to_string(previous) +
                               ")"));
      }
      return out;
    }

    auto out_of_order = [&] {
      out.push_back(make(NoticeCode::N6_OutOfOrderFrames, Rule::A5, now, id,
                         {{"observed", evidence_number(seq)},
                          {"expected", evidence_number(expected)},
                          {"decision", std::string(to_string(decision))}},
                         "out of order frame with sequence number " + std::to_string(seq) +
                             ", expected " + std::to_string(expected)));
    };

    switch (decision) {
      case AcceptDecision::Accept:
        break;
      case AcceptDecision::DiscardDuplicate: {
        const std::uint8_t copies = state.copies_of(seq).value_or(0);
        if (copies > redundancy) {
          out_of_order();
          out.push_back(make(NoticeCode::N7_ExcessiveMemberStreams, Rule::A5, now, id,
                             {{"sequence", evidence_number(seq)},
                              {"copies", evidence_number(copies)},
                              {"redundancy", evidence_number(redundancy)}},
                             std::to_string(copies) + " copies of sequence number " +
                                 std::to_string(seq) + " exceed redundancy degree " +
                                 std::to_string(redundancy)));
        }
        break;
      }
      case AcceptDecision::DiscardStale:
      case AcceptDecision::RogueOutOfRange:
        out_of_order();
        break;
    }
    return out;
  }

  /// A4 dangling reservations and A7 silent member streams. Both edge-triggered.
  std::vector<Notice> periodic_sweep(double now) {
    std::vector<Notice> out;
    for (auto& [id, r] : ledger_.entries()) {
      if (r.status != ReservationStatus::Accepted || r.dangling_reported) continue;
      const double since = r.last_data_at.value_or(r.accepted_at.value_or(r.registered_at));
      if (now - since > config_.dangling_timeout_s) {
        r.dangling_reported = true;
        out.push_back(make(NoticeCode::N5_DanglingResources, Rule::A4, now, id, {},
                           "accepted reservation " + id.to_hex() + " carried no data for " +
                               evidence_number(now - since) + " s"));
      }
    }
    for (auto& [handle, state] : recovery_) {
      if (auto ev = state.check_timeout(now, config_.recovery_timeout_s)) {
        const StreamId id = ledger_.resolve(handle).value_or(handle);
        out.push_back(make(NoticeCode::N8_TerminatedMemberStreams, Rule::A7, now, id,
                           {{"silent_s", evidence_number(ev->silent_s)},
                            {"timeout_s", evidence_number(config_.recovery_timeout_s)},
                            {"last_sequence", evidence_number(ev->last_sequence)}},
                           "member streams of " + id.to_hex() + " silent for " +
                               evidence_number(ev->silent_s) + " s"));
      }
    }
    return out;
  }

  /// Dispatches a bus event to the matching handler. Notice events are ignored.
  std::vector<Notice> on_event(const BusEvent& ev) {
    struct Visitor {
      Detector& d;
      double ts;
      std::vector<Notice> operator()(const SrpTalkerAdvertise& m) { return d.on_srp_talker(m, ts); }
      std::vector<Notice> operator()(const SrpListenerResponse& m) {
        return d.on_srp_listener(m, ts);
      }
      std::vector<Notice> operator()(const RTagFrame& m) { return d.on_frer_frame(m, ts); }
      std::vector<Notice> operator()(const Notice&) { return {}; }
    };
    return std::visit(Visitor{*this, ev.timestamp}, ev.payload);
  }

  [[nodiscard]] const DetectorConfig& config() const noexcept { return config_; }
  [[nodiscard]] const ReservationLedger& ledger() const noexcept { return ledger_; }
  [[nodiscard]] const RollingStats& stats() const noexcept { return stats_; }
  [[nodiscard]] const std::map<StreamId, RecoveryState>& recovery() const noexcept {
    return recovery_;
  }

private:
  static Notice make(NoticeCode code, Rule rule, double ts, const StreamId& id, Evidence ev,
                     std::string msg) {
    Notice n;
    n.code = code;
    n.rule = rule;
    n.ts = ts;
    n.stream_id = id;
    n.evidence = std::move(ev);
    n.msg = std::move(msg);
    return n;
  }

  DetectorConfig config_;
  ReservationLedger ledger_;
  RollingStats stats_;
  std::deque<double> request_times_;
  std::map<StreamId, RecoveryState> recovery_;  // keyed by FRER stream handle
};

/// Collapses notices with the same (code, stream) arriving within `window_s`
/// of the last emitted one. The next emitted notice carries the count of
/// suppressed ones in Notice::repeats.
class NoticeDeduplicator {
public:
  explicit NoticeDeduplicator(double window_s) : window_s_(window_s) {}

  std::optional<Notice> admit(Notice n) {
    auto key = std::make_pair(n.code, n.stream_id);
    auto it = last_.find(key);
    if (it != last_.end() && n.ts - it->second.emitted_at < window_s_) {
      ++it->second.suppressed;
      ++total_suppressed_;
      return std::nullopt;
    }
    Slot& slot = last_[key];
    n.repeats = slot.suppressed;
    slot.suppressed = 0;
    slot.emitted_at = n.ts;
    return n;
  }

  [[nodiscard]] std::uint64_t total_suppressed() const noexcept { return total_suppressed_; }

private:
  struct Slot {
    double emitted_at = 0.0;
    std::uint32_t suppressed = 0;
  };
  double window_s_;
  std::map<std::pair<NoticeCode, std::optional<StreamId>>, Slot> last_;
  std::uint64_t total_suppressed_ = 0;
};

/// Drives a Detector from a time-ordered event stream, running periodic
/// sweeps on the capture clock and deduplicating output.
class DetectionEngine {
public:
  explicit DetectionEngine(DetectorConfig config)
      : detector_(std::move(config)), dedup_(detector_.config().dedup_window_s) {}

  /// Route findings are configuration-derived and bypass deduplication.
  std::vector<Notice> load_routes(const RouteConfig& routes, double ts) {
    return check_routes(routes, ts).notices;
  }

  std::vector<Notice> process(const BusEvent& ev) {
    std::vector<Notice> out;
    advance_clock(ev.timestamp, out);
    admit_all(detector_.on_event(ev), out);
    return out;
  }

  /// Runs the sweeps due up to `now` without an event.
  std::vector<Notice> tick(double now) {
    std::vector<Notice> out;
    advance_clock(now, out);
    return out;
  }

  /// Final sweep at the end of input.
  std::vector<Notice> finish() {
    std::vector<Notice> out;
    if (last_ts_ && (!last_sweep_ || *last_sweep_ < *last_ts_)) {
      admit_all(detector_.periodic_sweep(*last_ts_), out);
      last_sweep_ = last_ts_;
    }
    return out;
  }

  [[nodiscard]] const Detector& detector() const noexcept { return detector_; }
  [[nodiscard]] const NoticeDeduplicator& dedup() const noexcept { return dedup_; }

private:
  void advance_clock(double now, std::vector<Notice>& out) {
    const double period = detector_.config().sweep_period_s;
    if (!next_sweep_) next_sweep_ = now + period;
    while (*next_sweep_ <= now) {
      admit_all(detector_.periodic_sweep(*next_sweep_), out);
      last_sweep_ = next_sweep_;
      *next_sweep_ += period;
    }
    if (!last_ts_ || now > *last_ts_) last_ts_ = now;
  }

  void admit_all(std::vector<Notice> notices, std::vector<Notice>& out) {
    for (auto& n : notices) {
      if (auto kept = dedup_.admit(std::move(n))) out.push_back(std::move(*kept));
    }
  }

  Detector detector_;
  NoticeDeduplicator dedup_;
  std::optional<double> next_sweep_;
  std::optional<double> last_sweep_;
  std::optional<double> last_ts_;
};

}  // namespace tsnzeek
