#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tsnzeek/wire.hpp"

namespace tsnzeek {

enum class ReservationStatus : std::uint8_t { Requested, Accepted, Failed };

inline std::string_view to_string(ReservationStatus s) noexcept {
  switch (s) {
    case ReservationStatus::Requested: return "Requested";
    case ReservationStatus::Accepted: return "Accepted";
    case ReservationStatus::Failed: return "Failed";
  }
  return "";
}

struct StreamReservation {
  StreamId stream_id;
  TrafficSpecification traffic_spec;
  std::uint8_t redundancy_degree = 1;
  MacAddress dst_mac{};
  ReservationStatus status = ReservationStatus::Requested;
  double registered_at = 0.0;
  std::optional<double> accepted_at;
  std::optional<double> last_data_at;
  std::uint32_t request_count = 0;
  // Advertisements received for this stream after it was accepted.
  std::uint32_t modification_attempts = 0;
  bool dangling_reported = false;

  bool operator==(const StreamReservation&) const = default;
};

enum class UpsertResult : std::uint8_t { New, ModifiesExisting };

/// Reservation ledger keyed by StreamId. Single writer.
class ReservationLedger {
public:
  /// Records an advertisement. A repeat while still Requested is a retry and
  /// refreshes the request; a repeat after Failed starts a fresh request. Only
  /// an advertisement for an Accepted stream is a modification, and it leaves
  /// the accepted entry untouched.
  UpsertResult upsert(const SrpTalkerAdvertise& adv, double now) {
    auto it = entries_.find(adv.stream_id);
    if (it != entries_.end() && it->second.status == ReservationStatus::Accepted) {
      ++it->second.request_count;
      ++it->second.modification_attempts;
      return UpsertResult::ModifiesExisting;
    }

    if (it == entries_.end()) {
      StreamReservation r;
      r.stream_id = adv.stream_id;
      r.registered_at = now;
      it = entries_.emplace(adv.stream_id, r).first;
    } else {
      if (auto h = handles_.find(handle_of(it->second));
          h != handles_.end() && h->second == adv.stream_id) {
        handles_.erase(h);
      }
      if (it->second.status == ReservationStatus::Failed) {
        const auto count = it->second.request_count;
        it->second = StreamReservation{};
        it->second.stream_id = adv.stream_id;
        it->second.registered_at = now;
        it->second.request_count = count;
      }
    }
    auto& r = it->second;
    r.traffic_spec = adv.traffic_spec;
    r.redundancy_degree = std::max<std::uint8_t>(1, adv.requirements.num_seamless_trees);
    r.dst_mac = adv.dst_mac_of_stream;
    ++r.request_count;
    handles_[handle_of(r)] = r.stream_id;
    return UpsertResult::New;
  }

  /// Ready accepts and Failed rejects a Requested entry. Other combinations
  /// leave the entry as is. Unknown streams are counted as orphans.
  std::optional<ReservationStatus> apply_listener_response(const SrpListenerResponse& resp,
                                                           double now) {
    auto it = entries_.find(resp.stream_id);
    if (it == entries_.end()) {
      ++orphan_responses_;
      return std::nullopt;
    }
    auto& r = it->second;
    if (r.status == ReservationStatus::Requested) {
      if (resp.talker_status == TalkerStatus::Ready) {
        r.status = ReservationStatus::Accepted;
        r.accepted_at = std::max(now, r.registered_at);
      } else if (resp.talker_status == TalkerStatus::Failed) {
        r.status = ReservationStatus::Failed;
      }
    }
    return r.status;
  }

  /// Marks data activity for the reservation that owns a FRER stream handle.
  /// Returns false (and counts unreserved traffic) when no reservation owns it.
  bool record_data_frame(const StreamId& handle, double now) {
    auto owner = resolve(handle);
    if (!owner) {
      ++unreserved_frames_;
      return false;
    }
    auto& r = entries_.at(*owner);
    const double t = std::max(now, r.registered_at);
    if (!r.last_data_at || *r.last_data_at < t) r.last_data_at = t;
    r.dangling_reported = false;
    return true;
  }

  /// Maps a FRER stream handle (destination MAC, unique id) to its reservation.
  [[nodiscard]] std::optional<StreamId> resolve(const StreamId& handle) const {
    auto it = handles_.find(handle);
    if (it == handles_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] const StreamReservation* find(const StreamId& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }
  StreamReservation* find(const StreamId& id) {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  [[nodiscard]] const std::map<StreamId, StreamReservation>& entries() const noexcept {
    return entries_;
  }
  std::map<StreamId, StreamReservation>& entries() noexcept { return entries_; }

  [[nodiscard]] std::uint64_t orphan_responses() const noexcept { return orphan_responses_; }
  [[nodiscard]] std::uint64_t unreserved_frames() const noexcept { return unreserved_frames_; }

  /// Deterministic JSON snapshot (ordered by StreamId).
  [[nodiscard]] nlohmann::json snapshot() const {
    nlohmann::json streams = nlohmann::json::array();
    for (const auto& [id, r] : entries_) {
      nlohmann::json e = {
          {"stream_id", id.to_hex()},
          {"status", to_string(r.status)},
          {"dst_mac", format_mac(r.dst_mac)},
          {"redundancy_degree", r.redundancy_degree},
          {"registered_at", r.registered_at},
          {"request_count", r.request_count},
          {"modification_attempts", r.modification_attempts},
          {"traffic_spec",
           {{"interval_numerator", r.traffic_spec.interval_numerator},
            {"interval_denominator", r.traffic_spec.interval_denominator},
            {"max_frames_per_interval", r.traffic_spec.max_frames_per_interval},
            {"max_frame_size", r.traffic_spec.max_frame_size}}},
      };
      e["accepted_at"] = r.accepted_at ? nlohmann::json(*r.accepted_at) : nlohmann::json();
      e["last_data_at"] = r.last_data_at ? nlohmann::json(*r.last_data_at) : nlohmann::json();
      streams.push_back(std::move(e));
    }
    return {{"streams", std::move(streams)},
            {"orphan_responses", orphan_responses_},
            {"unreserved_frames", unreserved_frames_}};
  }

private:
  static StreamId handle_of(const StreamReservation& r) {
    return StreamId{r.dst_mac, r.stream_id.unique_id};
  }

  std::map<StreamId, StreamReservation> entries_;
  std::map<StreamId, StreamId> handles_;
  std::uint64_t orphan_responses_ = 0;
  std::uint64_t unreserved_frames_ = 0;
};

}  // namespace tsnzeek
