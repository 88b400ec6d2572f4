#pragma once

// End-to-end pipeline: replay -> ingest bus -> detection -> notice bus -> sink.

#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "tsnzeek/bus.hpp"
#include "tsnzeek/config.hpp"
#include "tsnzeek/detector.hpp"
#include "tsnzeek/notice.hpp"
#include "tsnzeek/notice_log.hpp"
#include "tsnzeek/replay.hpp"
#include "tsnzeek/routes.hpp"

namespace tsnzeek {

struct MonitorOptions {
  DetectorConfig config;
  std::optional<RouteConfig> routes;
  double speed_factor = 0.0;
  // Stamp notices with capture time instead of wall time.
  bool fixed_clock = false;
  std::size_t bus_capacity = 4096;
};

struct MonitorResult {
  ReplayReport replay;
  std::vector<Notice> notices;  // in emission order
  std::map<NoticeCode, std::uint64_t> counts;
  std::uint64_t suppressed = 0;
};

using NoticeSink = std::function<void(const Notice&)>;

namespace detail {
inline double wall_clock_now() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}
}  // namespace detail

/// Runs the full pipeline over `source`. Replay runs on its own thread, the
/// notice sink on another; detection runs on the calling thread. Errors from
/// the source are rethrown after all threads have stopped.
template <FrameSource Source>
MonitorResult run_monitor(Source& source, const MonitorOptions& opts, NoticeSink sink = {}) {
  DetectionEngine engine(opts.config);
  if (opts.routes) (void)check_routes(*opts.routes);  // fail fast on malformed routes

  EventBus ingest(opts.bus_capacity);
  EventBus notices(opts.bus_capacity);
  auto frames = ingest.subscribe({Topic::SrpTalker, Topic::SrpListener, Topic::Frer});
  auto notice_sub = notices.subscribe(Topic::Notice);

  MonitorResult result;
  std::exception_ptr replay_error;
  std::exception_ptr sink_error;

  std::jthread logger([&] {
    try {
      while (auto ev = notice_sub.next()) {
        const auto& n = std::get<Notice>(ev->payload);
        if (sink) sink(n);
        ++result.counts[n.code];
        result.notices.push_back(n);
      }
    } catch (...) {
      sink_error = std::current_exception();
      notices.close();
    }
  });

  std::jthread replayer([&] {
    try {
      result.replay = replay(source, ingest, opts.speed_factor);
    } catch (const BusClosed&) {
      // detection stopped first; its error takes precedence
    } catch (...) {
      replay_error = std::current_exception();
    }
    ingest.close();
  });

  auto publish = [&](std::vector<Notice> batch) {
    for (auto& n : batch) {
      if (!opts.fixed_clock) n.ts = detail::wall_clock_now();
      notices.publish(make_event(n.ts, std::move(n)));
    }
  };

  try {
    bool first = true;
    while (auto ev = frames.next()) {
      if (first && opts.routes) publish(engine.load_routes(*opts.routes, ev->timestamp));
      first = false;
      publish(engine.process(*ev));
    }
    publish(engine.finish());
  } catch (...) {
    ingest.close();
    notices.close();
    replayer.join();
    logger.join();
    if (sink_error) std::rethrow_exception(sink_error);
    if (replay_error) std::rethrow_exception(replay_error);
    throw;
  }

  replayer.join();
  notices.close();
  logger.join();
  if (replay_error) std::rethrow_exception(replay_error);
  if (sink_error) std::rethrow_exception(sink_error);
  result.suppressed = engine.dedup().total_suppressed();
  return result;
}

/// Convenience overload: replays a pcap file and writes the notice log.
inline MonitorResult run_monitor_pcap(const std::string& pcap_path, const MonitorOptions& opts,
                                      NoticeLog* log = nullptr) {
  PcapReader reader(pcap_path);
  NoticeSink sink;
  if (log) sink = [log](const Notice& n) { log->emit(n); };
  return run_monitor(reader, opts, std::move(sink));
}

}  // namespace tsnzeek
