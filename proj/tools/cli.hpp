#pragma once

// Command-line front end. run_cli is separate from main so tests can drive it.

#include <cstdlib>
#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "tsnzeek/tsnzeek.hpp"

namespace tsnzeek::cli {

enum ExitCode : int { kClean = 0, kError = 1, kNotices = 2, kMismatch = 3 };

inline spdlog::level::level_enum log_level_from_env() {
  const char* v = std::getenv("TSNZEEK_LOG_LEVEL");
  if (!v) return spdlog::level::warn;
  const std::string s(v);
  if (s == "error") return spdlog::level::err;
  if (s == "warn") return spdlog::level::warn;
  if (s == "info") return spdlog::level::info;
  if (s == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

inline void print_summary(std::ostream& out, const MonitorResult& r) {
  const auto& rep = r.replay;
  out << "frames: in=" << rep.frames_in << " published=" << rep.frames_published
      << " other=" << rep.other_count << " errors=" << rep.parse_errors << "\n";
  out << "notices: " << r.notices.size();
  if (!r.counts.empty()) {
    out << " (";
    bool first = true;
    for (const auto& [code, n] : r.counts) {
      out << (first ? "" : " ") << short_name(code) << "=" << n;
      first = false;
    }
    out << ")";
  }
  out << " suppressed=" << r.suppressed << "\n";
  out << std::fixed << std::setprecision(3) << "lag_ms: median=" << rep.lag_median_ms
      << " p99=" << rep.lag_p99_ms << " max=" << rep.lag_max_ms << "\n";
  out << "wall_s: " << rep.wall_s << " capture_s: " << rep.capture_span_s << "\n";
  out << std::defaultfloat;
}

inline DetectorConfig config_or_default(const std::string& path) {
  return path.empty() ? DetectorConfig{} : load_detector_config(path);
}

inline std::optional<RouteConfig> routes_or_none(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return route_config_from_json(read_json_file(path));
}

/// Returns the process exit code. argv[0] is the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  spdlog::logger log("tsnzeek", sink);
  log.set_level(log_level_from_env());
  log.set_pattern("[%l] %v");

  CLI::App app{"TSN (SRP/FRER) security monitor", "tsnzeek"};
  app.require_subcommand(1, 1);

  std::string pcap, config, log_path, routes, script, out_prefix, truth;
  double speed = 0.0;
  bool fixed_clock = false;

  auto* monitor = app.add_subcommand("monitor", "Replay a capture through the detector");
  monitor->add_option("--pcap", pcap, "Input capture (classic pcap)")->required();
  monitor->add_option("--config", config, "Detector config JSON");
  monitor->add_option("--log", log_path, "Notice log (NDJSON), truncated on open");
  monitor->add_option("--speed", speed, "Replay speed factor, 0 = as fast as possible")
      ->check(CLI::NonNegativeNumber);
  monitor->add_flag("--fixed-clock", fixed_clock, "Stamp notices with capture time");
  monitor->add_option("--routes", routes, "FRER route config JSON");

  auto* generate = app.add_subcommand("generate", "Generate a scenario corpus");
  generate->add_option("--script", script, "Scenario script JSON")->required();
  generate->add_option("--out", out_prefix, "Output prefix")->required();

  auto* verify = app.add_subcommand("verify", "Check monitor output against ground truth");
  verify->add_option("--pcap", pcap, "Input capture")->required();
  verify->add_option("--truth", truth, "Ground-truth JSON")->required();
  verify->add_option("--config", config, "Detector config JSON");
  verify->add_option("--routes", routes, "FRER route config JSON");
  verify->add_option("--log", log_path, "Notice log (NDJSON)");

  auto* check = app.add_subcommand("check-routes", "Look for shared links between member paths");
  check->add_option("--routes", routes, "FRER route config JSON")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kClean;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kError;
  }

  try {
    if (*monitor || *verify) {
      MonitorOptions opts;
      opts.config = config_or_default(config);
      opts.routes = routes_or_none(routes);
      opts.speed_factor = *monitor ? speed : 0.0;
      opts.fixed_clock = *verify || fixed_clock;
      std::unique_ptr<NoticeLog> notice_log;
      if (!log_path.empty()) notice_log = std::make_unique<NoticeLog>(log_path);

      std::optional<GroundTruth> gt;
      if (*verify) gt = ground_truth_from_json(read_json_file(truth));

      log.info("replaying {}", pcap);
      const MonitorResult result = run_monitor_pcap(pcap, opts, notice_log.get());
      print_summary(out, result);
      if (result.replay.parse_errors > 0) {
        log.warn("{} frames failed to parse", result.replay.parse_errors);
      }
      if (*verify) {
        const VerifyReport report = verify_notices(*gt, result.notices);
        out << format_report(*gt, report);
        return report.passed() ? kClean : kMismatch;
      }
      return result.notices.empty() ? kClean : kNotices;
    }

    if (*generate) {
      const ScenarioScript s = load_script(script);
      const GeneratedCorpus corpus = tsnzeek::generate(s);
      write_corpus(corpus, out_prefix);
      out << "wrote " << out_prefix << ".pcap (" << corpus.frames.size() << " frames), "
          << corpus.truth.expectations.size() << " expectations\n";
      return kClean;
    }

    if (*check) {
      const RouteCheck result = check_routes(route_config_from_json(read_json_file(routes)));
      for (const auto& w : result.warnings) {
        log.info("stream {} paths share interior node {}", w.stream_id.to_hex(), w.node);
      }
      for (const auto& n : result.notices) {
        out << short_name(n.code) << " " << n.stream_id->to_hex() << " link=" << n.evidence.at("link")
            << " paths=" << n.evidence.at("paths") << "\n";
      }
      out << "findings: " << result.notices.size() << "\n";
      return result.notices.empty() ? kClean : kNotices;
    }
  } catch (const std::exception& e) {
    log.error("{}", e.what());
    err.flush();
    return kError;
  }
  return kError;
}

}  // namespace tsnzeek::cli
