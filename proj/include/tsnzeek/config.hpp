#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "tsnzeek/recovery.hpp"

namespace tsnzeek {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RateLimit {
  std::uint32_t count = 10;
  double window_s = 1.0;

  bool operator==(const RateLimit&) const = default;
};

/// Detector thresholds. Every field is operator-tunable; the defaults are the
/// values documented in docs/config.md.
struct DetectorConfig {
  std::uint64_t max_bandwidth_bps = 100'000'000;
  double max_frame_rate = 10'000.0;
  double deviation_factor_k = 2.0;
  RateLimit request_rate_limit;
  double dangling_timeout_s = 30.0;
  double recovery_timeout_s = 2.0;
  RecoveryVariant recovery_variant = RecoveryVariant::Vector;
  std::uint16_t vector_history_H = 64;
  std::uint16_t vector_future_max = 2048;
  double sweep_period_s = 1.0;
  std::uint32_t min_samples = 5;
  std::uint32_t rolling_window = 32;
  double dedup_window_s = 1.0;
  // Redundancy assumed for FRER streams without a reservation.
  std::uint8_t default_redundancy = 1;

  bool operator==(const DetectorConfig&) const = default;

  [[nodiscard]] RecoveryParams recovery_params() const noexcept {
    return RecoveryParams{recovery_variant, vector_history_H, vector_future_max};
  }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0)) throw ConfigError(std::string(name) + " must be > 0");
    };
    if (max_bandwidth_bps == 0) throw ConfigError("max_bandwidth_bps must be > 0");
    positive(max_frame_rate, "max_frame_rate");
    if (!(deviation_factor_k > 1.0)) throw ConfigError("deviation_factor_k must be > 1");
    if (request_rate_limit.count == 0) throw ConfigError("request_rate_limit.count must be > 0");
    positive(request_rate_limit.window_s, "request_rate_limit.window_s");
    positive(dangling_timeout_s, "dangling_timeout_s");
    positive(recovery_timeout_s, "recovery_timeout_s");
    if (vector_history_H < 1 || vector_history_H > kMaxRecoveryHistory) {
      throw ConfigError("vector_history_H must be in [1, 1024]");
    }
    if (vector_future_max == 0) throw ConfigError("vector_future_max must be > 0");
    positive(sweep_period_s, "sweep_period_s");
    if (min_samples == 0) throw ConfigError("min_samples must be > 0");
    if (rolling_window == 0) throw ConfigError("rolling_window must be > 0");
    positive(dedup_window_s, "dedup_window_s");
    if (default_redundancy == 0) throw ConfigError("default_redundancy must be > 0");
  }
};

inline nlohmann::json to_json(const DetectorConfig& c) {
  return {
      {"max_bandwidth_bps", c.max_bandwidth_bps},
      {"max_frame_rate", c.max_frame_rate},
      {"deviation_factor_k", c.deviation_factor_k},
      {"request_rate_limit",
       {{"count", c.request_rate_limit.count}, {"window_s", c.request_rate_limit.window_s}}},
      {"dangling_timeout_s", c.dangling_timeout_s},
      {"recovery_timeout_s", c.recovery_timeout_s},
      {"recovery_variant", to_string(c.recovery_variant)},
      {"vector_history_H", c.vector_history_H},
      {"vector_future_max", c.vector_future_max},
      {"sweep_period_s", c.sweep_period_s},
      {"min_samples", c.min_samples},
      {"rolling_window", c.rolling_window},
      {"dedup_window_s", c.dedup_window_s},
      {"default_redundancy", c.default_redundancy},
  };
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline DetectorConfig detector_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("detector config must be a JSON object");
  DetectorConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "max_bandwidth_bps") c.max_bandwidth_bps = v.get<std::uint64_t>();
      else if (key == "max_frame_rate") c.max_frame_rate = v.get<double>();
      else if (key == "deviation_factor_k") c.deviation_factor_k = v.get<double>();
      else if (key == "request_rate_limit") {
        for (const auto& [rk, rv] : v.items()) {
          if (rk == "count") c.request_rate_limit.count = rv.get<std::uint32_t>();
          else if (rk == "window_s") c.request_rate_limit.window_s = rv.get<double>();
          else throw ConfigError("unknown key request_rate_limit." + rk);
        }
      }
      else if (key == "dangling_timeout_s") c.dangling_timeout_s = v.get<double>();
      else if (key == "recovery_timeout_s") c.recovery_timeout_s = v.get<double>();
      else if (key == "recovery_variant") {
        const auto s = v.get<std::string>();
        if (s == "match") c.recovery_variant = RecoveryVariant::Match;
        else if (s == "vector") c.recovery_variant = RecoveryVariant::Vector;
        else throw ConfigError("recovery_variant must be \"match\" or \"vector\"");
      }
      else if (key == "vector_history_H") c.vector_history_H = v.get<std::uint16_t>();
      else if (key == "vector_future_max") c.vector_future_max = v.get<std::uint16_t>();
      else if (key == "sweep_period_s") c.sweep_period_s = v.get<double>();
      else if (key == "min_samples") c.min_samples = v.get<std::uint32_t>();
      else if (key == "rolling_window") c.rolling_window = v.get<std::uint32_t>();
      else if (key == "dedup_window_s") c.dedup_window_s = v.get<double>();
      else if (key == "default_redundancy") c.default_redundancy = v.get<std::uint8_t>();
      else throw ConfigError("unknown detector config key: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("detector config: ") + e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline DetectorConfig load_detector_config(const std::string& path) {
  return detector_config_from_json(read_json_file(path));
}

}  // namespace tsnzeek
