#pragma once

// Static check of configured FRER member-stream paths for intersections.

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsnzeek/notice.hpp"

namespace tsnzeek {

class MalformedRoute : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Path = std::vector<std::string>;

struct StreamRoutes {
  StreamId stream_id;
  std::vector<Path> paths;
};

struct RouteConfig {
  std::vector<StreamRoutes> streams;
};

/// Interior node traversed by more than one member path of a stream.
struct SharedNodeWarning {
  StreamId stream_id;
  std::string node;
  std::vector<std::size_t> paths;
};

struct RouteCheck {
  std::vector<Notice> notices;
  std::vector<SharedNodeWarning> warnings;
};

namespace detail {
using Link = std::pair<std::string, std::string>;

inline Link make_link(const std::string& a, const std::string& b) {
  return a < b ? Link{a, b} : Link{b, a};
}

inline std::string join(const std::vector<std::string>& items, char sep = ',') {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out.push_back(sep);
    out += s;
  }
  return out;
}
}  // namespace detail

/// One N7 per (stream, link) shared by two or more member paths, ignoring
/// links that touch a talker or listener endpoint. Shared interior nodes are
/// reported as warnings and listed in the notice evidence.
[[nodiscard]] inline RouteCheck check_routes(const RouteConfig& config, double ts = 0.0) {
  RouteCheck out;
  for (const auto& stream : config.streams) {
    std::set<std::string> endpoints;
    for (const auto& path : stream.paths) {
      if (path.size() < 2) {
        throw MalformedRoute("stream " + stream.stream_id.to_hex() + ": path with fewer than 2 nodes");
      }
      for (std::size_t i = 1; i < path.size(); ++i) {
        if (path[i] == path[i - 1]) {
          throw MalformedRoute("stream " + stream.stream_id.to_hex() + ": repeated node " + path[i]);
        }
      }
      endpoints.insert(path.front());
      endpoints.insert(path.back());
    }

    std::map<detail::Link, std::set<std::size_t>> link_users;
    std::map<std::string, std::set<std::size_t>> node_users;
    for (std::size_t p = 0; p < stream.paths.size(); ++p) {
      const auto& path = stream.paths[p];
      for (std::size_t i = 1; i < path.size(); ++i) {
        if (endpoints.count(path[i - 1]) || endpoints.count(path[i])) continue;
        link_users[detail::make_link(path[i - 1], path[i])].insert(p);
      }
      for (const auto& node : path) {
        if (!endpoints.count(node)) node_users[node].insert(p);
      }
    }

    std::vector<std::string> shared_nodes;
    for (const auto& [node, users] : node_users) {
      if (users.size() < 2) continue;
      shared_nodes.push_back(node);
      out.warnings.push_back({stream.stream_id, node, {users.begin(), users.end()}});
    }

    for (const auto& [link, users] : link_users) {
      if (users.size() < 2) continue;
      std::vector<std::string> idx;
      for (auto u : users) idx.push_back(std::to_string(u));
      Notice n;
      n.code = NoticeCode::N7_ExcessiveMemberStreams;
      n.rule = Rule::A6;
      n.ts = ts;
      n.stream_id = stream.stream_id;
      n.evidence = {{"link", link.first + "-" + link.second},
                    {"shared_nodes", detail::join(shared_nodes)},
                    {"paths", detail::join(idx)}};
      n.msg = "member paths " + detail::join(idx) + " of stream " + stream.stream_id.to_hex() +
              " share link " + link.first + "-" + link.second;
      out.notices.push_back(std::move(n));
    }
  }
  return out;
}

/// {"streams": [{"stream_id": "<16 hex>", "paths": [["T","B1","L"], ...]}]}
inline RouteConfig route_config_from_json(const nlohmann::json& j) {
  RouteConfig cfg;
  try {
    for (const auto& s : j.at("streams")) {
      StreamRoutes sr;
      auto id = StreamId::from_hex(s.at("stream_id").get<std::string>());
      if (!id) throw MalformedRoute("bad stream_id " + s.at("stream_id").dump());
      sr.stream_id = *id;
      for (const auto& p : s.at("paths")) sr.paths.push_back(p.get<Path>());
      cfg.streams.push_back(std::move(sr));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRoute(std::string("route config: ") + e.what());
  }
  return cfg;
}

inline nlohmann::json to_json(const RouteConfig& cfg) {
  nlohmann::json streams = nlohmann::json::array();
  for (const auto& s : cfg.streams) {
    streams.push_back({{"stream_id", s.stream_id.to_hex()}, {"paths", s.paths}});
  }
  return {{"streams", std::move(streams)}};
}

}  // namespace tsnzeek
