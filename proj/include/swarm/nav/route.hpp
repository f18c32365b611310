#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "swarm/arena/types.hpp"

namespace swarm::nav {

// Global routing around obstacles: shortest path over a visibility graph of obstacle corners
// pushed outward, used to hand DWA an intermediate target it can see.
struct RouteConfig {
  double corner_offset{0.6};
  double clearance{0.35};
};

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squared_norm();
  const double t = l2 > 0.0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return distance(p, a + ab * t);
}

// Smallest distance between segment [a, b] and any obstacle (0 when it crosses one).
inline double segment_clearance(const arena::ArenaConfig& arena, const Vec2& a, const Vec2& b) {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& o : arena.obstacles) {
    if (o.blocks_segment(a, b) || o.contains(a) || o.contains(b)) return 0.0;
    c = std::min({c, o.distance_to(a), o.distance_to(b)});
    for (const Vec2& v : o.vertices()) c = std::min(c, point_segment_distance(v, a, b));
  }
  return c;
}

inline std::vector<Vec2> route_nodes(const arena::ArenaConfig& arena, const RouteConfig& cfg) {
  std::vector<Vec2> nodes;
  for (const auto& o : arena.obstacles) {
    const std::size_t n = o.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 v = o.vertex(i);
      const Vec2 d = ((v - o.vertex(i + n - 1)).normalized() - (o.vertex(i + 1) - v).normalized()).normalized();
      const Vec2 q = v + d * (cfg.corner_offset * std::sqrt(2.0));
      if (arena.inside_bounds(q) && arena.clearance(q) >= cfg.clearance) nodes.push_back(q);
    }
  }
  return nodes;
}

// Next point to steer toward on the way from `from` to `to`. Returns `to` itself when the
// straight segment keeps enough clearance or no detour exists.
inline Vec2 next_waypoint(const arena::ArenaConfig& arena, const std::vector<Vec2>& nodes, const Vec2& from,
                          const Vec2& to, const RouteConfig& cfg) {
  if (arena.obstacles.empty()) return to;
  const auto edge_ok = [&](const Vec2& a, const Vec2& b, double need) { return segment_clearance(arena, a, b) >= need; };
  // Endpoints that already sit close to a wall only need to stay out of it.
  const double need_from = std::min(cfg.clearance, 0.5 * arena.clearance(from));
  const double need_to = std::min(cfg.clearance, 0.5 * arena.clearance(to));
  if (edge_ok(from, to, std::min(need_from, need_to))) return to;

  // Dijkstra over [from, nodes..., to].
  const std::size_t n = nodes.size() + 2, src = 0, dst = n - 1;
  const auto pos = [&](std::size_t i) { return i == src ? from : i == dst ? to : nodes[i - 1]; };
  const auto need = [&](std::size_t i, std::size_t j) {
    double r = cfg.clearance;
    if (i == src || j == src) r = std::min(r, need_from);
    if (i == dst || j == dst) r = std::min(r, need_to);
    return r;
  };
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> prev(n, n);
  std::vector<bool> done(n, false);
  dist[src] = 0.0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && (u == n || dist[i] < dist[u])) u = i;
    if (u == n || !std::isfinite(dist[u])) break;
    done[u] = true;
    if (u == dst) break;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || v == src) continue;
      const double w = distance(pos(u), pos(v));
      if (dist[u] + w < dist[v] && edge_ok(pos(u), pos(v), need(u, v))) {
        dist[v] = dist[u] + w;
        prev[v] = u;
      }
    }
  }
  if (!std::isfinite(dist[dst])) return to;
  std::size_t k = dst;
  while (prev[k] != src) k = prev[k];
  return pos(k);
}

}  // namespace swarm::nav
