#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "swarm/core/error.hpp"
#include "swarm/core/vec2.hpp"

namespace swarm::arena {

// Convex polygon, vertices stored counter-clockwise.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;

  explicit ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
    require(vertices_.size() >= 3, ErrorCode::kInvalidConfig, "polygon needs at least 3 vertices");
    if (signed_area() < 0.0) std::reverse(vertices_.begin(), vertices_.end());
    require(signed_area() > 0.0, ErrorCode::kInvalidConfig, "degenerate polygon");
    require(is_convex(), ErrorCode::kInvalidConfig, "polygon is not convex");
  }

  static ConvexPolygon rectangle(double x0, double y0, double x1, double y1) {
    return ConvexPolygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
  }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  Vec2 vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }

  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) a += vertex(i).cross(vertex(i + 1));
    return 0.5 * a;
  }

  // Strict interior: points on the boundary are outside.
  bool contains(const Vec2& p) const {
    for (std::size_t i = 0; i < size(); ++i)
      if ((vertex(i + 1) - vertex(i)).cross(p - vertex(i)) <= 0.0) return false;
    return true;
  }

  Vec2 closest_boundary_point(const Vec2& p) const { return nearest_edge(p).point; }

  // Outward unit normal of the edge nearest to p.
  Vec2 nearest_outward_normal(const Vec2& p) const {
    const auto e = nearest_edge(p);
    const Vec2 d = (vertex(e.edge + 1) - vertex(e.edge)).normalized();
    return {d.y, -d.x};
  }

  // Distance from p to the polygon; zero inside.
  double distance_to(const Vec2& p) const {
    if (contains(p)) return 0.0;
    return (nearest_edge(p).point - p).norm();
  }

  // True when the open segment [a, b] passes through the interior with positive length.
  bool blocks_segment(const Vec2& a, const Vec2& b, double eps = 1e-9) const {
    const Vec2 d = b - a;
    double t0 = 0.0, t1 = 1.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const Vec2 e = vertex(i + 1) - vertex(i);
      // Inside half-plane: e x (p - v_i) > 0.
      const double num = e.cross(a - vertex(i));
      const double den = e.cross(d);
      if (std::abs(den) < 1e-15) {
        if (num <= 0.0) return false;
        continue;
      }
      const double t = -num / den;
      if (den > 0.0) t0 = std::max(t0, t);
      else t1 = std::min(t1, t);
      if (t0 >= t1) return false;
    }
    return (t1 - t0) * d.norm() > eps;
  }

  bool overlaps(const ConvexPolygon& other) const {
    return !has_separating_axis(*this, other) && !has_separating_axis(other, *this);
  }

 private:
  struct EdgeHit {
    std::size_t edge;
    Vec2 point;
  };

  EdgeHit nearest_edge(const Vec2& p) const {
    EdgeHit best{0, vertex(0)};
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
      const Vec2 a = vertex(i), b = vertex(i + 1);
      const Vec2 ab = b - a;
      const double t = std::clamp((p - a).dot(ab) / ab.squared_norm(), 0.0, 1.0);
      const Vec2 q = a + ab * t;
      const double d2 = (q - p).squared_norm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = {i, q};
      }
    }
    return best;
  }

  bool is_convex() const {
    for (std::size_t i = 0; i < size(); ++i)
      if ((vertex(i + 1) - vertex(i)).cross(vertex(i + 2) - vertex(i + 1)) < 0.0) return false;
    return true;
  }

  // Touching polygons (shared boundary) count as separated.
  static bool has_separating_axis(const ConvexPolygon& a, const ConvexPolygon& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Vec2 e = a.vertex(i + 1) - a.vertex(i);
      bool all_outside = true;
      for (const Vec2& q : b.vertices_)
        if (e.cross(q - a.vertex(i)) > 0.0) {
          all_outside = false;
          break;
        }
      if (all_outside) return true;
    }
    return false;
  }

  std::vector<Vec2> vertices_;
};

}  // namespace swarm::arena
