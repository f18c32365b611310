#pragma once

#include <cmath>

namespace swarm {

// Plain 2D vector in double precision. Positions are meters, velocities m/s.
struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
  constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& r) { x += r.x; y += r.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& r) { x -= r.x; y -= r.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
  // z-component of the 3D cross product.
  constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
  constexpr double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }

  Vec2 normalized(double eps = 1e-12) const {
    const double n = norm();
    return n > eps ? Vec2{x / n, y / n} : Vec2{};
  }

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double distance(const Vec2& a, const Vec2& b) { return (b - a).norm(); }

inline Vec2 from_polar(double r, double angle) {
  return {r * std::cos(angle), r * std::sin(angle)};
}

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * M_PI;
  a = std::fmod(a + M_PI, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a - M_PI;
}

}  // namespace swarm
