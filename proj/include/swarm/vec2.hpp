#pragma once

#include <cmath>

namespace swarm {

// Plain 2-D vector. Everything in the simulator lives on the plane, so this
// is deliberately minimal: value semantics, no SIMD, no templates.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }

  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  constexpr bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
  constexpr bool operator!=(const Vec2& o) const { return !(*this == o); }

  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  // z-component of the 3-D cross product; >0 when o is counter-clockwise of *this.
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }

  double norm() const { return std::hypot(x, y); }
  constexpr double norm_sq() const { return x * x + y * y; }

  // Zero-length input maps to the zero vector rather than NaN.
  Vec2 normalized() const {
    double n = norm();
    if (n < 1e-12) return {0.0, 0.0};
    return {x / n, y / n};
  }

  // 90 degrees counter-clockwise.
  constexpr Vec2 perp_ccw() const { return {-y, x}; }
  // 90 degrees clockwise.
  constexpr Vec2 perp_cw() const { return {y, -x}; }

  // cos/sin are taken on |angle| so rotating by -a is the exact mirror of
  // rotating by a; scenarios reflected about an axis then evolve as
  // bit-exact mirror images.
  Vec2 rotated(double angle) const {
    double c = std::cos(std::abs(angle));
    double s = std::sin(std::abs(angle));
    if (angle < 0.0) s = -s;
    return {c * x - s * y, s * x + c * y};
  }

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline double angle_of(const Vec2& v) { return std::atan2(v.y, v.x); }

// Smallest signed angle that rotates `from` onto `to`, in (-pi, pi].
// Evaluated on the magnitude of the cross term so mirrored inputs give
// exactly opposite angles.
inline double angle_between(const Vec2& from, const Vec2& to) {
  double c = from.cross(to);
  double a = std::atan2(std::abs(c), from.dot(to));
  return c < 0.0 ? -a : a;
}

}  // namespace swarm
