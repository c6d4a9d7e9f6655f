#pragma once

#include <cmath>
#include <cstdint>

namespace ecoroute {

using NodeId = int;

inline constexpr NodeId kNoNode = -1;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }

inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }

}  // namespace ecoroute
