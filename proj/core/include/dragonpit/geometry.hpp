#pragma once

#include <algorithm>
#include <cmath>

namespace dragonpit {

// The arena is a square centered on the origin; the dragon pit sits at (0, 0).
inline constexpr double kMapHalfExtent = 30000.0;
inline constexpr double kMoveOffset = 1500.0;
inline constexpr double kSpawnRingRadius = 8000.0;
inline constexpr int kSpawnPointCount = 20;

struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec2& a, const Vec2& b) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.z + b.z}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.z - b.z}; }
inline Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.z * k}; }

inline double length(Vec2 v) { return std::hypot(v.x, v.z); }
inline double distance(Vec2 a, Vec2 b) { return length(b - a); }

inline Vec2 clamp_to_map(Vec2 p) {
  return {std::clamp(p.x, -kMapHalfExtent, kMapHalfExtent),
          std::clamp(p.z, -kMapHalfExtent, kMapHalfExtent)};
}

// Bearing from `from` to `to` in degrees, measured from +x toward +z,
// normalized to [0, 360).
inline double bearing_deg(Vec2 from, Vec2 to) {
  if (from == to) return 0.0;
  double deg = std::atan2(to.z - from.z, to.x - from.x) * 180.0 / M_PI;
  if (deg < 0.0) deg += 360.0;
  return deg;
}

// One of the 20 fixed spawn anchors on the ring around the pit.
// Point 1 lies on the +x axis; points advance counterclockwise by 18 degrees.
inline Vec2 spawn_point_coord(int point) {
  double angle = 2.0 * M_PI * (point - 1) / kSpawnPointCount;
  return {kSpawnRingRadius * std::cos(angle), kSpawnRingRadius * std::sin(angle)};
}

}  // namespace dragonpit
