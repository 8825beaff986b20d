#pragma once

#include <cmath>

namespace uav2x {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double distance_uav_uav(const Vec3& a, const Vec3& b) {
  return (a - b).norm();
}

inline double distance_to_bs(const Vec3& p, double bs_height) {
  const double dz = p.z - bs_height;
  return std::sqrt(p.x * p.x + p.y * p.y + dz * dz);
}

}  // namespace uav2x
