#pragma once

#include <cmath>

namespace ktraj {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double norm_xy() const { return std::sqrt(x * x + y * y); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Rotation about k_z by theta, then (optionally) composed elsewhere.
inline Vec3 rotate_z(const Vec3& v, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

inline Vec3 rotate_y(const Vec3& v, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * v.x + s * v.z, v.y, -s * v.x + c * v.z};
}

}  // namespace ktraj
