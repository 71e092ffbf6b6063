#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ktraj/sampled_function.hpp"

namespace ktraj {

// Elliptical field-of-view model: in-plane FOV l_r and axial FOV l_z, in cm.
struct FovModel {
  double l_r = 0.0;
  double l_z = 0.0;

  FovModel() = default;
  FovModel(double lr, double lz) : l_r(lr), l_z(lz) {
    if (!(l_r > 0.0) || !(l_z > 0.0))
      throw std::invalid_argument("FovModel: FOVs must be positive");
  }
};

// Elliptical k-space extent model, cm^-1.  k_r = 1/(2 dx), k_z = 1/(2 dz).
struct ExtentModel {
  double k_r = 0.0;
  double k_z = 0.0;

  ExtentModel() = default;
  ExtentModel(double kr, double kz) : k_r(kr), k_z(kz) {
    if (!(k_r > 0.0) || !(k_z > 0.0))
      throw std::invalid_argument("ExtentModel: extents must be positive");
  }
  static ExtentModel from_resolution_cm(double dx, double dz) {
    return ExtentModel(1.0 / (2.0 * dx), 1.0 / (2.0 * dz));
  }
};

// Variable-density law parameters.  alpha applies along the cone radius,
// alpha_r / alpha_z along the stack radius and z.  alpha = 1 is uniform.
struct DensityParams {
  double alpha = 1.0;
  double alpha_r = 1.0;
  double alpha_z = 1.0;
  // lower clamp on the normalized abscissa |k/K|; the laws diverge at k = 0
  double k_floor_frac = 0.0;  // 0 means "auto": half a Nyquist cell, 1/(2 L K)

  void validate() const {
    if (alpha < 1.0 || alpha_r < 1.0 || alpha_z < 1.0)
      throw std::invalid_argument("DensityParams: alphas must be >= 1");
    if (k_floor_frac < 0.0 || k_floor_frac >= 1.0)
      throw std::invalid_argument("DensityParams: k_floor_frac in [0, 1)");
  }
  double floor_frac(double fov, double extent) const {
    return k_floor_frac > 0.0 ? k_floor_frac : 1.0 / (2.0 * fov * extent);
  }
};

// L(phi) = L_r L_z / sqrt(L_r^2 cos^2 + L_z^2 sin^2)
inline double fov_at(const FovModel& m, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return m.l_r * m.l_z / std::sqrt(m.l_r * m.l_r * c * c + m.l_z * m.l_z * s * s);
}

// L_90(phi) = L(phi + pi/2)
inline double orthogonal_fov(const FovModel& m, double phi) {
  return fov_at(m, phi + kPi / 2.0);
}

inline double extent_at(const ExtentModel& m, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return m.k_r * m.k_z / std::sqrt(m.k_r * m.k_r * c * c + m.k_z * m.k_z * s * s);
}

// FOV on the conic surface at polar angle phi
inline double cone_fov(const FovModel& m, double phi) {
  const double a = m.l_z * std::cos(phi), b = m.l_r * std::sin(phi);
  return std::sqrt(a * a + b * b);
}

// Variable-density FOV along the cone radius:
// L(phi) * |k/K(phi)|^(1/alpha - 1), the base clamped below.
inline double vd_fov_radial(const FovModel& m, const ExtentModel& e,
                            const DensityParams& d, double k, double phi) {
  const double L = fov_at(m, phi);
  const double K = extent_at(e, phi);
  if (d.alpha == 1.0) return L;
  double base = std::abs(k) / K;
  base = std::max(base, d.floor_frac(L, K));
  return L * std::pow(base, 1.0 / d.alpha - 1.0);
}

// Same law against an explicit FOV/extent pair (cone-surface FOV, plane
// extents), so templates can modulate whatever FOV drives their twist.
inline double vd_scale(double alpha, double k, double k_max,
                       double floor_frac) {
  if (alpha == 1.0) return 1.0;
  double base = std::max(std::abs(k) / k_max, floor_frac);
  return std::pow(base, 1.0 / alpha - 1.0);
}

// Variable-density FOV along z: L_z * |z/k_max_z|^(1/alpha_z - 1)
inline double vd_fov_z(const FovModel& m, const DensityParams& d, double z,
                       double k_max_z) {
  if (d.alpha_z == 1.0) return m.l_z;
  double base = std::abs(z) / k_max_z;
  base = std::max(base, d.floor_frac(m.l_z, k_max_z));
  return m.l_z * std::pow(base, 1.0 / d.alpha_z - 1.0);
}

enum class PoleRule { coarsen, literal_min };

// Polar angle of the ellipsoid surface point at height k_z.
inline double spherical_polar_angle(const ExtentModel& e, double k_z) {
  const double a = e.k_z * e.k_r, b = e.k_z * k_z, c = e.k_r * k_z;
  const double denom = std::sqrt(a * a + b * b - c * c);
  return std::acos(std::clamp(e.k_z * k_z / denom, -1.0, 1.0));
}

inline double spherical_radial_extent(const ExtentModel& e, double k_z,
                                      double k_r_floor = 0.0) {
  const double phi = spherical_polar_angle(e, k_z);
  double krm = std::abs(extent_at(e, phi) * std::sin(phi));
  return std::max(krm, k_r_floor);
}

// Radial resolution of the spherical stack design at height k_z.  The
// coarsen rule lets the radial resolution relax toward the poles where the
// ellipsoid cross-section shrinks; literal_min keeps delta_min everywhere.
inline double spherical_radial_resolution(const ExtentModel& e,
                                          double delta_min, double k_z,
                                          PoleRule rule = PoleRule::coarsen,
                                          double k_r_floor = 0.0) {
  if (std::abs(k_z) > e.k_z * (1.0 + 1e-12))
    throw std::domain_error("spherical_radial_resolution: |k_z| > K_z");
  if (k_r_floor <= 0.0) k_r_floor = 1e-3 * e.k_r;
  const double krm = spherical_radial_extent(e, k_z, k_r_floor);
  const double half_inv = 1.0 / (2.0 * krm);
  return rule == PoleRule::coarsen ? std::max(delta_min, half_inv)
                                   : std::min(delta_min, half_inv);
}

}  // namespace ktraj
