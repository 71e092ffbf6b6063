#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "ktraj/cdf.hpp"
#include "ktraj/geometry.hpp"

namespace ktraj {

enum class PathKind { ellipsoid_radial, ellipsoid_cones, cylinder_stack };

// Continuous spiral path on the design surface.  second_coord is phi_p(u)
// for the ellipsoid kinds and z_p(u) for the cylinder; g_denominator is the
// ODE denominator g evaluated along the path, retained for the DCF.
struct SpiralPath {
  PathKind kind = PathKind::ellipsoid_radial;
  double n_real = 0.0;
  SampledFunction theta_p;        // of u
  SampledFunction second_coord;   // of u
  SampledFunction g_denominator;  // of u
  FovModel fov;
  ExtentModel extent;
  SampledFunction interleaves;  // n(phi) or n(z); identity 1 for radial
};

struct DiscretizedPath {
  PathKind kind = PathKind::ellipsoid_radial;
  std::int64_t count = 0;
  double offset = 0.5;
  std::vector<double> theta;
  std::vector<double> second;  // phi_i or z_i
  std::vector<double> u;
};

namespace detail {

// Cumulative midpoint integration of rate(u) on the solver's u grid; the
// midpoint rule keeps the integrable endpoint singularities finite.
inline SampledFunction cumulate_theta(const CdfSolution& sol,
                                      const std::function<double(double)>& rate) {
  const std::size_t n = sol.f_of_u.size();
  std::vector<double> us(n), th(n);
  const double du = 1.0 / static_cast<double>(n - 1);
  us[0] = 0.0;
  th[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    us[i] = du * static_cast<double>(i);
    const double um = us[i] - 0.5 * du;
    th[i] = th[i - 1] + rate(um) * du;
  }
  return SampledFunction(std::move(us), std::move(th));
}

}  // namespace detail

// Spiral path on the ellipsoid for 3D radial designs:
// g(phi) = 2 pi L_r L_90(phi) K^2(phi) sin(phi) on (0, pi).
inline SpiralPath design_radial_path(const FovModel& fm, const ExtentModel& e,
                                     std::size_t grid = kDefaultGrid) {
  auto g = [&](double phi) {
    const double K = extent_at(e, phi);
    return 2.0 * kPi * fm.l_r * orthogonal_fov(fm, phi) * K * K * std::sin(phi);
  };
  CdfSolution sol = solve_cdf_ode(g, 0.0, kPi, grid);

  SpiralPath p;
  p.kind = PathKind::ellipsoid_radial;
  p.n_real = sol.n_total;
  p.fov = fm;
  p.extent = e;
  p.second_coord = sol.f_of_u;
  p.interleaves = SampledFunction({0.0, kPi}, {1.0, 1.0});
  {
    std::vector<double> gu(sol.f_of_u.size());
    for (std::size_t i = 0; i < gu.size(); ++i) gu[i] = g(sol.f_of_u.y[i]);
    p.g_denominator = SampledFunction(sol.f_of_u.x, std::move(gu));
  }
  p.theta_p = detail::cumulate_theta(sol, [&](double u) {
    const double phi = sol.f_of_u(u);
    const double s = std::max(std::sin(phi), 1e-12);
    return sol.n_total / (fm.l_r * extent_at(e, phi) * s);
  });
  return p;
}

// Spiral path on the ellipsoid for cones: g(phi) = K(phi) n(phi) L_90(phi).
inline SpiralPath design_cones_path(const FovModel& fm, const ExtentModel& e,
                                    const SampledFunction& n_of_phi,
                                    std::size_t grid = kDefaultGrid) {
  auto g = [&](double phi) {
    const double n = n_of_phi(phi);
    if (!(n > 0.0))
      throw std::invalid_argument("design_cones_path: n(phi) must be positive");
    return extent_at(e, phi) * n * orthogonal_fov(fm, phi);
  };
  CdfSolution sol = solve_cdf_ode(g, 0.0, kPi, grid);

  SpiralPath p;
  p.kind = PathKind::ellipsoid_cones;
  p.n_real = sol.n_total;
  p.fov = fm;
  p.extent = e;
  p.second_coord = sol.f_of_u;
  p.interleaves = n_of_phi;
  {
    std::vector<double> gu(sol.f_of_u.size());
    for (std::size_t i = 0; i < gu.size(); ++i) gu[i] = g(sol.f_of_u.y[i]);
    p.g_denominator = SampledFunction(sol.f_of_u.x, std::move(gu));
  }
  p.theta_p = detail::cumulate_theta(sol, [&](double u) {
    return 2.0 * kPi * sol.n_total / n_of_phi(sol.f_of_u(u));
  });
  return p;
}

// Spiral path on the cylinder for stack-of-spirals:
// g(z) = n(z) L_z(z) on (-K_z, +K_z), with the z variable-density law.
inline SpiralPath design_stack_path(const FovModel& fm, const ExtentModel& e,
                                    const DensityParams& d,
                                    const SampledFunction& n_of_z,
                                    std::size_t grid = kDefaultGrid) {
  auto g = [&](double z) {
    const double n = n_of_z(z);
    if (!(n > 0.0))
      throw std::invalid_argument("design_stack_path: n(z) must be positive");
    return n * vd_fov_z(fm, d, z, e.k_z);
  };
  CdfSolution sol = solve_cdf_ode(g, -e.k_z, e.k_z, grid);

  SpiralPath p;
  p.kind = PathKind::cylinder_stack;
  p.n_real = sol.n_total;
  p.fov = fm;
  p.extent = e;
  p.second_coord = sol.f_of_u;
  p.interleaves = n_of_z;
  {
    std::vector<double> gu(sol.f_of_u.size());
    for (std::size_t i = 0; i < gu.size(); ++i) gu[i] = g(sol.f_of_u.y[i]);
    p.g_denominator = SampledFunction(sol.f_of_u.x, std::move(gu));
  }
  p.theta_p = detail::cumulate_theta(sol, [&](double u) {
    return 2.0 * kPi * sol.n_total / n_of_z(sol.f_of_u(u));
  });
  return p;
}

// Uniform sampling of the path at u = (i + offset) / round(N).
inline DiscretizedPath discretize(const SpiralPath& path, double offset = 0.5) {
  if (offset < 0.0 || offset >= 1.0)
    throw std::invalid_argument("discretize: offset in [0, 1)");
  const std::int64_t count =
      static_cast<std::int64_t>(std::floor(path.n_real + 0.5));
  if (count < 1) throw std::invalid_argument("discretize: count < 1");

  DiscretizedPath d;
  d.kind = path.kind;
  d.count = count;
  d.offset = offset;
  d.theta.resize(count);
  d.second.resize(count);
  d.u.resize(count);
  for (std::int64_t i = 0; i < count; ++i) {
    const double u = (static_cast<double>(i) + offset) / static_cast<double>(count);
    d.u[i] = u;
    d.theta[i] = path.theta_p(u);
    d.second[i] = path.second_coord(u);
  }
  return d;
}

struct MatchResult {
  double scale = 1.0;
  SpiralPath path;
  int iterations = 0;
};

// Bisection on a FOV scale factor until round(n_real) hits the target.
// N is monotone increasing in the scale.
inline MatchResult match_readout_count(
    const std::function<SpiralPath(double)>& designer, std::int64_t target,
    double lo = 1e-3, double hi = 1e3) {
  if (target < 1)
    throw std::invalid_argument("match_readout_count: target >= 1");

  auto count_of = [](double n_real) {
    return static_cast<std::int64_t>(std::floor(n_real + 0.5));
  };

  SpiralPath p_lo = designer(lo);
  SpiralPath p_hi = designer(hi);
  const double t = static_cast<double>(target);
  if (p_lo.n_real > t + 0.5 || p_hi.n_real < t - 0.5)
    throw std::runtime_error("match_readout_count: target outside scale bounds");

  MatchResult r;
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    SpiralPath p = designer(mid);
    r.iterations = it + 1;
    if (count_of(p.n_real) == target && std::abs(p.n_real - t) < 0.5) {
      r.scale = mid;
      r.path = std::move(p);
      return r;
    }
    (p.n_real < t ? lo : hi) = mid;
  }
  // last resort: return the closer bracket end
  SpiralPath p = designer(hi);
  if (count_of(p.n_real) != target)
    throw std::runtime_error("match_readout_count: did not converge");
  r.scale = hi;
  r.path = std::move(p);
  return r;
}

}  // namespace ktraj
