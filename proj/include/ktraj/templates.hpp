#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ktraj/cdf.hpp"
#include "ktraj/geometry.hpp"
#include "ktraj/vec3.hpp"

namespace ktraj {

// Gradient hardware limits and raster.  Units: g_max mT/m, s_max mT/m/ms,
// dt ms, gamma_bar kHz/mT, t_read ms.  The single unit-conversion constant:
// dk/dt [cm^-1/ms] = gamma_bar [kHz/mT] * 1e-2 [m/cm] * g [mT/m].
struct HardwareConfig {
  double g_max = 39.0;
  double s_max = 145.0;
  double dt = 0.004;
  double gamma_bar = 42.5764;
  double t_read = 2.8;

  void validate() const {
    if (!(g_max > 0) || !(s_max > 0) || !(dt > 0) || !(gamma_bar > 0) ||
        !(t_read > 0))
      throw std::invalid_argument("HardwareConfig: all fields must be positive");
  }
  // cm^-1/ms per (mT/m)
  double k_scale() const { return gamma_bar * 1e-2; }
  double v_max() const { return k_scale() * g_max; }   // cm^-1/ms
  double a_max() const { return k_scale() * s_max; }   // cm^-1/ms^2
};

struct InfeasibleDesign : std::runtime_error {
  double min_t_read;  // ms; shortest readout that would fit this design
  explicit InfeasibleDesign(double t)
      : std::runtime_error("design infeasible within t_read; need >= " +
                           std::to_string(t) + " ms"),
        min_t_read(t) {}
};

// One readout on a surface: raster-sampled k-space curve and gradient
// waveform.  k_samples are the cumulative trapezoid integral of g_samples
// (plus the constant k_z offset for stack planes), so the k-g consistency
// invariant holds by construction.
struct Template {
  double surface_label = 0.0;  // polar angle phi (rad) or plane z (cm^-1)
  std::vector<Vec3> k_samples;
  std::vector<Vec3> g_samples;
  int twist_count = 1;
};

inline void check_template(const Template& t, const HardwareConfig& hw,
                           double slack = 1e-9) {
  if (t.k_samples.size() != t.g_samples.size() || t.k_samples.empty())
    throw std::logic_error("Template: sample length mismatch");
  const double gl = hw.g_max * (1.0 + 1e-9) + slack;
  const double sl = hw.s_max * (1.0 + 1e-9) + slack;
  Vec3 k = t.k_samples.front();
  for (std::size_t i = 0; i < t.g_samples.size(); ++i) {
    if (t.g_samples[i].norm() > gl)
      throw std::logic_error("Template: gradient amplitude limit exceeded");
    if (i > 0) {
      if ((t.g_samples[i] - t.g_samples[i - 1]).norm() / hw.dt > sl)
        throw std::logic_error("Template: slew limit exceeded");
      k += hw.k_scale() * hw.dt * 0.5 *
           (t.g_samples[i - 1] + t.g_samples[i]);
      if ((k - t.k_samples[i]).norm() > 1e-6)
        throw std::logic_error("Template: k-g consistency violated");
    }
  }
}

namespace detail {

// limits backed off from the hardware ceiling so raster sampling and the
// final endpoint scaling stay inside the hard limits
inline constexpr double kHeadroom = 0.998;

struct SpeedProfile {
  std::vector<double> s;  // arc length, cm^-1
  std::vector<double> v;  // speed, cm^-1/ms
  std::vector<double> t;  // time, ms
  double total_time() const { return t.back(); }
};

// Dense curve c(q): q is the curve's own radial parameter.  Returns the
// arc-length-parameterized speed profile under amplitude and slew limits
// (curvature-capped speed, then a forward acceleration-limited pass).
template <typename Curve>
SpeedProfile time_parameterize(Curve&& c, double q_max, std::size_t n_dense,
                               const HardwareConfig& hw,
                               double speed_factor = 1.0) {
  const double vmax = hw.v_max() * kHeadroom * speed_factor;
  const double amax = hw.a_max() * kHeadroom * speed_factor * speed_factor;

  std::vector<Vec3> p(n_dense);
  for (std::size_t j = 0; j < n_dense; ++j)
    p[j] = c(q_max * static_cast<double>(j) / static_cast<double>(n_dense - 1));

  SpeedProfile sp;
  sp.s.resize(n_dense);
  sp.v.resize(n_dense);
  sp.t.resize(n_dense);
  sp.s[0] = 0.0;
  for (std::size_t j = 1; j < n_dense; ++j)
    sp.s[j] = sp.s[j - 1] + (p[j] - p[j - 1]).norm();

  // curvature from three-point circumradius
  auto kappa = [&](std::size_t j) -> double {
    if (j == 0 || j + 1 >= n_dense) return 0.0;
    const Vec3 a = p[j] - p[j - 1], b = p[j + 1] - p[j];
    const double la = a.norm(), lb = b.norm(), lc = (p[j + 1] - p[j - 1]).norm();
    if (la <= 0 || lb <= 0 || lc <= 0) return 0.0;
    const Vec3 cr{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
                  a.x * b.y - a.y * b.x};
    return 2.0 * cr.norm() / (la * lb * lc);
  };

  sp.v[0] = 0.0;
  sp.t[0] = 0.0;
  for (std::size_t j = 1; j < n_dense; ++j) {
    const double kap = kappa(j);
    double vlim = vmax;
    if (kap > 0.0) vlim = std::min(vlim, std::sqrt(amax / kap));
    const double ds = sp.s[j] - sp.s[j - 1];
    sp.v[j] = std::min(vlim, std::sqrt(sp.v[j - 1] * sp.v[j - 1] + 2.0 * amax * ds));
  }
  // backward pass: respect the deceleration limit into high-curvature spots
  for (std::size_t j = n_dense - 1; j-- > 0;) {
    const double ds = sp.s[j + 1] - sp.s[j];
    sp.v[j] = std::min(sp.v[j],
                       std::sqrt(sp.v[j + 1] * sp.v[j + 1] + 2.0 * amax * ds));
  }
  for (std::size_t j = 1; j < n_dense; ++j) {
    const double ds = sp.s[j] - sp.s[j - 1];
    const double vavg = 0.5 * (sp.v[j - 1] + sp.v[j]);
    sp.t[j] = sp.t[j - 1] + (vavg > 0.0 ? ds / vavg : 0.0);
  }
  return sp;
}

// Raster-sample a curve under a speed profile: analytic tangents give the
// gradient waveform; k is rebuilt as the cumulative integral of g and scaled
// so the final sample lands exactly on the curve endpoint radius.
template <typename Curve>
Template raster_template(Curve&& c, double q_max, const SpeedProfile& sp,
                         const HardwareConfig& hw, double label, int twists) {
  const std::size_t nd = sp.s.size();
  const double T = sp.total_time();
  const std::size_t m = static_cast<std::size_t>(std::ceil(T / hw.dt)) + 1;

  auto q_at_s = [&](double s) -> double {
    auto it = std::lower_bound(sp.s.begin(), sp.s.end(), s);
    std::size_t j = static_cast<std::size_t>(it - sp.s.begin());
    if (j == 0) return 0.0;
    if (j >= nd) return q_max;
    const double f = (s - sp.s[j - 1]) / (sp.s[j] - sp.s[j - 1]);
    const double qj = q_max * static_cast<double>(j) / static_cast<double>(nd - 1);
    const double qp = q_max * static_cast<double>(j - 1) / static_cast<double>(nd - 1);
    return qp + f * (qj - qp);
  };
  auto s_at_t = [&](double t) -> double {
    auto it = std::lower_bound(sp.t.begin(), sp.t.end(), t);
    std::size_t j = static_cast<std::size_t>(it - sp.t.begin());
    if (j == 0) return 0.0;
    if (j >= nd) return sp.s.back();
    const double f = (t - sp.t[j - 1]) / (sp.t[j] - sp.t[j - 1]);
    return sp.s[j - 1] + f * (sp.s[j] - sp.s[j - 1]);
  };
  auto v_at_t = [&](double t) -> double {
    auto it = std::lower_bound(sp.t.begin(), sp.t.end(), t);
    std::size_t j = static_cast<std::size_t>(it - sp.t.begin());
    if (j == 0) return sp.v.front();
    if (j >= nd) return sp.v.back();
    const double f = (t - sp.t[j - 1]) / (sp.t[j] - sp.t[j - 1]);
    return sp.v[j - 1] + f * (sp.v[j] - sp.v[j - 1]);
  };

  Template tpl;
  tpl.surface_label = label;
  tpl.twist_count = twists;
  tpl.g_samples.resize(m);
  tpl.k_samples.resize(m);

  const double dq = q_max * 1e-7;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = std::min(static_cast<double>(i) * hw.dt, T);
    const double s = s_at_t(t);
    const double q = q_at_s(s);
    // unit tangent by central difference in the curve parameter
    const double q0 = std::max(0.0, q - dq), q1 = std::min(q_max, q + dq);
    Vec3 dp = c(q1) - c(q0);
    const double dl = dp.norm();
    Vec3 tan = dl > 0 ? dp * (1.0 / dl) : Vec3{0, 0, 0};
    tpl.g_samples[i] = tan * (v_at_t(t) / hw.k_scale());
  }
  tpl.k_samples[0] = {0, 0, 0};
  for (std::size_t i = 1; i < m; ++i)
    tpl.k_samples[i] =
        tpl.k_samples[i - 1] +
        hw.k_scale() * hw.dt * 0.5 * (tpl.g_samples[i - 1] + tpl.g_samples[i]);

  // endpoint projection onto the target radius
  const double r_end = tpl.k_samples.back().norm();
  const double r_target = c(q_max).norm();
  if (r_end > 0.0) {
    const double f = r_target / r_end;
    for (auto& g : tpl.g_samples) g = g * f;
    for (auto& k : tpl.k_samples) k = k * f;
  }
  return tpl;
}

template <typename Curve>
Template design_curve_template(Curve&& c, double q_max, std::size_t n_dense,
                               const HardwareConfig& hw, double label,
                               int twists) {
  double factor = 1.0;
  for (int attempt = 0; attempt < 20; ++attempt) {
    auto sp = time_parameterize(c, q_max, n_dense, hw, factor);
    if (sp.total_time() > hw.t_read) throw InfeasibleDesign(sp.total_time());
    Template tpl = raster_template(c, q_max, sp, hw, label, twists);
    try {
      check_template(tpl, hw);
      return tpl;
    } catch (const std::logic_error&) {
      factor *= 0.97;  // discrete slew overshoot: slow down and re-raster
    }
  }
  throw InfeasibleDesign(hw.t_read);
}

inline std::size_t dense_points_for_twist(double theta_total) {
  const double n = std::max(4096.0, 24.0 * std::abs(theta_total));
  return static_cast<std::size_t>(std::min(n, 262144.0));
}

}  // namespace detail

// Straight center-out spoke along +k_z to radius K(phi): slew-limited ramp
// plus plateau, plateau amplitude stretched so the readout ends on a raster
// sample exactly at the target extent.
inline Template design_radial_spoke(const ExtentModel& e,
                                    const HardwareConfig& hw, double phi) {
  hw.validate();
  const double K = extent_at(e, phi);
  const double vmax = hw.v_max() * detail::kHeadroom;
  const double amax = hw.a_max() * detail::kHeadroom;

  const double tri = std::sqrt(2.0 * K / amax);
  double tmin = (K <= vmax * vmax / (2.0 * amax))
                    ? tri
                    : vmax / amax + (K - vmax * vmax / (2.0 * amax)) / vmax;
  const std::size_t m = static_cast<std::size_t>(std::ceil(tmin / hw.dt));
  const double T = static_cast<double>(m) * hw.dt;
  if (T > hw.t_read + 1e-12) throw InfeasibleDesign(T);

  // plateau speed for an exact arrival at K over duration T
  double disc = T * T - 2.0 * K / amax;
  if (disc < 0.0) disc = 0.0;
  const double vp = amax * (T - std::sqrt(disc));
  const double t1 = vp / amax;

  Template tpl;
  tpl.surface_label = phi;
  tpl.twist_count = 1;
  tpl.g_samples.resize(m + 1);
  tpl.k_samples.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    const double t = static_cast<double>(i) * hw.dt;
    const double v = std::min(amax * t, vp);
    tpl.g_samples[i] = {0, 0, v / hw.k_scale()};
    (void)t1;
  }
  tpl.k_samples[0] = {0, 0, 0};
  for (std::size_t i = 1; i <= m; ++i)
    tpl.k_samples[i] =
        tpl.k_samples[i - 1] +
        hw.k_scale() * hw.dt * 0.5 * (tpl.g_samples[i - 1] + tpl.g_samples[i]);
  const double f = K / tpl.k_samples.back().z;
  for (auto& g : tpl.g_samples) g = g * f;
  for (auto& k : tpl.k_samples) k = k * f;
  return tpl;
}

// Azimuth law of a conic interleaf: theta(k) = (2 pi / n) * integral of
// L_c(tau; phi, alpha) dtau, where L_c is the conic-surface FOV modulated by
// the variable-density law.  alpha = 1 gives theta(k) = 2 pi L_c(phi) k / n.
inline SampledFunction cone_twist_law(const FovModel& fm, const ExtentModel& e,
                                      const DensityParams& d, double phi,
                                      int n, std::size_t grid = 4096) {
  const double K = extent_at(e, phi);
  const double Lc = cone_fov(fm, phi);
  const double floor_frac = d.floor_frac(Lc, K);
  std::vector<double> ks(grid), th(grid);
  double acc = 0.0, prev = Lc * vd_scale(d.alpha, 0.0, K, floor_frac);
  const double dk = K / static_cast<double>(grid - 1);
  ks[0] = 0.0;
  th[0] = 0.0;
  for (std::size_t j = 1; j < grid; ++j) {
    ks[j] = dk * static_cast<double>(j);
    const double cur = Lc * vd_scale(d.alpha, ks[j], K, floor_frac);
    acc += 0.5 * (prev + cur) * dk;
    th[j] = 2.0 * kPi * acc / static_cast<double>(n);
    prev = cur;
  }
  return SampledFunction(std::move(ks), std::move(th));
}

inline Template design_cone_template(const FovModel& fm, const ExtentModel& e,
                                     const DensityParams& d,
                                     const HardwareConfig& hw, double phi,
                                     int n) {
  if (n < 1) throw std::invalid_argument("design_cone_template: n >= 1");
  const double K = extent_at(e, phi);
  const double sphi = std::sin(phi), cphi = std::cos(phi);
  SampledFunction law = cone_twist_law(fm, e, d, phi, n);
  auto curve = [&](double k) -> Vec3 {
    const double th = law(k);
    return {k * std::cos(th) * sphi, k * std::sin(th) * sphi, k * cphi};
  };
  const std::size_t nd = detail::dense_points_for_twist(law.y.back());
  return detail::design_curve_template(curve, K, nd, hw, phi, n);
}

// Planar spiral interleaf in the plane k_z = z.  Radial extent comes from
// the spherical radial-resolution rule; the twist follows
// d(theta)/dk = 2 pi L_r(k) / n with the radial variable-density law.
inline Template design_spiral_template(const FovModel& fm,
                                       const ExtentModel& e,
                                       const DensityParams& d,
                                       const HardwareConfig& hw, double z,
                                       int n, PoleRule rule = PoleRule::coarsen) {
  if (n < 1) throw std::invalid_argument("design_spiral_template: n >= 1");
  if (std::abs(z) > e.k_z * (1.0 + 1e-12))
    throw std::domain_error("design_spiral_template: |z| > K_z");
  const double k_r_floor = 1.0 / fm.l_r;  // keep pole planes constructible
  const double dr = spherical_radial_resolution(e, 1.0 / (2.0 * e.k_r), z,
                                                rule, k_r_floor);
  const double krm = std::max(1.0 / (2.0 * dr), k_r_floor);
  const double floor_frac = d.floor_frac(fm.l_r, krm);

  std::size_t grid = 4096;
  std::vector<double> ks(grid), th(grid);
  double acc = 0.0, prev = fm.l_r * vd_scale(d.alpha_r, 0.0, krm, floor_frac);
  const double dk = krm / static_cast<double>(grid - 1);
  for (std::size_t j = 1; j < grid; ++j) {
    ks[j] = dk * static_cast<double>(j);
    const double cur = fm.l_r * vd_scale(d.alpha_r, ks[j], krm, floor_frac);
    acc += 0.5 * (prev + cur) * dk;
    th[j] = 2.0 * kPi * acc / static_cast<double>(n);
    prev = cur;
  }
  SampledFunction law(std::move(ks), std::move(th));

  auto curve = [&](double k) -> Vec3 {
    const double t = law(k);
    return {k * std::cos(t), k * std::sin(t), 0.0};
  };
  const std::size_t nd = detail::dense_points_for_twist(law.y.back());
  Template tpl = detail::design_curve_template(curve, krm, nd, hw, z, n);
  for (auto& k : tpl.k_samples) k.z = z;  // constant plane height
  return tpl;
}

namespace detail {

// Smallest n for which the designer's traversal fits t_read.  Feasibility is
// monotone in n (more interleaves, less twist per interleaf).
template <typename Feasible>
int smallest_feasible(Feasible&& ok, int n_cap = (1 << 20)) {
  if (ok(1)) return 1;
  int lo = 1, hi = 2;
  while (hi < n_cap && !ok(hi)) {
    lo = hi;
    hi *= 2;
  }
  if (hi >= n_cap && !ok(hi)) throw InfeasibleDesign(0.0);
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace detail

inline int estimate_cone_interleaves(const FovModel& fm, const ExtentModel& e,
                                     const DensityParams& d,
                                     const HardwareConfig& hw, double phi) {
  // the zero-twist limit must be reachable at all
  design_radial_spoke(e, hw, phi);
  // probe the actual synthesis so rasterization and retry slowdowns are
  // accounted for; a continuous-time estimate can be ~3% optimistic
  auto feasible = [&](int n) {
    try {
      design_cone_template(fm, e, d, hw, phi, n);
      return true;
    } catch (const InfeasibleDesign&) {
      return false;
    }
  };
  return detail::smallest_feasible(feasible);
}

inline int estimate_spiral_interleaves(const FovModel& fm,
                                       const ExtentModel& e,
                                       const DensityParams& d,
                                       const HardwareConfig& hw, double z,
                                       PoleRule rule = PoleRule::coarsen) {
  auto feasible = [&](int n) {
    try {
      design_spiral_template(fm, e, d, hw, z, n, rule);
      return true;
    } catch (const InfeasibleDesign&) {
      return false;
    }
  };
  return detail::smallest_feasible(feasible);
}

}  // namespace ktraj
