#pragma once

#include <cstdint>
#include <optional>

#include "ktraj/assembly.hpp"
#include "ktraj/dcf.hpp"
#include "ktraj/paths.hpp"
#include "ktraj/templates.hpp"

namespace ktraj {

// Tabulate the per-surface interleaf count n(phi) on `surfaces` conic
// surfaces (cell midpoints of (0, pi)); the path solver interpolates the
// integer counts as a smooth density.
inline SampledFunction build_cone_interleaf_table(
    const FovModel& fm, const ExtentModel& e, const DensityParams& d,
    const HardwareConfig& hw, std::size_t surfaces = 64) {
  std::vector<double> phis(surfaces), ns(surfaces);
  for (std::size_t i = 0; i < surfaces; ++i) {
    phis[i] = kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(surfaces);
    ns[i] = static_cast<double>(
        estimate_cone_interleaves(fm, e, d, hw, phis[i]));
  }
  return SampledFunction(std::move(phis), std::move(ns));
}

inline SampledFunction build_spiral_interleaf_table(
    const FovModel& fm, const ExtentModel& e, const DensityParams& d,
    const HardwareConfig& hw, std::size_t surfaces = 64,
    PoleRule rule = PoleRule::coarsen) {
  std::vector<double> zs(surfaces), ns(surfaces);
  for (std::size_t i = 0; i < surfaces; ++i) {
    zs[i] = e.k_z * (2.0 * (static_cast<double>(i) + 0.5) /
                         static_cast<double>(surfaces) -
                     1.0);
    ns[i] = static_cast<double>(
        estimate_spiral_interleaves(fm, e, d, hw, zs[i], rule));
  }
  return SampledFunction(std::move(zs), std::move(ns));
}

struct Design {
  SpiralPath path;
  DiscretizedPath discrete;
  Trajectory trajectory;
  DcfTable dcf;
  double fov_scale = 1.0;
  int match_iterations = 0;
};

struct DesignOptions {
  std::optional<std::int64_t> target_readouts;
  double offset = 0.5;
  std::size_t surfaces = 64;
  std::size_t grid = kDefaultGrid;
  PoleRule pole_rule = PoleRule::coarsen;
  bool build_waveforms = true;  // paths only when false
};

// 3D radial pipeline.  A readout-count target is met by bisecting on a
// global FOV scale applied to the path design; spokes depend only on the
// k-space extent, so the waveforms are unaffected.
inline Design design_radial(const FovModel& fm, const ExtentModel& e,
                            const HardwareConfig& hw,
                            const DesignOptions& opt = {}) {
  Design d;
  if (opt.target_readouts) {
    auto r = match_readout_count(
        [&](double s) {
          return design_radial_path(FovModel(fm.l_r * s, fm.l_z * s), e,
                                    opt.grid);
        },
        *opt.target_readouts);
    d.path = std::move(r.path);
    d.fov_scale = r.scale;
    d.match_iterations = r.iterations;
  } else {
    d.path = design_radial_path(fm, e, opt.grid);
  }
  d.discrete = discretize(d.path, opt.offset);
  if (opt.build_waveforms) {
    TemplateSet set({}, 0.0,
                    [&](double phi) { return design_radial_spoke(e, hw, phi); });
    d.trajectory = synthesize(d.discrete, set);
    d.dcf = radial_dcf(d.trajectory, d.path);
    d.dcf.normalize();
  }
  return d;
}

// 3D cones pipeline.  The interleaf table n(phi) is built against the
// prescribed FOV; a readout-count target scales only the path's FOV model
// (spacing between interleaves), leaving the templates untouched.
inline Design design_cones(const FovModel& fm, const ExtentModel& e,
                           const DensityParams& dens, const HardwareConfig& hw,
                           const DesignOptions& opt = {}) {
  SampledFunction n_of_phi = build_cone_interleaf_table(fm, e, dens, hw,
                                                        opt.surfaces);
  Design d;
  if (opt.target_readouts) {
    auto r = match_readout_count(
        [&](double s) {
          return design_cones_path(FovModel(fm.l_r * s, fm.l_z * s), e,
                                   n_of_phi, opt.grid);
        },
        *opt.target_readouts);
    d.path = std::move(r.path);
    d.fov_scale = r.scale;
    d.match_iterations = r.iterations;
  } else {
    d.path = design_cones_path(fm, e, n_of_phi, opt.grid);
  }
  d.discrete = discretize(d.path, opt.offset);
  if (opt.build_waveforms) {
    const double tol = 0.5 * kPi / static_cast<double>(opt.surfaces);
    std::vector<Template> tpls;
    tpls.reserve(opt.surfaces);
    for (std::size_t i = 0; i < opt.surfaces; ++i) {
      const double phi = n_of_phi.x[i];
      tpls.push_back(design_cone_template(
          fm, e, dens, hw, phi, static_cast<int>(n_of_phi.y[i])));
    }
    TemplateSet set(std::move(tpls), tol, [&](double phi) {
      return design_cone_template(
          fm, e, dens, hw, phi,
          std::max(1, static_cast<int>(std::lround(n_of_phi(phi)))));
    });
    d.trajectory = synthesize(d.discrete, set);
    d.dcf = cones_dcf(d.trajectory, d.path);
    d.dcf.normalize();
  }
  return d;
}

// Stack-of-spirals pipeline.  A readout-count target scales only the path's
// z-FOV (plane spacing); in-plane templates are untouched.
inline Design design_stack(const FovModel& fm, const ExtentModel& e,
                           const DensityParams& dens, const HardwareConfig& hw,
                           const DesignOptions& opt = {}) {
  SampledFunction n_of_z = build_spiral_interleaf_table(fm, e, dens, hw,
                                                        opt.surfaces,
                                                        opt.pole_rule);
  Design d;
  if (opt.target_readouts) {
    auto r = match_readout_count(
        [&](double s) {
          return design_stack_path(FovModel(fm.l_r, fm.l_z * s), e, dens,
                                   n_of_z, opt.grid);
        },
        *opt.target_readouts);
    d.path = std::move(r.path);
    d.fov_scale = r.scale;
    d.match_iterations = r.iterations;
  } else {
    d.path = design_stack_path(fm, e, dens, n_of_z, opt.grid);
  }
  d.discrete = discretize(d.path, opt.offset);
  if (opt.build_waveforms) {
    const double tol = e.k_z / static_cast<double>(opt.surfaces);
    std::vector<Template> tpls;
    tpls.reserve(opt.surfaces);
    for (std::size_t i = 0; i < opt.surfaces; ++i)
      tpls.push_back(design_spiral_template(fm, e, dens, hw, n_of_z.x[i],
                                            static_cast<int>(n_of_z.y[i]),
                                            opt.pole_rule));
    TemplateSet set(std::move(tpls), tol, [&](double z) {
      return design_spiral_template(
          fm, e, dens, hw, z,
          std::max(1, static_cast<int>(std::lround(n_of_z(z)))), opt.pole_rule);
    });
    d.trajectory = synthesize(d.discrete, set);
    d.dcf = stack_dcf(d.trajectory, d.path, dens);
    d.dcf.normalize();
  }
  return d;
}

}  // namespace ktraj
