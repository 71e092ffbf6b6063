#pragma once

#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "ktraj/paths.hpp"
#include "ktraj/templates.hpp"

namespace ktraj {

// Per-surface template store with nearest-label lookup.  If the nearest
// cached label is farther than tol, the designer callback (when present)
// synthesizes an exact template for the requested label.
class TemplateSet {
 public:
  TemplateSet() = default;
  TemplateSet(std::vector<Template> templates, double tol,
              std::function<Template(double)> designer = nullptr)
      : templates_(std::move(templates)), tol_(tol),
        designer_(std::move(designer)) {
    for (std::size_t i = 0; i < templates_.size(); ++i)
      by_label_.emplace(templates_[i].surface_label, i);
  }

  const Template& at(double label) const {
    const std::size_t i = nearest(label);
    if (i != npos && std::abs(templates_[i].surface_label - label) <= tol_)
      return templates_[i];
    if (designer_) {
      cache_.push_back(designer_(label));
      return cache_.back();
    }
    throw std::runtime_error("TemplateSet: no template near requested label");
  }

  std::size_t size() const { return templates_.size(); }
  const std::vector<Template>& templates() const { return templates_; }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t nearest(double label) const {
    if (by_label_.empty()) return npos;
    auto it = by_label_.lower_bound(label);
    if (it == by_label_.end()) return std::prev(it)->second;
    if (it == by_label_.begin()) return it->second;
    auto prev = std::prev(it);
    return (label - prev->first <= it->first - label) ? prev->second
                                                      : it->second;
  }

  std::vector<Template> templates_;
  std::map<double, std::size_t> by_label_;
  double tol_ = 0.0;
  std::function<Template(double)> designer_;
  mutable std::deque<Template> cache_;
};

struct Readout {
  std::int64_t index = 0;
  double template_label = 0.0;
  double theta = 0.0;
  double second = 0.0;  // phi_i (rad) or z_i (cm^-1)
  double u = 0.0;
  std::vector<Vec3> k_samples;
  std::vector<Vec3> g_samples;
};

struct Trajectory {
  PathKind kind = PathKind::ellipsoid_radial;
  std::vector<Readout> readouts;
  std::size_t total_samples() const {
    std::size_t n = 0;
    for (const auto& r : readouts) n += r.k_samples.size();
    return n;
  }
};

// Rotate templates into the full readout set.  Radial: the +k_z spoke is
// rotated by R_z(theta_i) R_y(phi_i).  Cones/stack: the surface template is
// rotated about k_z by theta_i.
inline Trajectory synthesize(const DiscretizedPath& path,
                             const TemplateSet& templates) {
  Trajectory traj;
  traj.kind = path.kind;
  traj.readouts.resize(path.count);
  for (std::int64_t i = 0; i < path.count; ++i) {
    const double theta = path.theta[i];
    const double second = path.second[i];
    const Template& tpl = templates.at(second);

    Readout& ro = traj.readouts[i];
    ro.index = i;
    ro.template_label = tpl.surface_label;
    ro.theta = theta;
    ro.second = second;
    ro.u = path.u[i];
    ro.k_samples.resize(tpl.k_samples.size());
    ro.g_samples.resize(tpl.g_samples.size());

    if (path.kind == PathKind::ellipsoid_radial) {
      for (std::size_t s = 0; s < tpl.k_samples.size(); ++s) {
        ro.k_samples[s] = rotate_z(rotate_y(tpl.k_samples[s], second), theta);
        ro.g_samples[s] = rotate_z(rotate_y(tpl.g_samples[s], second), theta);
      }
    } else if (path.kind == PathKind::ellipsoid_cones) {
      for (std::size_t s = 0; s < tpl.k_samples.size(); ++s) {
        ro.k_samples[s] = rotate_z(tpl.k_samples[s], theta);
        ro.g_samples[s] = rotate_z(tpl.g_samples[s], theta);
      }
    } else {
      // stack: rotate in-plane, then pin the plane height to the path's z
      for (std::size_t s = 0; s < tpl.k_samples.size(); ++s) {
        Vec3 k = rotate_z(tpl.k_samples[s], theta);
        k.z = second;
        ro.k_samples[s] = k;
        ro.g_samples[s] = rotate_z(tpl.g_samples[s], theta);
      }
    }
  }
  return traj;
}

}  // namespace ktraj
