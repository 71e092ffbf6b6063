#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ktraj/assembly.hpp"
#include "ktraj/geometry.hpp"
#include "ktraj/paths.hpp"

namespace ktraj {

// Per-readout, per-sample density compensation weights, defined up to a
// common positive scale.  All constant prefactors (gamma/2pi etc.) are
// folded into `normalization`.
struct DcfTable {
  std::vector<std::vector<double>> weights;
  double normalization = 1.0;

  double sum() const {
    double s = 0.0;
    for (const auto& row : weights)
      for (double w : row) s += w;
    return s;
  }
  // rescale so the weights sum to 1; comparisons are scale-free
  void normalize() {
    const double s = sum();
    if (s > 0.0) {
      for (auto& row : weights)
        for (double& w : row) w /= s;
      normalization *= s;
    }
  }
};

// 3D radial DCF: k |g.k| / (K^2(phi_p) L_90(phi_p)); the sin(phi_p) factors
// of the Jacobian and the path density cancel analytically.
inline DcfTable radial_dcf(const Trajectory& traj, const SpiralPath& path) {
  if (traj.kind != PathKind::ellipsoid_radial ||
      path.kind != PathKind::ellipsoid_radial)
    throw std::invalid_argument("radial_dcf: kind mismatch");
  DcfTable d;
  d.weights.resize(traj.readouts.size());
  for (std::size_t i = 0; i < traj.readouts.size(); ++i) {
    const Readout& ro = traj.readouts[i];
    const double K = extent_at(path.extent, ro.second);
    const double L90 = orthogonal_fov(path.fov, ro.second);
    auto& row = d.weights[i];
    row.resize(ro.k_samples.size());
    for (std::size_t s = 0; s < row.size(); ++s) {
      const double k = ro.k_samples[s].norm();
      const double gk = std::abs(ro.g_samples[s].dot(ro.k_samples[s]));
      row[s] = k * gk / (K * K * L90);
    }
  }
  return d;
}

// Cones DCF: k |g.k| sin(phi_p) / (K(phi_p) n(phi_p) L_90(phi_p)).
inline DcfTable cones_dcf(const Trajectory& traj, const SpiralPath& path) {
  if (traj.kind != PathKind::ellipsoid_cones ||
      path.kind != PathKind::ellipsoid_cones)
    throw std::invalid_argument("cones_dcf: kind mismatch");
  DcfTable d;
  d.weights.resize(traj.readouts.size());
  for (std::size_t i = 0; i < traj.readouts.size(); ++i) {
    const Readout& ro = traj.readouts[i];
    const double phi = ro.second;
    const double denom = extent_at(path.extent, phi) * path.interleaves(phi) *
                         orthogonal_fov(path.fov, phi);
    auto& row = d.weights[i];
    row.resize(ro.k_samples.size());
    for (std::size_t s = 0; s < row.size(); ++s) {
      const double k = ro.k_samples[s].norm();
      const double gk = std::abs(ro.g_samples[s].dot(ro.k_samples[s]));
      row[s] = k * gk * std::sin(phi) / denom;
    }
  }
  return d;
}

// Stack-of-spirals DCF: |g_r . k_r| / (n(z_p) L_z(z_p)).
inline DcfTable stack_dcf(const Trajectory& traj, const SpiralPath& path,
                          const DensityParams& dens = {}) {
  if (traj.kind != PathKind::cylinder_stack ||
      path.kind != PathKind::cylinder_stack)
    throw std::invalid_argument("stack_dcf: kind mismatch");
  DcfTable d;
  d.weights.resize(traj.readouts.size());
  for (std::size_t i = 0; i < traj.readouts.size(); ++i) {
    const Readout& ro = traj.readouts[i];
    const double z = ro.second;
    const double denom =
        path.interleaves(z) * vd_fov_z(path.fov, dens, z, path.extent.k_z);
    auto& row = d.weights[i];
    row.resize(ro.k_samples.size());
    for (std::size_t s = 0; s < row.size(); ++s) {
      const Vec3& k = ro.k_samples[s];
      const Vec3& g = ro.g_samples[s];
      row[s] = std::abs(g.x * k.x + g.y * k.y) / denom;
    }
  }
  return d;
}

namespace detail {

// uniform-grid nearest-neighbor accelerator over a 3D point cloud
class NnGrid {
 public:
  NnGrid(const std::vector<Vec3>& pts, double cell) : pts_(pts), cell_(cell) {
    lo_ = {1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};
    for (const auto& p : pts) {
      lo_.x = std::min(lo_.x, p.x); lo_.y = std::min(lo_.y, p.y);
      lo_.z = std::min(lo_.z, p.z);
      hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
      hi.z = std::max(hi.z, p.z);
    }
    nx_ = dim(lo_.x, hi.x); ny_ = dim(lo_.y, hi.y); nz_ = dim(lo_.z, hi.z);
    cells_.resize(static_cast<std::size_t>(nx_) * ny_ * nz_);
    for (std::size_t i = 0; i < pts.size(); ++i)
      cells_[cell_index(pts[i])].push_back(i);
  }

  std::size_t nearest(const Vec3& q) const {
    const int cx = clampi(static_cast<int>((q.x - lo_.x) / cell_), nx_);
    const int cy = clampi(static_cast<int>((q.y - lo_.y) / cell_), ny_);
    const int cz = clampi(static_cast<int>((q.z - lo_.z) / cell_), nz_);
    std::size_t best = 0;
    double best_d2 = 1e300;
    for (int ring = 0;; ++ring) {
      bool any = false;
      for (int ix = cx - ring; ix <= cx + ring; ++ix) {
        if (ix < 0 || ix >= nx_) continue;
        for (int iy = cy - ring; iy <= cy + ring; ++iy) {
          if (iy < 0 || iy >= ny_) continue;
          for (int iz = cz - ring; iz <= cz + ring; ++iz) {
            if (iz < 0 || iz >= nz_) continue;
            if (ring > 0 && std::abs(ix - cx) != ring &&
                std::abs(iy - cy) != ring && std::abs(iz - cz) != ring)
              continue;  // shell only
            any = true;
            for (std::size_t j :
                 cells_[(static_cast<std::size_t>(ix) * ny_ + iy) * nz_ + iz]) {
              const Vec3 dp = pts_[j] - q;
              const double d2 = dp.dot(dp);
              if (d2 < best_d2) { best_d2 = d2; best = j; }
            }
          }
        }
      }
      // once a hit exists, one extra ring guarantees correctness
      if (best_d2 < 1e300) {
        const double safe = (static_cast<double>(ring) * cell_);
        if (best_d2 <= safe * safe || ring > std::max({nx_, ny_, nz_}))
          return best;
      }
      if (!any && ring > std::max({nx_, ny_, nz_})) return best;
    }
  }

 private:
  static int clampi(int v, int n) { return std::max(0, std::min(v, n - 1)); }
  std::size_t cell_index(const Vec3& p) const {
    const int ix = clampi(static_cast<int>((p.x - lo_.x) / cell_), nx_);
    const int iy = clampi(static_cast<int>((p.y - lo_.y) / cell_), ny_);
    const int iz = clampi(static_cast<int>((p.z - lo_.z) / cell_), nz_);
    return (static_cast<std::size_t>(ix) * ny_ + iy) * nz_ + iz;
  }
  int dim(double lo, double hi) const {
    return std::max(1, static_cast<int>((hi - lo) / cell_) + 1);
  }
  const std::vector<Vec3>& pts_;
  double cell_;
  Vec3 lo_;
  int nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace detail

// Monte-Carlo Voronoi oracle: each trajectory sample is weighted by the
// number of uniform draws inside the design ellipsoid whose nearest sample
// it is.  Deterministic for a fixed seed; independent of the analytic DCFs.
inline DcfTable voronoi_dcf_oracle(const Trajectory& traj,
                                   std::size_t mc_points, std::uint64_t seed) {
  const std::size_t n = traj.total_samples();
  if (n > 200000)
    throw std::invalid_argument(
        "voronoi_dcf_oracle: > 2e5 samples; use a smaller desk-scale design");
  if (mc_points < 100 * n)
    throw std::invalid_argument(
        "voronoi_dcf_oracle: need mc_points >= 100x sample count");

  std::vector<Vec3> pts;
  pts.reserve(n);
  double kr_max = 0.0, kz_max = 0.0;
  for (const auto& ro : traj.readouts)
    for (const auto& k : ro.k_samples) {
      pts.push_back(k);
      kr_max = std::max(kr_max, k.norm_xy());
      kz_max = std::max(kz_max, std::abs(k.z));
    }
  if (kr_max <= 0.0 || kz_max <= 0.0)
    throw std::invalid_argument("voronoi_dcf_oracle: degenerate support");

  // cell size ~ mean sample spacing
  const double vol = 4.0 / 3.0 * kPi * kr_max * kr_max * kz_max;
  const double cell = std::cbrt(vol / static_cast<double>(n)) * 1.5;
  detail::NnGrid grid(pts, cell);

  std::vector<std::uint64_t> counts(n, 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::size_t done = 0;
  while (done < mc_points) {
    const double x = uni(rng), y = uni(rng), z = uni(rng);
    if (x * x + y * y + z * z > 1.0) continue;
    const Vec3 q{x * kr_max, y * kr_max, z * kz_max};
    ++counts[grid.nearest(q)];
    ++done;
  }

  DcfTable d;
  d.weights.resize(traj.readouts.size());
  std::size_t idx = 0;
  for (std::size_t i = 0; i < traj.readouts.size(); ++i) {
    auto& row = d.weights[i];
    row.resize(traj.readouts[i].k_samples.size());
    for (double& w : row) w = static_cast<double>(counts[idx++]);
  }
  return d;
}

}  // namespace ktraj
