#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "ktraj/assembly.hpp"
#include "ktraj/dcf.hpp"

namespace ktraj {

// Point spread function on a regular image grid, from direct nonuniform
// Fourier summation of DCF-weighted samples.  Normalized so the center
// voxel is 1.
struct PsfImage {
  std::array<int, 3> shape{0, 0, 0};
  std::array<double, 3> voxel_cm{0, 0, 0};  // voxel pitch
  std::vector<std::complex<double>> values; // x fastest, z slowest

  std::complex<double> at(int ix, int iy, int iz) const {
    return values[(static_cast<std::size_t>(iz) * shape[1] + iy) * shape[0] + ix];
  }
  std::array<int, 3> center() const {
    return {shape[0] / 2, shape[1] / 2, shape[2] / 2};
  }
  // magnitude profile through the center along one axis
  std::vector<double> axis_profile(int axis) const {
    const auto c = center();
    std::vector<double> out(shape[axis]);
    for (int i = 0; i < shape[axis]; ++i) {
      int ix = c[0], iy = c[1], iz = c[2];
      (axis == 0 ? ix : axis == 1 ? iy : iz) = i;
      out[i] = std::abs(at(ix, iy, iz));
    }
    return out;
  }
};

inline constexpr double kPsfOpBudget = 1e10;

inline PsfImage compute_psf(const Trajectory& traj, const DcfTable& dcf,
                            std::array<int, 3> grid_shape,
                            std::array<double, 3> fov_render_cm) {
  const std::size_t n_samples = traj.total_samples();
  const std::size_t n_vox = static_cast<std::size_t>(grid_shape[0]) *
                            grid_shape[1] * grid_shape[2];
  if (static_cast<double>(n_samples) * static_cast<double>(n_vox) > kPsfOpBudget)
    throw std::invalid_argument(
        "compute_psf: op budget exceeded; reduce grid or subsample readouts");
  if (dcf.weights.size() != traj.readouts.size())
    throw std::invalid_argument("compute_psf: dcf not aligned to trajectory");

  std::vector<Vec3> ks;
  std::vector<double> ws;
  ks.reserve(n_samples);
  ws.reserve(n_samples);
  for (std::size_t i = 0; i < traj.readouts.size(); ++i) {
    const auto& ro = traj.readouts[i];
    if (dcf.weights[i].size() != ro.k_samples.size())
      throw std::invalid_argument("compute_psf: dcf row length mismatch");
    for (std::size_t s = 0; s < ro.k_samples.size(); ++s) {
      ks.push_back(ro.k_samples[s]);
      ws.push_back(dcf.weights[i][s]);
    }
  }

  PsfImage img;
  img.shape = grid_shape;
  for (int a = 0; a < 3; ++a)
    img.voxel_cm[a] = fov_render_cm[a] / static_cast<double>(grid_shape[a]);
  img.values.resize(n_vox);

  const int nx = grid_shape[0], ny = grid_shape[1], nz = grid_shape[2];
#pragma omp parallel for schedule(static)
  for (int iz = 0; iz < nz; ++iz) {
    const double z = (iz - nz / 2) * img.voxel_cm[2];
    for (int iy = 0; iy < ny; ++iy) {
      const double y = (iy - ny / 2) * img.voxel_cm[1];
      for (int ix = 0; ix < nx; ++ix) {
        const double x = (ix - nx / 2) * img.voxel_cm[0];
        double re = 0.0, im = 0.0;
        for (std::size_t s = 0; s < ks.size(); ++s) {
          const double ph =
              2.0 * kPi * (ks[s].x * x + ks[s].y * y + ks[s].z * z);
          re += ws[s] * std::cos(ph);
          im += ws[s] * std::sin(ph);
        }
        img.values[(static_cast<std::size_t>(iz) * ny + iy) * nx + ix] = {re, im};
      }
    }
  }

  const auto c = img.center();
  const std::complex<double> dc = img.at(c[0], c[1], c[2]);
  if (std::abs(dc) > 0.0)
    for (auto& v : img.values) v /= dc;
  return img;
}

// Full width at half maximum of the central lobe along one axis, in cm,
// by linear interpolation of the half-maximum crossings.
inline double psf_fwhm(const PsfImage& img, int axis) {
  const auto prof = img.axis_profile(axis);
  const int c = img.shape[axis] / 2;
  const double half = prof[c] / 2.0;
  auto cross = [&](int dir) -> double {
    for (int i = c; i + 1 < static_cast<int>(prof.size()) && i > 0; i += dir) {
      const int j = i + dir;
      if (prof[j] <= half) {
        const double f = (prof[i] - half) / (prof[i] - prof[j]);
        return (std::abs(i - c) + f) * img.voxel_cm[axis];
      }
    }
    return 0.0;
  };
  return cross(+1) + cross(-1);
}

// Position (cm) of the first local magnitude maximum beyond the main lobe
// along an axis; 0 if none found.
inline double first_alias_position(const PsfImage& img, int axis,
                                   double min_height = 0.02) {
  const auto prof = img.axis_profile(axis);
  const int c = img.shape[axis] / 2;
  // step past the main lobe first
  int i = c;
  while (i + 1 < static_cast<int>(prof.size()) && prof[i + 1] < prof[i]) ++i;
  for (; i + 1 < static_cast<int>(prof.size()) - 1; ++i) {
    if (prof[i] >= min_height && prof[i] >= prof[i - 1] && prof[i] > prof[i + 1])
      return (i - c) * img.voxel_cm[axis];
  }
  return 0.0;
}

struct UniformityStats {
  double mean = 0.0;
  double cv = 0.0;  // coefficient of variation of Voronoi areas
  double min = 0.0;
  double max = 0.0;
  std::size_t used_points = 0;
};

// Monte-Carlo spherical Voronoi areas of a unit-vector point set; points
// within `cap_deg` of either pole can be excluded, matching the path's
// known seam behavior there.
inline UniformityStats sphere_uniformity(const std::vector<Vec3>& points,
                                         std::size_t mc_points,
                                         std::uint64_t seed,
                                         double cap_deg = 5.0) {
  if (points.size() < 10)
    throw std::invalid_argument("sphere_uniformity: need >= 10 points");
  std::vector<std::uint64_t> counts(points.size(), 0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t m = 0; m < mc_points; ++m) {
    Vec3 q{gauss(rng), gauss(rng), gauss(rng)};
    const double r = q.norm();
    if (r <= 0.0) { --m; continue; }
    q = q * (1.0 / r);
    std::size_t best = 0;
    double best_dot = -2.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      const double d = q.dot(points[j]);
      if (d > best_dot) { best_dot = d; best = j; }
    }
    ++counts[best];
  }

  const double cap = cap_deg * kPi / 180.0;
  std::vector<double> areas;
  areas.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double phi = std::acos(std::clamp(points[j].z / points[j].norm(), -1.0, 1.0));
    if (phi < cap || phi > kPi - cap) continue;
    areas.push_back(4.0 * kPi * static_cast<double>(counts[j]) /
                    static_cast<double>(mc_points));
  }

  UniformityStats st;
  st.used_points = areas.size();
  if (areas.empty()) return st;
  double sum = 0.0, sum2 = 0.0;
  st.min = areas.front();
  st.max = areas.front();
  for (double a : areas) {
    sum += a;
    sum2 += a * a;
    st.min = std::min(st.min, a);
    st.max = std::max(st.max, a);
  }
  st.mean = sum / static_cast<double>(areas.size());
  const double var = sum2 / static_cast<double>(areas.size()) - st.mean * st.mean;
  st.cv = st.mean > 0.0 ? std::sqrt(std::max(0.0, var)) / st.mean : 0.0;
  return st;
}

enum class ProfileAxis { radius, z, polar };

struct Histogram {
  std::vector<double> edges;    // size bins+1
  std::vector<double> count;    // unweighted
  std::vector<double> weighted; // DCF-weighted
};

inline Histogram density_profile(const Trajectory& traj, const DcfTable& dcf,
                                 ProfileAxis axis, std::size_t bins = 32) {
  double lo = 1e300, hi = -1e300;
  auto coord = [&](const Vec3& k) -> double {
    switch (axis) {
      case ProfileAxis::radius: return k.norm();
      case ProfileAxis::z: return k.z;
      default: {
        const double r = k.norm();
        return r > 0 ? std::acos(std::clamp(k.z / r, -1.0, 1.0)) : 0.0;
      }
    }
  };
  for (const auto& ro : traj.readouts)
    for (const auto& k : ro.k_samples) {
      const double c = coord(k);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  if (!(hi > lo)) hi = lo + 1.0;

  Histogram h;
  h.edges.resize(bins + 1);
  h.count.assign(bins, 0.0);
  h.weighted.assign(bins, 0.0);
  for (std::size_t b = 0; b <= bins; ++b)
    h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
  const bool have_w = dcf.weights.size() == traj.readouts.size();
  for (std::size_t i = 0; i < traj.readouts.size(); ++i) {
    const auto& ro = traj.readouts[i];
    for (std::size_t s = 0; s < ro.k_samples.size(); ++s) {
      const double c = coord(ro.k_samples[s]);
      std::size_t b = static_cast<std::size_t>(
          std::min(static_cast<double>(bins - 1),
                   std::floor((c - lo) / (hi - lo) * static_cast<double>(bins))));
      h.count[b] += 1.0;
      if (have_w) h.weighted[b] += dcf.weights[i][s];
    }
  }
  return h;
}

}  // namespace ktraj
