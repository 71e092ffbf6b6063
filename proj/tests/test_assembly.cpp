#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ktraj/design.hpp"

using namespace ktraj;

namespace {

HardwareConfig desk_hw() {
  HardwareConfig hw;
  hw.t_read = 2.8;
  return hw;
}

Template fake_template(double label) {
  Template t;
  t.surface_label = label;
  t.twist_count = 1;
  t.k_samples = {{0, 0, 0}, {1, 0, label}};
  t.g_samples = {{0, 0, 0}, {0, 0, 0}};
  return t;
}

}  // namespace

TEST_CASE("TemplateSet: nearest lookup within tolerance") {
  std::vector<Template> tpls = {fake_template(0.1), fake_template(0.5),
                                fake_template(0.9)};
  TemplateSet set(std::move(tpls), 0.25);
  CHECK(set.at(0.12).surface_label == doctest::Approx(0.1));
  CHECK(set.at(0.62).surface_label == doctest::Approx(0.5));
  CHECK(set.at(1.0).surface_label == doctest::Approx(0.9));
  CHECK_THROWS(set.at(2.0));
}

TEST_CASE("TemplateSet: designer fallback beyond tolerance") {
  std::vector<Template> tpls = {fake_template(0.0)};
  int calls = 0;
  TemplateSet set(std::move(tpls), 0.1, [&](double label) {
    ++calls;
    return fake_template(label);
  });
  CHECK(set.at(0.05).surface_label == doctest::Approx(0.0));
  CHECK(calls == 0);
  const Template& a = set.at(0.7);
  CHECK(a.surface_label == doctest::Approx(0.7));
  CHECK(calls == 1);
  // references stay valid across later fallback synthesis
  const Template& b = set.at(1.4);
  CHECK(a.surface_label == doctest::Approx(0.7));
  CHECK(b.surface_label == doctest::Approx(1.4));
}

TEST_CASE("radial synthesis: spokes land on the prescribed directions") {
  FovModel fm(10.0, 10.0);
  ExtentModel e(1.25, 1.25);
  auto hw = desk_hw();
  auto d = design_radial(fm, e, hw);
  REQUIRE(d.trajectory.readouts.size() == static_cast<std::size_t>(d.discrete.count));

  for (std::size_t i = 0; i < d.trajectory.readouts.size(); i += 97) {
    const auto& ro = d.trajectory.readouts[i];
    const Vec3 tip = ro.k_samples.back();
    const double K = extent_at(e, ro.second);
    CHECK(tip.norm() == doctest::Approx(K).epsilon(1e-6));
    // direction (theta, phi) in spherical coordinates
    CHECK(tip.z == doctest::Approx(K * std::cos(ro.second)).epsilon(1e-9));
    const double exp_x = K * std::sin(ro.second) * std::cos(ro.theta);
    const double exp_y = K * std::sin(ro.second) * std::sin(ro.theta);
    CHECK(tip.x == doctest::Approx(exp_x).epsilon(1e-9));
    CHECK(tip.y == doctest::Approx(exp_y).epsilon(1e-9));
    CHECK(ro.k_samples.front().norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("rotations preserve norms and gradient consistency") {
  FovModel fm(12.0, 12.0);
  ExtentModel e(1.0, 1.0);
  auto hw = desk_hw();
  DesignOptions opt;
  auto d = design_radial(fm, e, hw, opt);
  const double k_scale = hw.k_scale();
  for (std::size_t i = 0; i < d.trajectory.readouts.size(); i += 131) {
    const auto& ro = d.trajectory.readouts[i];
    // rotated k must still integrate the rotated g
    Vec3 acc{0, 0, 0};
    double max_err = 0.0;
    for (std::size_t s = 1; s < ro.k_samples.size(); ++s) {
      acc = acc + (ro.g_samples[s - 1] + ro.g_samples[s]) *
                      (0.5 * hw.dt * k_scale);
      const Vec3 diff = ro.k_samples[s] - ro.k_samples.front() - acc;
      max_err = std::max(max_err, diff.norm());
    }
    CHECK(max_err < 1e-6 * e.k_r);
  }
}

TEST_CASE("cones synthesis: samples stay on their cone") {
  FovModel fm(10.0, 10.0);
  ExtentModel e(0.8, 0.8);
  DensityParams dens;
  auto hw = desk_hw();
  DesignOptions opt;
  opt.surfaces = 16;
  auto d = design_cones(fm, e, dens, hw, opt);
  REQUIRE(!d.trajectory.readouts.empty());

  for (std::size_t i = 0; i < d.trajectory.readouts.size(); i += 53) {
    const auto& ro = d.trajectory.readouts[i];
    const double phi = ro.template_label;
    for (std::size_t s = 8; s < ro.k_samples.size(); s += 40) {
      const auto& k = ro.k_samples[s];
      const double r = k.norm();
      if (r < 0.05 * e.k_r) continue;
      const double pa = std::acos(std::clamp(k.z / r, -1.0, 1.0));
      CHECK(pa == doctest::Approx(phi).epsilon(0.02));
    }
  }
}

TEST_CASE("cones synthesis: rotation only changes azimuth") {
  FovModel fm(10.0, 10.0);
  ExtentModel e(0.8, 0.8);
  DensityParams dens;
  auto hw = desk_hw();
  DesignOptions opt;
  opt.surfaces = 8;
  auto d = design_cones(fm, e, dens, hw, opt);

  // two readouts sharing a template differ by a pure z-rotation
  const auto& ros = d.trajectory.readouts;
  for (std::size_t i = 0; i + 1 < ros.size(); ++i) {
    if (ros[i].template_label != ros[i + 1].template_label) continue;
    const double dth = ros[i + 1].theta - ros[i].theta;
    const auto& a = ros[i].k_samples;
    const auto& b = ros[i + 1].k_samples;
    REQUIRE(a.size() == b.size());
    for (std::size_t s = 0; s < a.size(); s += 100) {
      const Vec3 rot = rotate_z(a[s], dth);
      CHECK(rot.x == doctest::Approx(b[s].x).epsilon(1e-9));
      CHECK(rot.y == doctest::Approx(b[s].y).epsilon(1e-9));
      CHECK(a[s].z == doctest::Approx(b[s].z).epsilon(1e-12));
    }
    break;
  }
}

TEST_CASE("stack synthesis: planes pinned to path z, in-plane g only") {
  FovModel fm(12.0, 3.0);
  ExtentModel e(0.8, 0.8);
  DensityParams dens;
  auto hw = desk_hw();
  hw.t_read = 6.0;
  DesignOptions opt;
  opt.surfaces = 16;
  auto d = design_stack(fm, e, dens, hw, opt);
  REQUIRE(!d.trajectory.readouts.empty());

  for (const auto& ro : d.trajectory.readouts) {
    for (std::size_t s = 0; s < ro.k_samples.size(); s += 64)
      CHECK(ro.k_samples[s].z == doctest::Approx(ro.second).epsilon(1e-12));
    CHECK(std::abs(ro.g_samples.back().z) < 1e-12);
  }
}

TEST_CASE("trajectory totals and index bookkeeping") {
  FovModel fm(10.0, 10.0);
  ExtentModel e(1.0, 1.0);
  auto hw = desk_hw();
  auto d = design_radial(fm, e, hw);
  CHECK(d.trajectory.readouts.size() ==
        static_cast<std::size_t>(d.discrete.count));
  std::size_t total = 0;
  for (std::size_t i = 0; i < d.trajectory.readouts.size(); ++i) {
    CHECK(d.trajectory.readouts[i].index == static_cast<std::int64_t>(i));
    total += d.trajectory.readouts[i].k_samples.size();
  }
  CHECK(total == d.trajectory.total_samples());
}

TEST_CASE("radial azimuths wind many times around the pole axis") {
  FovModel fm(10.0, 10.0);
  ExtentModel e(1.25, 1.25);
  auto hw = desk_hw();
  auto d = design_radial(fm, e, hw);
  // winding count ~ pi K L_90: the spiral crosses each meridian about
  // pi * 1.25 * 10 ~ 39 times
  const double span = d.discrete.theta.back() - d.discrete.theta.front();
  CHECK(span > 2.0 * kPi * 30.0);
  CHECK(span < 2.0 * kPi * 50.0);
  // distinct azimuths modulo 2 pi should cover the circle
  std::vector<double> mod;
  for (double th : d.discrete.theta)
    mod.push_back(th - 2.0 * kPi * std::floor(th / (2.0 * kPi)));
  std::sort(mod.begin(), mod.end());
  double max_gap = mod.front() + 2.0 * kPi - mod.back();
  for (std::size_t i = 1; i < mod.size(); ++i)
    max_gap = std::max(max_gap, mod[i] - mod[i - 1]);
  CHECK(max_gap < 0.1);
}
