#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ktraj/templates.hpp"

using namespace ktraj;

namespace {

HardwareConfig desk_hw() {
  HardwareConfig hw;
  hw.g_max = 39.0;
  hw.s_max = 145.0;
  hw.dt = 0.004;
  hw.t_read = 2.8;
  return hw;
}

}  // namespace

TEST_CASE("radial spoke reaches the prescribed extent") {
  ExtentModel e(1.25, 1.25);
  auto hw = desk_hw();
  auto tpl = design_radial_spoke(e, hw, kPi / 2.0);
  check_template(tpl, hw);
  CHECK(tpl.k_samples.front().norm() == doctest::Approx(0.0));
  CHECK(tpl.k_samples.back().norm() == doctest::Approx(1.25).epsilon(1e-6));
  CHECK(tpl.k_samples.back().z == doctest::Approx(1.25).epsilon(1e-6));
  CHECK(tpl.twist_count == 1);
}

TEST_CASE("radial spoke: unreachable extent is infeasible with a hint") {
  ExtentModel e(4.17, 4.17);
  auto hw = desk_hw();
  hw.t_read = 0.05;  // shorter than the ramp
  try {
    design_radial_spoke(e, hw, 0.3);
    FAIL("expected InfeasibleDesign");
  } catch (const InfeasibleDesign& ex) {
    CHECK(ex.min_t_read > hw.t_read);
  }
}

TEST_CASE("radial spoke endpoint time matches trapezoid algebra") {
  ExtentModel e(4.1667, 4.1667);
  auto hw = desk_hw();
  auto tpl = design_radial_spoke(e, hw, kPi / 2.0);
  const double T = static_cast<double>(tpl.k_samples.size() - 1) * hw.dt;
  const double vmax = hw.v_max(), amax = hw.a_max();
  const double ramp = vmax / amax;
  const double expect = ramp + (4.1667 - 0.5 * vmax * ramp) / vmax;
  CHECK(T == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("cone template: total twist follows the uniform law") {
  FovModel fm(28.0, 14.0);
  ExtentModel e(1.25, 1.25);
  DensityParams d;
  auto hw = desk_hw();
  const double phi = kPi / 3.0;
  const int n = 4;
  const double K = extent_at(e, phi);
  const double expect_twist = 2.0 * kPi * cone_fov(fm, phi) * K / n;
  auto law = cone_twist_law(fm, e, d, phi, n);
  CHECK(law.y.back() == doctest::Approx(expect_twist).epsilon(1e-4));

  // doubling n halves the twist
  auto law2 = cone_twist_law(fm, e, d, phi, 2 * n);
  CHECK(law2.y.back() == doctest::Approx(0.5 * expect_twist).epsilon(1e-6));

  // a feasible interleaf count synthesizes cleanly
  const int n_ok = estimate_cone_interleaves(fm, e, d, hw, phi);
  auto tpl = design_cone_template(fm, e, d, hw, phi, n_ok);
  check_template(tpl, hw);
}

TEST_CASE("cone template approaches a spoke for large n") {
  FovModel fm(10.0, 10.0);
  ExtentModel e(1.25, 1.25);
  DensityParams d;
  auto hw = desk_hw();
  const double phi = 1.1;
  auto spoke = design_radial_spoke(e, hw, phi);
  auto cone = design_cone_template(fm, e, d, hw, phi, 4000);
  const double t_spoke = static_cast<double>(spoke.k_samples.size()) * hw.dt;
  const double t_cone = static_cast<double>(cone.k_samples.size()) * hw.dt;
  CHECK(t_cone == doctest::Approx(t_spoke).epsilon(0.1));
}

TEST_CASE("same-azimuth crossings of a uniform cone are spaced 1/L_c") {
  FovModel fm(12.0, 8.0);
  ExtentModel e(1.0, 1.0);
  DensityParams d;
  const double phi = kPi / 2.5;
  const int n = 5;
  auto law = cone_twist_law(fm, e, d, phi, n, 65536);
  const double Lc = cone_fov(fm, phi);
  // with n rotated copies, crossings at a fixed azimuth occur every 2 pi / n
  // of twist; the radial gap between them is the Nyquist spacing 1/L_c
  for (double frac : {0.3, 0.6, 0.85}) {
    const double theta0 = law.y.back() * frac;
    auto inv = invert_monotone(law);
    const double k0 = inv(theta0);
    const double k1 = inv(theta0 + 2.0 * kPi / n);
    CHECK(k1 - k0 == doctest::Approx(1.0 / Lc).epsilon(1e-3));
  }
}

TEST_CASE("estimate_cone_interleaves: long readout needs one interleaf") {
  FovModel fm(10.0, 10.0);
  ExtentModel e(0.5, 0.5);
  DensityParams d;
  auto hw = desk_hw();
  hw.t_read = 50.0;
  CHECK(estimate_cone_interleaves(fm, e, d, hw, kPi / 2.0) == 1);
}

TEST_CASE("estimate_cone_interleaves: nonincreasing in t_read, peaks in-plane") {
  FovModel fm(28.0, 14.0);
  ExtentModel e(1.25, 1.25);
  DensityParams d;
  auto hw = desk_hw();
  hw.t_read = 1.0;

  int prev = 1 << 30;
  for (double tr : {0.6, 1.0, 1.8, 3.0}) {
    hw.t_read = tr;
    const int n = estimate_cone_interleaves(fm, e, d, hw, kPi / 2.0);
    CHECK(n <= prev);
    prev = n;
  }

  hw.t_read = 1.0;
  int n_max = 0;
  double phi_max = 0.0;
  for (double phi = 0.15; phi < kPi; phi += kPi / 16) {
    const int n = estimate_cone_interleaves(fm, e, d, hw, phi);
    if (n > n_max) {
      n_max = n;
      phi_max = phi;
    }
  }
  CHECK(std::abs(phi_max - kPi / 2.0) < kPi / 5);
}

TEST_CASE("spiral template: uniform turn count and pole degeneracy") {
  FovModel fm(10.0, 3.0);
  ExtentModel e(1.25, 1.0);
  DensityParams d;
  auto hw = desk_hw();
  hw.t_read = 12.0;

  const int n = 2;
  auto tpl = design_spiral_template(fm, e, d, hw, 0.0, n);
  check_template(tpl, hw);
  CHECK(tpl.k_samples.front().norm_xy() == doctest::Approx(0.0));
  // alpha_r = 1: total turns = L_r k_r,max / n
  double turns = 0.0;
  for (std::size_t i = 1; i < tpl.k_samples.size(); ++i) {
    const auto& a = tpl.k_samples[i - 1];
    const auto& b = tpl.k_samples[i];
    turns += std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
  }
  turns /= 2.0 * kPi;
  CHECK(turns == doctest::Approx(fm.l_r * 1.25 / n).epsilon(0.02));

  // pole plane: floored extent gives a tiny template, one interleaf enough
  auto pole = design_spiral_template(fm, e, d, hw, e.k_z, 1);
  CHECK(pole.k_samples.back().norm_xy() < 1.2);
  CHECK(estimate_spiral_interleaves(fm, e, d, hw, e.k_z) == 1);
  for (const auto& k : pole.k_samples) CHECK(k.z == doctest::Approx(e.k_z));
}

TEST_CASE("variable-density spiral concentrates turns near the center") {
  FovModel fm(10.0, 3.0);
  ExtentModel e(1.25, 1.0);
  auto hw = desk_hw();
  hw.t_read = 30.0;
  DensityParams d;
  d.alpha_r = 1.5;
  auto tpl = design_spiral_template(fm, e, d, hw, 0.0, 1);
  check_template(tpl, hw);
  const double krm = tpl.k_samples.back().norm_xy();
  double inner = 0.0, outer = 0.0;
  for (std::size_t i = 1; i < tpl.k_samples.size(); ++i) {
    const auto& a = tpl.k_samples[i - 1];
    const auto& b = tpl.k_samples[i];
    const double dth =
        std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
    (b.norm_xy() < krm / 2.0 ? inner : outer) += dth;
  }
  CHECK(inner > outer);
}

TEST_CASE("estimate_spiral_interleaves: monotone in t_read, maximal at z=0") {
  FovModel fm(20.0, 3.0);
  ExtentModel e(1.25, 1.0);
  DensityParams d;
  auto hw = desk_hw();

  int prev = 1 << 30;
  for (double tr : {2.0, 4.0, 8.0}) {
    hw.t_read = tr;
    const int n = estimate_spiral_interleaves(fm, e, d, hw, 0.0);
    CHECK(n <= prev);
    prev = n;
  }

  hw.t_read = 3.0;
  const int n0 = estimate_spiral_interleaves(fm, e, d, hw, 0.0);
  for (double z : {0.3, 0.6, 0.9})
    CHECK(estimate_spiral_interleaves(fm, e, d, hw, z * e.k_z) <= n0);
}

TEST_CASE("property: templates respect hardware invariants on random draws") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> fov(6.0, 30.0);
  std::uniform_real_distribution<double> res(0.3, 0.8);  // cm
  std::uniform_real_distribution<double> tread(1.0, 6.0);
  std::uniform_real_distribution<double> ang(0.2, kPi - 0.2);
  std::uniform_int_distribution<int> leaves(1, 12);
  std::uniform_real_distribution<double> alph(1.0, 2.5);

  for (int t = 0; t < 12; ++t) {
    FovModel fm(fov(rng), fov(rng));
    const double dx = res(rng);
    ExtentModel e(1.0 / (2.0 * dx), 1.0 / (2.0 * dx));
    HardwareConfig hw = desk_hw();
    hw.t_read = tread(rng);
    DensityParams d;
    d.alpha = alph(rng);
    d.alpha_r = alph(rng);

    auto spoke = design_radial_spoke(e, hw, ang(rng));
    check_template(spoke, hw);
    try {
      auto cone = design_cone_template(fm, e, d, hw, ang(rng), 8 * leaves(rng));
      check_template(cone, hw);
    } catch (const InfeasibleDesign&) {
    }
    try {
      auto sp = design_spiral_template(fm, e, d, hw, 0.3 * e.k_z,
                                       4 * leaves(rng));
      check_template(sp, hw);
    } catch (const InfeasibleDesign&) {
    }
  }
}

TEST_CASE("interleaf feasibility is monotone in n") {
  FovModel fm(24.0, 12.0);
  ExtentModel e(1.25, 1.25);
  DensityParams d;
  auto hw = desk_hw();
  hw.t_read = 1.2;
  const double phi = kPi / 2.0;
  const int n_star = estimate_cone_interleaves(fm, e, d, hw, phi);
  for (int n : {n_star, n_star + 1, n_star + 5, 2 * n_star}) {
    auto tpl = design_cone_template(fm, e, d, hw, phi, n);
    check_template(tpl, hw);
  }
  if (n_star > 1)
    CHECK_THROWS_AS(design_cone_template(fm, e, d, hw, phi, n_star - 1),
                    InfeasibleDesign);
}
