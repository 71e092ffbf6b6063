#pragma once

#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "ktraj/sampled_function.hpp"

namespace ktraj {

inline constexpr std::size_t kDefaultGrid = 65536;

// Composite trapezoid over [a, b] on the tabulated grid, with partial end
// cells handled by interpolation.
inline double integrate(const SampledFunction& g, double a, double b) {
  if (!(a < b)) throw std::domain_error("integrate: need a < b");
  if (a < g.x_min() - 1e-12 || b > g.x_max() + 1e-12)
    throw std::domain_error("integrate: bounds outside abscissae range");
  a = std::max(a, g.x_min());
  b = std::min(b, g.x_max());

  auto lo = std::upper_bound(g.x.begin(), g.x.end(), a);
  auto hi = std::lower_bound(g.x.begin(), g.x.end(), b);
  std::size_t i0 = static_cast<std::size_t>(lo - g.x.begin());  // first node > a
  std::size_t i1 = static_cast<std::size_t>(hi - g.x.begin());  // first node >= b

  if (i0 >= i1) return 0.5 * (g(a) + g(b)) * (b - a);

  double sum = 0.5 * (g(a) + g.y[i0]) * (g.x[i0] - a);
  for (std::size_t i = i0 + 1; i < i1; ++i)
    sum += 0.5 * (g.y[i - 1] + g.y[i]) * (g.x[i] - g.x[i - 1]);
  sum += 0.5 * (g.y[i1 - 1] + g(b)) * (b - g.x[i1 - 1]);
  return sum;
}

// Numerical inverse of a monotone tabulated function, sampled on a uniform
// grid of the ordinate range.  Flat stretches up to `tie_tol` are lifted by a
// tiny ramp; anything worse is rejected.
inline SampledFunction invert_monotone(const SampledFunction& f,
                                       double tie_tol = 1e-9) {
  const std::size_t n = f.size();
  std::vector<double> ys(f.y);
  double prev = ys[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (ys[i] < prev - tie_tol * std::max(1.0, std::abs(prev)))
      throw std::invalid_argument("invert_monotone: ordinates not increasing");
    if (ys[i] <= prev) ys[i] = prev + 1e-12 * std::max(1.0, std::abs(prev));
    prev = ys[i];
  }
  SampledFunction fixed(f.x, std::move(ys));
  // swap roles: interpolate x as a function of y on a uniform y grid
  std::vector<double> yu(n), xu(n);
  const double y0 = fixed.y.front(), y1 = fixed.y.back();
  const double h = (y1 - y0) / static_cast<double>(n - 1);
  std::size_t seg = 1;
  for (std::size_t i = 0; i < n; ++i) {
    double yq = y0 + h * static_cast<double>(i);
    if (i == n - 1) yq = y1;
    while (seg < n - 1 && fixed.y[seg] < yq) ++seg;
    double t = (yq - fixed.y[seg - 1]) / (fixed.y[seg] - fixed.y[seg - 1]);
    yu[i] = yq;
    xu[i] = fixed.x[seg - 1] + t * (fixed.x[seg] - fixed.x[seg - 1]);
  }
  return SampledFunction(std::move(yu), std::move(xu));
}

// Solution of df/du = N / g(f): the CDF u(f), its inverse f(u), and the
// constant N obtained by integrating g over the range of f.
struct CdfSolution {
  double n_total = 0.0;
  SampledFunction u_of_f;
  SampledFunction f_of_u;
  double f_min = 0.0;
  double f_max = 0.0;
};

inline CdfSolution solve_cdf_ode(const SampledFunction& g, double f_min,
                                 double f_max) {
  if (!(f_min < f_max))
    throw std::invalid_argument("solve_cdf_ode: need f_min < f_max");
  const std::size_t n = g.size();
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (!(g.y[i] > 0.0))
      throw std::invalid_argument("solve_cdf_ode: g not positive on interior");

  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    cum[i] = cum[i - 1] + 0.5 * (g.y[i - 1] + g.y[i]) * (g.x[i] - g.x[i - 1]);
  const double n_total = cum.back();
  if (!(n_total > 0.0))
    throw std::invalid_argument("solve_cdf_ode: nonpositive integral");

  std::vector<double> u(n);
  double prev = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = cum[i] / n_total;
    if (u[i] <= prev) u[i] = prev + 1e-12;
    prev = u[i];
  }
  CdfSolution sol;
  sol.n_total = n_total;
  sol.f_min = f_min;
  sol.f_max = f_max;
  sol.u_of_f = SampledFunction(g.x, std::move(u));
  sol.f_of_u = invert_monotone(sol.u_of_f);
  return sol;
}

template <typename F>
  requires(!std::is_same_v<std::decay_t<F>, SampledFunction>)
CdfSolution solve_cdf_ode(F&& g, double f_min, double f_max,
                          std::size_t grid = kDefaultGrid) {
  return solve_cdf_ode(
      sample_uniform(std::forward<F>(g), f_min, f_max, grid, true), f_min,
      f_max);
}

}  // namespace ktraj
