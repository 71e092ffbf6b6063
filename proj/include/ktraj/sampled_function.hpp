#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ktraj {

inline constexpr double kPi = std::numbers::pi;

// A real function tabulated on a strictly increasing abscissa grid,
// evaluated by linear interpolation (clamped outside the grid).
struct SampledFunction {
  std::vector<double> x;
  std::vector<double> y;

  SampledFunction() = default;
  SampledFunction(std::vector<double> xs, std::vector<double> ys)
      : x(std::move(xs)), y(std::move(ys)) {
    validate();
  }

  void validate() const {
    if (x.size() != y.size())
      throw std::invalid_argument("SampledFunction: length mismatch");
    if (x.size() < 2)
      throw std::invalid_argument("SampledFunction: need at least 2 samples");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1]))
        throw std::invalid_argument(
            "SampledFunction: abscissae not strictly increasing");
  }

  std::size_t size() const { return x.size(); }
  double x_min() const { return x.front(); }
  double x_max() const { return x.back(); }

  double operator()(double xq) const {
    if (xq <= x.front()) return y.front();
    if (xq >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + t * (y[i] - y[i - 1]);
  }
};

// Tabulate a callable on a uniform grid over [a, b].  The two endpoint
// ordinates are evaluated at the midpoints of the boundary cells so that
// integrands vanishing exactly at the ends (sin(phi) at the poles) stay
// positive on the grid.
template <typename F>
SampledFunction sample_uniform(F&& f, double a, double b, std::size_t n,
                               bool midpoint_endpoints = false) {
  if (!(a < b)) throw std::invalid_argument("sample_uniform: need a < b");
  if (n < 2) throw std::invalid_argument("sample_uniform: need n >= 2");
  std::vector<double> xs(n), ys(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = a + h * static_cast<double>(i);
    double xe = xs[i];
    if (midpoint_endpoints) {
      if (i == 0) xe = a + 0.5 * h;
      if (i == n - 1) xe = b - 0.5 * h;
    }
    ys[i] = f(xe);
  }
  xs.back() = b;  // guard against rounding drift
  return SampledFunction(std::move(xs), std::move(ys));
}

}  // namespace ktraj
