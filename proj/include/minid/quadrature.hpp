#pragma once

#include <cstddef>
#include <functional>

namespace minid {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
};

struct QuadratureOptions {
  double abs_tol = 1e-9;
  std::size_t max_evaluations = 100000;
};

using ScalarFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (15 point) on [a, b].
QuadratureResult integrate_interval(const ScalarFn& f, double a, double b, QuadratureOptions opt = {});

// Integral over [0, inf) after the substitution x = tan(theta).
QuadratureResult integrate_half_line(const ScalarFn& f, QuadratureOptions opt = {});

}  // namespace minid
