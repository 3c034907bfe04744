#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace pdcqkd {

struct ScalarMinimum {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

/// Golden-section search on [a, b]. Stops once the bracket is narrower than
/// rel_tol * scale. Returns the best point evaluated, never worse than the
/// `seed` already known by the caller.
template <class F>
ScalarMinimum golden_section(F&& f, double a, double b, double rel_tol,
                             double scale, ScalarMinimum seed = {}) {
  constexpr double inv_phi = 0.6180339887498948482;
  ScalarMinimum best = seed;
  auto eval = [&](double x) {
    const double v = f(x);
    if (v < best.value) best = {x, v};
    return v;
  };
  const double tol = rel_tol * std::max(scale, std::numeric_limits<double>::min());
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (int iter = 0; iter < 400 && (b - a) > tol; ++iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  return best;
}

/// Uniform grid of `points` samples over [lo, hi], then golden-section
/// refinement on the two cells around the best sample. The refinement stops
/// at rel_tol * scale; scale defaults to hi - lo.
template <class F>
ScalarMinimum grid_golden_minimize(F&& f, double lo, double hi,
                                   std::size_t points, double rel_tol,
                                   double scale = 0.0) {
  if (!(hi > lo)) {
    return {lo, f(lo)};
  }
  points = std::max<std::size_t>(points, 3);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  ScalarMinimum best;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v < best.value) {
      best = {x, v};
      best_i = i;
    }
  }
  const double a = best_i == 0 ? lo : lo + step * static_cast<double>(best_i - 1);
  const double b = best_i + 1 >= points
                       ? hi
                       : std::min(hi, lo + step * static_cast<double>(best_i + 1));
  return golden_section(f, a, b, rel_tol, scale > 0.0 ? scale : hi - lo, best);
}

}  // namespace pdcqkd
