#pragma once

#include <functional>
#include <span>

namespace ssflab {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_depth = 50;
};

/// Adaptive Simpson with Richardson correction on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

/// Maximizer of a unimodal function on [lo, hi] by golden-section search.
struct GoldenResult {
  double argmax = 0.0;
  double value = 0.0;
};
GoldenResult golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-12);

/// Ordinary least squares y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

double median(std::span<const double> values);

}  // namespace ssflab
