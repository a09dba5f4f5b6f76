#include "ssflab/ssf.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "ssflab/errors.hpp"
#include "ssflab/summation.hpp"

namespace ssflab {
namespace {

std::vector<double> sorted_values(const SpectralData& s) {
  std::vector<double> v(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
  std::sort(v.begin(), v.end());
  return v;
}

SSFCurve counting_curve(const std::vector<double>& first, const std::vector<double>& second) {
  if (first.size() != second.size()) {
    throw ValidationError("spectral shift needs operators of equal dimension (" +
                          std::to_string(first.size()) + " vs " + std::to_string(second.size()) +
                          ")");
  }
  std::vector<double> knots;
  knots.reserve(first.size() + second.size());
  std::merge(first.begin(), first.end(), second.begin(), second.end(), std::back_inserter(knots));
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  SSFCurve curve;
  curve.breakpoints = knots;
  if (knots.size() < 2) return curve;
  curve.values.resize(knots.size() - 1);
  std::size_t c1 = 0;
  std::size_t c2 = 0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    while (c1 < first.size() && first[c1] <= knots[i]) ++c1;
    while (c2 < second.size() && second[c2] <= knots[i]) ++c2;
    curve.values[i] = static_cast<int>(c2) - static_cast<int>(c1);
  }
  return curve;
}

double pow_int(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

void check_ft(const FtFunctional& fn) {
  if (!(fn.t > 0.0)) throw ValidationError("F_t needs t > 0");
  if (fn.dimension < 1) throw ValidationError("F_t needs a positive dimension");
  if (fn.alpha < 0.0) throw ValidationError("F_t exponent must be positive");
}

// F(|v|) for each distinct |v| on the curve.
std::vector<double> step_weights(const SSFCurve& curve, const FtFunctional& fn,
                                 const QuadratureOptions& opts) {
  const int top = curve.max_abs();
  std::vector<double> w(static_cast<std::size_t>(top) + 1, 0.0);
  for (int k = 1; k <= top; ++k) w[static_cast<std::size_t>(k)] = ft_eval(fn, k, opts);
  return w;
}

}  // namespace

int SSFCurve::operator()(double lambda) const {
  if (breakpoints.size() < 2 || lambda < breakpoints.front() || lambda >= breakpoints.back()) {
    return 0;
  }
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), lambda);
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

int SSFCurve::max_abs() const {
  int m = 0;
  for (int v : values) m = std::max(m, std::abs(v));
  return m;
}

int SSFCurve::min_value() const {
  int m = 0;
  for (int v : values) m = std::min(m, v);
  return m;
}

int SSFCurve::max_value() const {
  int m = 0;
  for (int v : values) m = std::max(m, v);
  return m;
}

double SSFCurve::integral() const {
  CompensatedSum sum;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i] * (breakpoints[i + 1] - breakpoints[i]);
  }
  return sum.value();
}

SSFCurve ssf_counting(const SpectralData& spec1, const SpectralData& spec2) {
  return counting_curve(sorted_values(spec1), sorted_values(spec2));
}

SSFCurve ssf_via_invariance(const SpectralData& spec1, const SpectralData& spec2,
                            const std::function<double(double)>& g) {
  const auto first = sorted_values(spec1);
  const auto second = sorted_values(spec2);
  if (first.size() != second.size()) {
    throw ValidationError("spectral shift needs operators of equal dimension");
  }
  std::vector<double> knots;
  std::merge(first.begin(), first.end(), second.begin(), second.end(), std::back_inserter(knots));
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::vector<double> mapped(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    mapped[i] = g(knots[i]);
    if (!std::isfinite(mapped[i])) throw ValidationError("g is not finite on the spectra");
  }
  int sign = 0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const int s = mapped[i + 1] > mapped[i] ? 1 : (mapped[i + 1] < mapped[i] ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      throw ValidationError("g is not strictly monotone on the union of the spectra");
    }
    sign = s;
  }
  if (sign == 0) {
    // Single spectral point: read the orientation off a symmetric difference.
    const double x = knots.front();
    const double step = 1e-6 * std::max(1.0, std::abs(x));
    sign = g(x + step) > g(x - step) ? 1 : -1;
  }

  // Spectra of g(H1), g(H2) are g applied to the eigenvalues.
  std::vector<double> g1(first.size());
  std::vector<double> g2(second.size());
  std::transform(first.begin(), first.end(), g1.begin(), g);
  std::transform(second.begin(), second.end(), g2.begin(), g);
  std::sort(g1.begin(), g1.end());
  std::sort(g2.begin(), g2.end());
  const SSFCurve image = counting_curve(g1, g2);

  // Image breakpoints are g(knots), in the same order when g increases and in
  // reverse order when it decreases; intervals map accordingly.
  SSFCurve pulled;
  pulled.breakpoints = knots;
  if (knots.size() < 2) return pulled;
  const std::size_t m = image.values.size();
  pulled.values.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = sign > 0 ? i : m - 1 - i;
    pulled.values[i] = sign * image.values[j];
  }
  return pulled;
}

SSFCurve exponentiated_ssf(const SpectralData& spec1, const SpectralData& spec2) {
  auto map = [](const SpectralData& s) {
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = std::exp(-s.eigenvalues[static_cast<Eigen::Index>(i)]);
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  return counting_curve(map(spec1), map(spec2));
}

SwitchFunction::SwitchFunction(double center, double half_width)
    : center_(center), half_width_(half_width) {}

double SwitchFunction::operator()(double x) const noexcept {
  const double s = (x - (center_ - half_width_)) / (2.0 * half_width_);
  if (s <= 0.0) return -1.0;
  if (s >= 1.0) return 0.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)) - 1.0;
}

double SwitchFunction::derivative(double x) const noexcept {
  const double s = (x - (center_ - half_width_)) / (2.0 * half_width_);
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double q = s * (1.0 - s);
  return 30.0 * q * q / (2.0 * half_width_);
}

SwitchFunction make_switch(double center, double half_width) {
  if (!(half_width > 0.0) || half_width > 0.5) {
    throw ValidationError("switch half-width must lie in (0, 1/2]");
  }
  if (!std::isfinite(center)) throw ValidationError("switch center must be finite");
  return SwitchFunction(center, half_width);
}

double KreinResult::relative_gap() const { return std::abs(lhs - rhs) / (1.0 + std::abs(lhs)); }

KreinResult krein_check(const SpectralData& spec1, const SpectralData& spec2,
                        const SSFCurve& curve, const std::function<double(double)>& rho) {
  KreinResult r;
  CompensatedSum lhs;
  for (Eigen::Index i = 0; i < spec2.eigenvalues.size(); ++i) lhs += rho(spec2.eigenvalues[i]);
  for (Eigen::Index i = 0; i < spec1.eigenvalues.size(); ++i) lhs += -rho(spec1.eigenvalues[i]);
  r.lhs = lhs.value();
  CompensatedSum rhs;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    if (curve.values[i] == 0) continue;
    rhs += -curve.values[i] * (rho(curve.breakpoints[i + 1]) - rho(curve.breakpoints[i]));
  }
  r.rhs = rhs.value();
  return r;
}

KreinResult krein_check(const SpectralData& spec1, const SpectralData& spec2,
                        const std::function<double(double)>& rho) {
  return krein_check(spec1, spec2, ssf_counting(spec1, spec2), rho);
}

double ft_eval(const FtFunctional& fn, double x, const QuadratureOptions& opts) {
  check_ft(fn);
  if (x < 0.0) throw ValidationError("F_t is defined for x >= 0");
  if (x == 0.0) return 0.0;
  // Substituting y = u^(1/alpha) removes the cusp of y^alpha at 0.
  const double a = fn.exponent();
  const double p = 1.0 / a - 1.0;
  const double t = fn.t;
  auto integrand = [=](double u) {
    if (u == 0.0) return 0.0;
    return std::expm1(t * u) * std::pow(u, p) / a;
  };
  return integrate(integrand, 0.0, std::pow(x, a), opts);
}

double ft_eval_scaled(const FtFunctional& fn, double x, const QuadratureOptions& opts) {
  check_ft(fn);
  if (x < 0.0) throw ValidationError("F_t is defined for x >= 0");
  if (x == 0.0) return 0.0;
  const double a = fn.exponent();
  const double p = 1.0 / a - 1.0;
  const double t = fn.t;
  const double top = std::pow(x, a);
  const double floor_term = std::exp(-t * top);
  auto integrand = [=](double u) {
    if (u == 0.0) return 0.0;
    return (std::exp(t * (u - top)) - floor_term) * std::pow(u, p) / a;
  };
  return integrate(integrand, 0.0, top, opts);
}

double ft_increment(const FtFunctional& fn, int n, const QuadratureOptions& opts) {
  check_ft(fn);
  if (n < 1) throw ValidationError("F_t increment index must be >= 1");
  if (n == 1) return ft_eval(fn, 1.0, opts);
  const double a = fn.exponent();
  const double t = fn.t;
  return integrate([=](double y) { return std::expm1(t * std::pow(y, a)); }, n - 1.0, n, opts);
}

double ft_closed_form_linear(double t, double x) { return std::expm1(t * x) / t - x; }

double ssf_integral_bound(const SSFCurve& curve, const FtFunctional& fn, double upper,
                          const QuadratureOptions& opts) {
  const auto w = step_weights(curve, fn, opts);
  CompensatedSum sum;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    const double lo = curve.breakpoints[i];
    if (lo >= upper) break;
    const double hi = std::min(curve.breakpoints[i + 1], upper);
    sum += w[static_cast<std::size_t>(std::abs(curve.values[i]))] * (hi - lo);
  }
  return sum.value();
}

double integral_bound_constant(const SSFCurve& curve, const FtFunctional& fn,
                               const QuadratureOptions& opts) {
  const auto w = step_weights(curve, fn, opts);
  double best = 0.0;
  double running = 0.0;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    const double lo = curve.breakpoints[i];
    const double hi = curve.breakpoints[i + 1];
    const double slope = w[static_cast<std::size_t>(std::abs(curve.values[i]))];
    // e^{-T} (running + slope (T - lo)) on [lo, hi]; stationary where the
    // bracket equals the slope.
    auto value = [&](double tt) { return std::exp(-tt) * (running + slope * (tt - lo)); };
    best = std::max({best, value(lo), value(hi)});
    if (slope > 0.0) {
      const double stationary = lo + (slope - running) / slope;
      if (stationary > lo && stationary < hi) best = std::max(best, value(stationary));
    }
    running += slope * (hi - lo);
  }
  return best;
}

MajorizationResult hs_majorization_check(const SingularValueList& sv, const SSFCurve& curve_exp,
                                         const FtFunctional& fn) {
  MajorizationResult r;
  r.lhs = ssf_integral_bound(curve_exp, fn, std::numeric_limits<double>::infinity());
  CompensatedSum rhs;
  for (std::size_t n = 0; n < sv.values.size(); ++n) {
    if (sv.values[n] == 0.0) continue;
    rhs += sv.values[n] * ft_increment(fn, static_cast<int>(n + 1));
  }
  r.rhs = rhs.value();
  r.holds = r.lhs <= r.rhs + 1e-10;
  return r;
}

TraceBoundReport trace_bound_check(const SpectralData& spec1, const SpectralData& spec2,
                                   double energy, std::span<const double> eps_grid,
                                   int dimension) {
  if (eps_grid.empty()) throw ValidationError("epsilon grid is empty");
  std::vector<double> eps(eps_grid.begin(), eps_grid.end());
  for (double e : eps) {
    if (!(e > 0.0) || e > 0.5) throw ValidationError("epsilon grid must lie in (0, 1/2]");
  }
  std::sort(eps.begin(), eps.end(), std::greater<>());

  TraceBoundReport rep;
  rep.energy = energy;
  rep.dimension = dimension;
  const SSFCurve curve = ssf_counting(spec1, spec2);
  for (double e : eps) {
    const SwitchFunction rho = make_switch(energy, e);
    const auto k = krein_check(spec1, spec2, curve, [&](double x) { return rho(x); });
    TraceBoundRow row;
    row.eps = e;
    row.trace = k.lhs;
    row.log_factor = pow_int(std::abs(std::log(e)), dimension);
    row.ratio = row.trace / row.log_factor;
    rep.rows.push_back(row);
  }
  const std::size_t n = rep.rows.size();
  const std::size_t half = (n + 1) / 2;
  auto max_ratio = [&](std::size_t from, std::size_t to) {
    double m = 0.0;
    for (std::size_t i = from; i < to; ++i) m = std::max(m, rep.rows[i].ratio);
    return m;
  };
  rep.fitted_constant = max_ratio(0, n);
  rep.coarse_constant = max_ratio(0, half);
  rep.fine_constant = max_ratio(n - half, n);
  for (std::size_t i = n - half; i < n; ++i) {
    const auto& row = rep.rows[i];
    if (row.trace > rep.coarse_constant * row.log_factor + 1e-12) ++rep.envelope_violations;
  }
  for (const auto& row : rep.rows) rep.max_trace = std::max(rep.max_trace, row.trace);
  return rep;
}

double legendre_majorant(const FtFunctional& fn, double y) {
  check_ft(fn);
  return y * std::pow(std::log1p(y) / fn.t, 1.0 / fn.exponent());
}

double legendre_dual(const FtFunctional& fn, double y) {
  check_ft(fn);
  if (y < 0.0) throw ValidationError("Legendre dual is evaluated for y >= 0");
  if (y == 0.0) return 0.0;
  // F'(x) = exp(t x^alpha) - 1 equals y at x* = (log(1+y)/t)^(1/alpha).
  const double x_star = std::pow(std::log1p(y) / fn.t, 1.0 / fn.exponent());
  const double hi = 2.0 * x_star + 1.0;
  auto objective = [&](double x) { return x * y - ft_eval(fn, x); };
  return golden_maximize(objective, 0.0, hi, 1e-13).value;
}

TestFunctionSummary summarize_indicator(const SSFCurve& curve, double height, double lo,
                                        double hi) {
  if (!(hi > lo)) throw ValidationError("indicator needs lo < hi");
  CompensatedSum pairing;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    const double a = std::max(lo, curve.breakpoints[i]);
    const double b = std::min(hi, curve.breakpoints[i + 1]);
    if (b > a) pairing += curve.values[i] * (b - a);
  }
  return {height * pairing.value(), hi, std::abs(height), std::abs(height) * (hi - lo)};
}

TestFunctionSummary summarize_switch_derivative(const SSFCurve& curve, double scale,
                                                const SwitchFunction& rho) {
  CompensatedSum pairing;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    if (curve.values[i] == 0) continue;
    pairing += curve.values[i] * (rho(curve.breakpoints[i + 1]) - rho(curve.breakpoints[i]));
  }
  return {scale * pairing.value(), rho.center() + rho.half_width(),
          std::abs(scale) * rho.max_derivative(), std::abs(scale)};
}

DualBoundReport dual_bound_check(const SSFCurve& curve, const FtFunctional& fn,
                                 std::span<const TestFunctionSummary> training,
                                 std::span<const TestFunctionSummary> heldout) {
  DualBoundReport rep;
  rep.k1 = integral_bound_constant(curve, fn);
  const double power = 1.0 / fn.exponent();
  rep.k2_proof = std::pow(fn.t, -power);
  auto weight = [&](const TestFunctionSummary& f) {
    return std::pow(std::log1p(f.sup_norm), power) * f.l1_norm;
  };
  for (const auto& f : training) {
    const double excess = std::abs(f.pairing) - rep.k1 * std::exp(f.support_sup);
    const double w = weight(f);
    if (excess > 0.0 && w > 0.0) rep.k2_fitted = std::max(rep.k2_fitted, excess / w);
  }
  for (const auto& f : heldout) {
    ++rep.heldout;
    const double base = rep.k1 * std::exp(f.support_sup);
    const double slack = 1e-12 * (1.0 + std::abs(f.pairing));
    if (std::abs(f.pairing) > base + rep.k2_fitted * weight(f) + slack) ++rep.violations_fitted;
    if (std::abs(f.pairing) > base + rep.k2_proof * weight(f) + slack) ++rep.violations_proof;
  }
  return rep;
}

DivergenceTrend synthetic_landau_trend(const FtFunctional& fn, std::span<const double> cutoffs) {
  check_ft(fn);
  if (cutoffs.empty()) throw ValidationError("no cutoffs given");
  std::vector<double> cuts(cutoffs.begin(), cutoffs.end());
  std::sort(cuts.begin(), cuts.end());
  constexpr double kStart = 3.0;  // lambda <= e^-3 keeps log|log lambda| > 0
  constexpr double kStep = 0.125;
  if (cuts.front() <= kStart) throw ValidationError("cutoffs must exceed 3");

  const double half_d = 0.5 * fn.dimension;
  const double a = fn.exponent();
  // log of the integrand F(xi(L)) e^{-L} in the variable L = |log lambda|.
  auto log_integrand = [&](double big_l) {
    const double x = std::pow(big_l / std::log(big_l), half_d);
    return std::log(ft_eval_scaled(fn, x)) + fn.t * std::pow(x, a) - big_l;
  };

  DivergenceTrend trend;
  // Running log-sum-exp of trapezoid contributions.
  double log_total = -std::numeric_limits<double>::infinity();
  auto accumulate = [&](double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    const double hi = std::max(log_total, log_term);
    log_total = hi + std::log(std::exp(log_total - hi) + std::exp(log_term - hi));
  };
  double left = kStart;
  double log_left = log_integrand(left);
  for (double cut : cuts) {
    while (left + kStep <= cut + 1e-12) {
      const double right = left + kStep;
      const double log_right = log_integrand(right);
      const double hi = std::max(log_left, log_right);
      accumulate(hi + std::log(0.5 * kStep * (std::exp(log_left - hi) + std::exp(log_right - hi))));
      left = right;
      log_left = log_right;
    }
    trend.cutoffs.push_back(cut);
    trend.log_integrals.push_back(log_total);
  }
  const auto& li = trend.log_integrals;
  if (li.size() >= 2) {
    const double last_step = li.back() - li[li.size() - 2];
    trend.converging = last_step < 1e-8;
    bool increasing = true;
    for (std::size_t i = 1; i < li.size(); ++i) increasing = increasing && li[i] > li[i - 1];
    trend.diverging = increasing && last_step > 1.0;
  }
  return trend;
}

void write_curve(std::ostream& out, const SSFCurve& curve,
                 const std::map<std::string, std::string>& metadata) {
  for (const auto& [k, v] : metadata) out << "# " << k << ": " << v << '\n';
  out << "# columns: breakpoint value\n";
  out << "# units: energy (operator units), integer spectral shift on [breakpoint, next)\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < curve.breakpoints.size(); ++i) {
    const int v = i < curve.values.size() ? curve.values[i] : 0;
    out << curve.breakpoints[i] << ' ' << v << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ssflab
