#pragma once

#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ssflab/numerics.hpp"
#include "ssflab/spectral.hpp"

namespace ssflab {

/// Exact finite-volume spectral shift function
///   xi(lambda) = #{lambda_n(H2) <= lambda} - #{lambda_n(H1) <= lambda},
/// stored as a right-continuous step function. values[i] holds on
/// [breakpoints[i], breakpoints[i+1]); xi vanishes outside the breakpoints.
struct SSFCurve {
  std::vector<double> breakpoints;
  std::vector<int> values;

  int operator()(double lambda) const;
  int max_abs() const;
  int min_value() const;
  int max_value() const;
  /// Integral of xi over the real line.
  double integral() const;

  friend bool operator==(const SSFCurve&, const SSFCurve&) = default;
};

SSFCurve ssf_counting(const SpectralData& spec1, const SpectralData& spec2);

/// sign(g') xi(g(lambda), g(H2), g(H1)), pulled back to lambda coordinates.
/// g must be strictly monotone on the union of both spectra.
SSFCurve ssf_via_invariance(const SpectralData& spec1, const SpectralData& spec2,
                            const std::function<double(double)>& g);

/// SSF of the pair (exp(-H2), exp(-H1)) in s = exp(-lambda) coordinates.
SSFCurve exponentiated_ssf(const SpectralData& spec1, const SpectralData& spec2);

/// rho(x) = S((x - E + eps) / (2 eps)) - 1 with the quintic smoothstep S:
/// -1 below E - eps, 0 above E + eps, max slope 15/(16 eps).
class SwitchFunction {
 public:
  SwitchFunction(double center, double half_width);

  double operator()(double x) const noexcept;
  double derivative(double x) const noexcept;
  double center() const noexcept { return center_; }
  double half_width() const noexcept { return half_width_; }
  double max_derivative() const noexcept { return 0.9375 / half_width_; }

 private:
  double center_;
  double half_width_;
};

/// Requires 0 < eps <= 1/2.
SwitchFunction make_switch(double center, double half_width);

struct KreinResult {
  double lhs = 0.0;  // Tr[rho(H2) - rho(H1)]
  double rhs = 0.0;  // from the SSF
  double relative_gap() const;
};

/// Krein trace identity for the counting SSF. Because xi counts H2 minus H1,
/// the identity reads Tr[rho(H2) - rho(H1)] = -integral rho'(lambda) xi(lambda),
/// evaluated exactly as -sum_i xi_i [rho(b_{i+1}) - rho(b_i)].
KreinResult krein_check(const SpectralData& spec1, const SpectralData& spec2,
                        const std::function<double(double)>& rho);
KreinResult krein_check(const SpectralData& spec1, const SpectralData& spec2,
                        const SSFCurve& curve, const std::function<double(double)>& rho);

/// F(x) = integral_0^x (exp(t y^alpha) - 1) dy. alpha defaults to 1/d.
struct FtFunctional {
  double t = 1.0;
  int dimension = 1;
  double alpha = 0.0;  // 0 means 1/dimension

  double exponent() const noexcept { return alpha > 0.0 ? alpha : 1.0 / dimension; }
};

double ft_eval(const FtFunctional& fn, double x, const QuadratureOptions& opts = {});
/// F(x) exp(-t x^alpha), finite for arguments where F itself overflows.
double ft_eval_scaled(const FtFunctional& fn, double x, const QuadratureOptions& opts = {});
/// F(n) - F(n-1), integrated directly to avoid cancellation.
double ft_increment(const FtFunctional& fn, int n, const QuadratureOptions& opts = {});
/// Closed form (exp(t x) - 1)/t - x, valid for exponent 1.
double ft_closed_form_linear(double t, double x);

/// integral_{-inf}^T F(|xi|) d lambda, a finite sum over the curve's steps.
double ssf_integral_bound(const SSFCurve& curve, const FtFunctional& fn, double upper,
                          const QuadratureOptions& opts = {});

/// Smallest K1 with integral_{-inf}^T F(|xi|) <= K1 e^T for every T.
double integral_bound_constant(const SSFCurve& curve, const FtFunctional& fn,
                               const QuadratureOptions& opts = {});

struct MajorizationResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// integral F(|xi(s)|) ds <= sum_n mu_n (F(n) - F(n-1)), with xi the SSF of
/// the exponentiated pair and mu_n the singular values of their difference.
MajorizationResult hs_majorization_check(const SingularValueList& sv, const SSFCurve& curve_exp,
                                         const FtFunctional& fn);

struct TraceBoundRow {
  double eps = 0.0;
  double trace = 0.0;       // Tr[rho(H2) - rho(H1)]
  double log_factor = 0.0;  // |log eps|^d
  double ratio = 0.0;       // trace / log_factor
};

struct TraceBoundReport {
  double energy = 0.0;
  int dimension = 1;
  std::vector<TraceBoundRow> rows;  // eps descending
  double fitted_constant = 0.0;     // max ratio over all rows
  double coarse_constant = 0.0;     // max ratio over the coarser half
  double fine_constant = 0.0;       // max ratio over the finer half
  std::size_t envelope_violations = 0;  // fine rows above the coarse-half envelope
  double max_trace = 0.0;
};

TraceBoundReport trace_bound_check(const SpectralData& spec1, const SpectralData& spec2,
                                   double energy, std::span<const double> eps_grid,
                                   int dimension);

/// Legendre transform G(y) = sup_{x >= 0} (x y - F(x)) by golden-section search.
double legendre_dual(const FtFunctional& fn, double y);
/// y (log(1 + y) / t)^d, the closed-form majorant of G.
double legendre_majorant(const FtFunctional& fn, double y);

/// Summary of a bounded compactly supported test function f paired with xi.
struct TestFunctionSummary {
  double pairing = 0.0;      // integral f xi
  double support_sup = 0.0;  // b = sup supp f
  double sup_norm = 0.0;
  double l1_norm = 0.0;
};

TestFunctionSummary summarize_indicator(const SSFCurve& curve, double height, double lo,
                                        double hi);
TestFunctionSummary summarize_switch_derivative(const SSFCurve& curve, double scale,
                                                const SwitchFunction& rho);

struct DualBoundReport {
  double k1 = 0.0;
  double k2_fitted = 0.0;
  double k2_proof = 0.0;  // t^-d
  std::size_t heldout = 0;
  std::size_t violations_fitted = 0;
  std::size_t violations_proof = 0;
};

/// |integral f xi| <= K1 e^b + K2 log(1 + |f|_inf)^d |f|_1: K1 from the integral
/// bound, K2 fitted on `training`, then checked on `heldout`.
DualBoundReport dual_bound_check(const SSFCurve& curve, const FtFunctional& fn,
                                 std::span<const TestFunctionSummary> training,
                                 std::span<const TestFunctionSummary> heldout);

/// Partial integrals of F_{t,alpha}(|xi|) for the synthetic Landau-level
/// profile |xi(lambda)| = (L / log L)^(d/2), L = |log lambda|, over
/// lambda in [exp(-cutoff), exp(-3)].
struct DivergenceTrend {
  std::vector<double> cutoffs;
  std::vector<double> log_integrals;
  bool converging = false;
  bool diverging = false;
};

DivergenceTrend synthetic_landau_trend(const FtFunctional& fn, std::span<const double> cutoffs);

/// Two-column text: '#'-prefixed metadata and column names, then one
/// "breakpoint value" row per step, closed by the last breakpoint with value 0.
void write_curve(std::ostream& out, const SSFCurve& curve,
                 const std::map<std::string, std::string>& metadata = {});

}  // namespace ssflab
