#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssflab/disorder.hpp"
#include "ssflab/lattice.hpp"
#include "ssflab/numerics.hpp"
#include "ssflab/spectral.hpp"

namespace ssflab {

/// Box (or masked) domain with u = amplitude * cell indicator and a
/// cell-periodic background potential.
struct ModelSpec {
  int dimension = 1;
  int side = 16;
  double spacing = 1.0;
  std::vector<Coord> mask;  // non-empty: use these sites instead of the box
  double u_amplitude = 1.0;
  /// V_per on one unit cell, in the offset order of the cell indicator.
  /// Empty means 0; a single value is a constant.
  std::vector<double> periodic;
};

Domain build_domain(const ModelSpec& spec);
SingleSitePotential single_site(const ModelSpec& spec);
std::vector<double> periodic_potential(const Domain& domain, std::span<const double> pattern);

struct WegnerConfig {
  ModelSpec model;
  DisorderDistribution disorder{UniformLaw{}};
  std::optional<double> energy;  // default: mid-spectrum of the omega = 0 operator
  std::vector<double> eps_grid;
  std::size_t realizations = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t dense_cap = kDefaultDenseCap;
};

struct WegnerRow {
  double eps = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double s_2eps = 0.0;
  double s_eps = 0.0;
  double ratio_2eps = 0.0;  // mean / (s(mu,2eps) |log eps|^d |Lambda|)
  double ratio_eps = 0.0;
};

struct WegnerResult {
  double energy = 0.0;
  double volume = 0.0;
  std::size_t sites = 0;
  double kappa = 0.0;
  std::vector<WegnerRow> rows;  // in grid order
  double exponent = 0.0;        // slope of log mean vs log eps
  double exponent_r2 = 0.0;
  double ratio_median = 0.0;    // of ratio_2eps
  double ratio_max = 0.0;
  std::vector<std::vector<std::size_t>> counts;  // [realization][eps index]
};

/// Mid-point of the spectrum of the operator with all couplings zero.
double default_energy(const ModelSpec& spec, std::size_t dense_cap = kDefaultDenseCap);

WegnerResult wegner_experiment(const WegnerConfig& cfg);

/// Disorder-averaged N(E)/|Lambda| for one volume. The pooled spectrum of all
/// realizations is kept so the curve can be evaluated at any energy exactly.
struct IDSCurve {
  int side = 0;
  double volume = 0.0;
  std::size_t realizations = 0;
  std::vector<double> energies;
  std::vector<double> values;
  std::vector<double> pooled;  // sorted eigenvalues of every realization

  double evaluate(double energy) const;
};

struct IDSStudy {
  std::vector<IDSCurve> curves;
  std::vector<double> sup_distances;  // between successive curves on the grid
};

IDSStudy ids_estimate(const WegnerConfig& cfg, std::span<const int> sides,
                      std::span<const double> energies);

struct HolderRow {
  double e1 = 0.0;
  double e2 = 0.0;
  double delta_n = 0.0;
  double modulus = 0.0;     // s(mu, |E1 - E2|)
  double log_factor = 0.0;  // |log |E1 - E2||^d
  double ratio = 0.0;
};

struct HolderReport {
  std::vector<HolderRow> rows;
  double fitted_constant = 0.0;  // max ratio
  double ratio_median = 0.0;
  double exponent = 0.0;  // slope of log |dN| vs log |dE| over pairs with dN > 0
  bool unbounded_trend = false;  // ratio at the finest spacing above 3x the median
};

HolderReport holder_modulus_check(const IDSCurve& curve, const DisorderDistribution& dist,
                                  std::span<const std::pair<double, double>> pairs,
                                  int dimension);

struct Lemma3Result {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// integral [phi(l + eps) - phi(l)] dmu(l) <= s(mu, eps) [phi(b + eps) - phi(a)]
/// with [a, b] the support of mu.
Lemma3Result lemma3_verify(const DisorderDistribution& dist,
                           const std::function<double(double)>& phi, double eps);

struct WeylReport {
  double spacing = 0.0;
  double volume = 0.0;
  double delta = 0.0;
  double shift = 0.0;  // C = max(0, -min V)
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_margin = 0.0;  // min over checked n of E_n - bound_n
  std::vector<double> eigenvalues;  // the checked ones
  std::vector<double> bounds;
};

WeylReport weyl_check(const Domain& domain, std::span<const double> potential, double eta,
                      std::size_t dense_cap = kDefaultDenseCap);

/// The same check on the domain and on its refinement (potential copied to
/// each child site).
struct WeylStudy {
  WeylReport coarse;
  WeylReport fine;
};

WeylStudy weyl_refinement_study(const Domain& domain, std::span<const double> potential,
                                double eta, std::size_t dense_cap = kDefaultDenseCap);

/// Potential on domain.refined() inheriting each parent site's value.
std::vector<double> refine_potential(const Domain& domain, std::span<const double> potential);

struct SemigroupRow {
  double t = 0.0;
  double lhs = 0.0;  // sum exp(-2 t lambda_n)
  double rhs = 0.0;  // |U| (8 pi t (1 - delta))^(-d/2) exp(2 t C)
  double margin = 0.0;  // 1 - lhs / rhs
  bool holds = false;
};

struct SemigroupReport {
  double delta = 0.0;
  double shift = 0.0;
  double window_min = 0.0;  // 4 h^2
  std::vector<SemigroupRow> rows;
  bool all_hold = false;
};

SemigroupReport semigroup_trace_check(const Domain& domain, std::span<const double> potential,
                                      std::span<const double> t_grid,
                                      std::size_t dense_cap = kDefaultDenseCap);

/// delta = max(0, -min V) / lambda_max(kinetic); throws ValidationError if >= 1.
double negative_part_ratio(const Domain& domain, std::span<const double> potential,
                           std::size_t dense_cap = kDefaultDenseCap);

inline constexpr double kSiteDeletion = std::numeric_limits<double>::infinity();

struct DecayConfig {
  ModelSpec model;
  std::vector<double> amplitudes;  // kSiteDeletion removes the center cell
  double floor = kDefaultDecayFloor;
  std::size_t skip_leading = kDefaultDecaySkip;
  std::size_t dense_cap = kDefaultDenseCap;
};

struct DecayRow {
  double amplitude = 0.0;
  SingularValueList singular_values;
  std::optional<DecayFit> fit_root;    // alpha = 1/d
  std::optional<DecayFit> fit_square;  // alpha = 2/d
  std::string fit_error;
};

struct DecayReport {
  std::vector<DecayRow> rows;
  double rate_spread = 0.0;  // max c / min c - 1 over rows with a 1/d fit
};

/// Singular values of exp(-H1) - exp(-H2), H2 = H1 + amplitude * u(center cell).
DecayReport singular_value_experiment(const DecayConfig& cfg);

/// sum_k d lambda_n / d omega_k by central differences, for every n.
std::vector<double> coupling_derivative_sums(const Domain& domain, const SingleSitePotential& u,
                                             std::span<const double> couplings,
                                             std::span<const double> periodic, double step);

/// Tr rho(H) as the coupling at cell k0 runs through `values`, others frozen.
std::vector<double> frozen_coupling_traces(const Domain& domain, const SingleSitePotential& u,
                                           std::span<const double> couplings,
                                           std::span<const double> periodic, std::size_t k0,
                                           std::span<const double> values,
                                           const std::function<double(double)>& rho);

}  // namespace ssflab
