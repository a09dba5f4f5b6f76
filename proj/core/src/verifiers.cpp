#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssflab/errors.hpp"
#include "ssflab/summation.hpp"
#include "ssflab/wegner.hpp"

namespace ssflab {
namespace {

std::vector<double> sorted_eigenvalues(const LatticeOperator& op, std::size_t cap) {
  const SpectralData s = spectrum(op, cap);
  std::vector<double> v(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
  std::sort(v.begin(), v.end());
  return v;
}

double negative_part(std::span<const double> potential) {
  double lowest = 0.0;
  for (double v : potential) lowest = std::min(lowest, v);
  return -lowest;
}

int floor_half(int x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

}  // namespace

Lemma3Result lemma3_verify(const DisorderDistribution& dist,
                           const std::function<double(double)>& phi, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be positive");
  const double a = dist.lower();
  const double b = dist.upper();

  constexpr int kSamples = 4096;
  const double span = b + eps - a;
  double prev = phi(a);
  for (int i = 1; i <= kSamples; ++i) {
    const double x = a + span * i / kSamples;
    const double cur = phi(x);
    const double dx = span / kSamples;
    if (cur - prev < -1e-12 * dx - 1e-14 * (1.0 + std::abs(cur))) {
      throw ValidationError("phi is decreasing near " + std::to_string(x));
    }
    prev = cur;
  }

  CompensatedSum lhs;
  for (const Atom& atom : dist.atoms()) {
    lhs += atom.weight * (phi(atom.position + eps) - phi(atom.position));
  }
  for (const DensityPiece& piece : dist.pieces()) {
    if (piece.mass == 0.0 || piece.hi <= piece.lo) continue;
    const double density = piece.mass / (piece.hi - piece.lo);
    lhs += density * integrate([&](double x) { return phi(x + eps) - phi(x); }, piece.lo,
                               piece.hi);
  }
  Lemma3Result r;
  r.lhs = lhs.value();
  r.rhs = modulus_of_continuity(dist, eps) * (phi(b + eps) - phi(a));
  r.holds = r.lhs <= r.rhs + 1e-8;
  return r;
}

double negative_part_ratio(const Domain& domain, std::span<const double> potential,
                           std::size_t dense_cap) {
  const double c = negative_part(potential);
  if (c == 0.0) return 0.0;
  const auto kinetic =
      sorted_eigenvalues(assemble_operator(domain, std::vector<double>(domain.size(), 0.0)),
                         dense_cap);
  const double delta = c / kinetic.back();
  if (delta >= 1.0) {
    throw ValidationError("negative part of the potential exceeds the kinetic norm (delta = " +
                          std::to_string(delta) + ")");
  }
  return delta;
}

WeylReport weyl_check(const Domain& domain, std::span<const double> potential, double eta,
                      std::size_t dense_cap) {
  if (!(eta > 0.0) || eta > 0.25) throw ValidationError("eta must lie in (0, 1/4]");
  WeylReport rep;
  rep.spacing = domain.spacing();
  rep.volume = domain.volume();
  rep.delta = negative_part_ratio(domain, potential, dense_cap);
  rep.shift = negative_part(potential);
  const auto ev = sorted_eigenvalues(
      assemble_operator(domain, std::vector<double>(potential.begin(), potential.end())),
      dense_cap);
  const int d = domain.dimension();
  const double coefficient = 2.0 * std::numbers::pi * (1.0 - rep.delta) * d / std::numbers::e;
  rep.checked = static_cast<std::size_t>(std::floor(eta * static_cast<double>(ev.size())));
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= rep.checked; ++n) {
    const double bound =
        coefficient * std::pow(static_cast<double>(n) / rep.volume, 2.0 / d) - rep.shift;
    const double e = ev[n - 1];
    const double margin = e - bound;
    if (margin < -1e-12 * (1.0 + std::abs(e))) ++rep.violations;
    rep.min_margin = std::min(rep.min_margin, margin);
    rep.eigenvalues.push_back(e);
    rep.bounds.push_back(bound);
  }
  if (rep.checked == 0) rep.min_margin = 0.0;
  return rep;
}

std::vector<double> refine_potential(const Domain& domain, std::span<const double> potential) {
  if (potential.size() != domain.size()) {
    throw ValidationError("potential length does not match site count");
  }
  const Domain fine = domain.refined();
  std::vector<double> v(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) {
    Coord parent{0, 0, 0};
    for (int a = 0; a < domain.dimension(); ++a) parent[a] = floor_half(fine.sites()[i][a]);
    const auto idx = domain.index_of(parent);
    if (!idx) throw NumericError("refined site has no parent");
    v[i] = potential[*idx];
  }
  return v;
}

WeylStudy weyl_refinement_study(const Domain& domain, std::span<const double> potential,
                                double eta, std::size_t dense_cap) {
  WeylStudy study;
  study.coarse = weyl_check(domain, potential, eta, dense_cap);
  study.fine = weyl_check(domain.refined(), refine_potential(domain, potential), eta, dense_cap);
  return study;
}

SemigroupReport semigroup_trace_check(const Domain& domain, std::span<const double> potential,
                                      std::span<const double> t_grid, std::size_t dense_cap) {
  if (t_grid.empty()) throw ValidationError("t_grid is empty");
  SemigroupReport rep;
  const double h = domain.spacing();
  rep.window_min = 4.0 * h * h;
  for (double t : t_grid) {
    if (!(t >= rep.window_min * (1.0 - 1e-12)) || t > 1.0) {
      throw ValidationError("t_grid value " + std::to_string(t) + " outside [4h^2, 1] = [" +
                            std::to_string(rep.window_min) + ", 1]");
    }
  }
  rep.delta = negative_part_ratio(domain, potential, dense_cap);
  rep.shift = negative_part(potential);
  const auto ev = sorted_eigenvalues(
      assemble_operator(domain, std::vector<double>(potential.begin(), potential.end())),
      dense_cap);
  const double d = domain.dimension();
  rep.all_hold = true;
  for (double t : t_grid) {
    SemigroupRow row;
    row.t = t;
    CompensatedSum sum;
    for (double e : ev) sum += std::exp(-2.0 * t * e);
    row.lhs = sum.value();
    row.rhs = domain.volume() *
              std::pow(8.0 * std::numbers::pi * t * (1.0 - rep.delta), -0.5 * d) *
              std::exp(2.0 * t * rep.shift);
    row.margin = 1.0 - row.lhs / row.rhs;
    row.holds = row.lhs <= row.rhs;
    rep.all_hold = rep.all_hold && row.holds;
    rep.rows.push_back(row);
  }
  return rep;
}

DecayReport singular_value_experiment(const DecayConfig& cfg) {
  if (cfg.amplitudes.empty()) throw ValidationError("amplitudes list is empty");
  const Domain domain = build_domain(cfg.model);
  if (domain.size() > cfg.dense_cap) {
    throw NumericError("domain has " + std::to_string(domain.size()) +
                       " sites, above the dense cap " + std::to_string(cfg.dense_cap));
  }
  const SingleSitePotential u = single_site(cfg.model);
  const auto per = periodic_potential(domain, cfg.model.periodic);
  const std::size_t center = domain.cells().size() / 2;
  const Coord center_cell = domain.cells()[center];

  const SpectralData base = eigen_decompose(assemble_operator(domain, per), cfg.dense_cap);
  const DenseMatrix s1 = semigroup(base, 1.0);
  const int d = cfg.model.dimension;

  DecayReport rep;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double amp : cfg.amplitudes) {
    if (std::isnan(amp) || amp < 0.0) throw ValidationError("amplitudes must be >= 0");
    DecayRow row;
    row.amplitude = amp;
    DenseMatrix s2;
    if (amp == kSiteDeletion) {
      std::vector<std::size_t> removed;
      for (std::size_t i = 0; i < domain.size(); ++i) {
        if (domain.cell_of(i) == center_cell) removed.push_back(i);
      }
      const Restriction r = remove_sites(domain, removed);
      std::vector<double> v(r.parent_index.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = per[r.parent_index[i]];
      const SpectralData spec2 = eigen_decompose(assemble_operator(r.domain, v), cfg.dense_cap);
      s2 = embed(semigroup(spec2, 1.0), r.parent_index, domain.size());
    } else {
      std::vector<double> omega(domain.cells().size(), 0.0);
      omega[center] = amp;
      const SpectralData spec2 =
          eigen_decompose(assemble_operator(domain, alloy_potential(domain, u, omega, per)),
                          cfg.dense_cap);
      s2 = semigroup(spec2, 1.0);
    }
    row.singular_values = singular_values(difference(s1, s2));
    try {
      row.fit_root = fit_decay(row.singular_values, 1.0 / d, cfg.floor, cfg.skip_leading);
      lo = std::min(lo, row.fit_root->rate);
      hi = std::max(hi, row.fit_root->rate);
    } catch (const NumericError& e) {
      row.fit_error = e.what();
    }
    try {
      row.fit_square = fit_decay(row.singular_values, 2.0 / d, cfg.floor, cfg.skip_leading);
    } catch (const NumericError&) {
    }
    rep.rows.push_back(std::move(row));
  }
  if (hi > 0.0 && lo > 0.0) rep.rate_spread = hi / lo - 1.0;
  return rep;
}

std::vector<double> coupling_derivative_sums(const Domain& domain, const SingleSitePotential& u,
                                             std::span<const double> couplings,
                                             std::span<const double> periodic, double step) {
  if (!(step > 0.0)) throw ValidationError("finite-difference step must be positive");
  std::vector<CompensatedSum> sums(domain.size());
  std::vector<double> omega(couplings.begin(), couplings.end());
  auto shifted = [&](std::size_t k, double delta) {
    const double saved = omega[k];
    omega[k] = saved + delta;
    auto ev = sorted_eigenvalues(
        assemble_operator(domain, alloy_potential(domain, u, omega, periodic)), domain.size());
    omega[k] = saved;
    return ev;
  };
  // Fourth-order central stencil.
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const auto p1 = shifted(k, step);
    const auto m1 = shifted(k, -step);
    const auto p2 = shifted(k, 2.0 * step);
    const auto m2 = shifted(k, -2.0 * step);
    for (std::size_t n = 0; n < sums.size(); ++n) {
      sums[n] += (8.0 * (p1[n] - m1[n]) - (p2[n] - m2[n])) / (12.0 * step);
    }
  }
  std::vector<double> out(sums.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = sums[n].value();
  return out;
}

std::vector<double> frozen_coupling_traces(const Domain& domain, const SingleSitePotential& u,
                                           std::span<const double> couplings,
                                           std::span<const double> periodic, std::size_t k0,
                                           std::span<const double> values,
                                           const std::function<double(double)>& rho) {
  if (k0 >= couplings.size()) throw ValidationError("frozen site index out of range");
  std::vector<double> omega(couplings.begin(), couplings.end());
  std::vector<double> out;
  out.reserve(values.size());
  for (double w : values) {
    omega[k0] = w;
    const SpectralData s =
        spectrum(assemble_operator(domain, alloy_potential(domain, u, omega, periodic)),
                 domain.size());
    out.push_back(trace_function(s, rho));
  }
  return out;
}

}  // namespace ssflab
