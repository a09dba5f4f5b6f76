#include "ssflab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "ssflab/errors.hpp"

namespace ssflab {
namespace {

void check_dimension(int d) {
  if (d < 1 || d > 3) {
    throw ValidationError("dimension must be 1, 2 or 3, got " + std::to_string(d));
  }
}

void check_spacing(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ValidationError("spacing must be positive and finite");
  }
}

// Tolerance for mapping lattice coordinates to continuum cells; spacings like
// 1/3 are not exact in binary.
constexpr double kCellSlack = 1e-9;

}  // namespace

Domain::Domain(int dimension, double spacing, std::vector<Coord> sites)
    : dimension_(dimension), spacing_(spacing), sites_(std::move(sites)) {
  check_dimension(dimension_);
  check_spacing(spacing_);
  if (sites_.empty()) throw ValidationError("domain must contain at least one site");
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    for (int a = dimension_; a < 3; ++a) {
      if (sites_[i][a] != 0) {
        throw ValidationError("site coordinate has a nonzero component beyond the dimension");
      }
    }
    if (!lookup_.emplace(sites_[i], i).second) {
      throw ValidationError("duplicate site in domain");
    }
  }
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    for (int a = 0; a < dimension_; ++a) {
      Coord n = sites_[i];
      ++n[a];
      if (auto it = lookup_.find(n); it != lookup_.end()) {
        edges_.push_back({i, it->second, a});
      }
    }
  }
  std::set<Coord> cells;
  for (std::size_t i = 0; i < sites_.size(); ++i) cells.insert(cell_of(i));
  cells_.assign(cells.begin(), cells.end());
}

double Domain::volume() const noexcept {
  return static_cast<double>(sites_.size()) * std::pow(spacing_, dimension_);
}

std::optional<std::size_t> Domain::index_of(const Coord& c) const {
  if (auto it = lookup_.find(c); it != lookup_.end()) return it->second;
  return std::nullopt;
}

Coord Domain::cell_of(std::size_t site) const {
  Coord k{0, 0, 0};
  for (int a = 0; a < dimension_; ++a) {
    k[a] = static_cast<int>(std::floor(spacing_ * sites_[site][a] + kCellSlack));
  }
  return k;
}

Coord Domain::cell_anchor(const Coord& cell) const {
  Coord x{0, 0, 0};
  for (int a = 0; a < dimension_; ++a) {
    x[a] = static_cast<int>(std::ceil(cell[a] / spacing_ - kCellSlack));
  }
  return x;
}

Domain Domain::refined() const {
  std::vector<Coord> fine;
  fine.reserve(sites_.size() << dimension_);
  for (const auto& s : sites_) {
    for (int mask = 0; mask < (1 << dimension_); ++mask) {
      Coord c{0, 0, 0};
      for (int a = 0; a < dimension_; ++a) c[a] = 2 * s[a] + ((mask >> a) & 1);
      fine.push_back(c);
    }
  }
  std::sort(fine.begin(), fine.end());
  return Domain(dimension_, spacing_ / 2.0, std::move(fine));
}

Domain build_box_domain(int dimension, int side, double spacing) {
  check_dimension(dimension);
  check_spacing(spacing);
  if (side < 1) throw ValidationError("box side must be at least 1");
  const int nz = dimension >= 3 ? side : 1;
  const int ny = dimension >= 2 ? side : 1;
  std::vector<Coord> sites;
  sites.reserve(static_cast<std::size_t>(side) * ny * nz);
  // Lexicographic order, matching build_masked_domain.
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < ny; ++y)
      for (int z = 0; z < nz; ++z) sites.push_back({x, y, z});
  return Domain(dimension, spacing, std::move(sites));
}

Domain build_masked_domain(int dimension, std::vector<Coord> mask, double spacing) {
  check_dimension(dimension);
  if (mask.empty()) throw ValidationError("mask must be nonempty");
  std::sort(mask.begin(), mask.end());
  return Domain(dimension, spacing, std::move(mask));
}

Restriction remove_sites(const Domain& domain, std::span<const std::size_t> removed) {
  std::vector<bool> drop(domain.size(), false);
  for (auto i : removed) {
    if (i >= domain.size()) throw ValidationError("removed site index out of range");
    drop[i] = true;
  }
  std::vector<Coord> kept;
  std::vector<std::size_t> parent;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (!drop[i]) {
      kept.push_back(domain.sites()[i]);
      parent.push_back(i);
    }
  }
  if (kept.empty()) throw ValidationError("removing these sites leaves an empty domain");
  return {Domain(domain.dimension(), domain.spacing(), std::move(kept)), std::move(parent)};
}

LatticeOperator::LatticeOperator(Domain domain, std::vector<double> potential,
                                 std::optional<std::vector<std::complex<double>>> phases)
    : domain_(std::move(domain)), potential_(std::move(potential)), phases_(std::move(phases)) {
  if (potential_.size() != domain_.size()) {
    throw ValidationError("potential length " + std::to_string(potential_.size()) +
                          " does not match site count " + std::to_string(domain_.size()));
  }
  for (double v : potential_) {
    if (!std::isfinite(v)) throw ValidationError("potential entries must be finite");
  }
  if (phases_) {
    if (phases_->size() != domain_.edges().size()) {
      throw ValidationError("phase map must cover every edge");
    }
    for (const auto& p : *phases_) {
      if (std::abs(std::abs(p) - 1.0) > 1e-12) {
        throw ValidationError("Peierls phases must have unit modulus");
      }
    }
  }
}

double LatticeOperator::kinetic_scale() const noexcept {
  return 1.0 / (domain_.spacing() * domain_.spacing());
}

Eigen::MatrixXd LatticeOperator::real_matrix() const {
  if (is_magnetic()) throw NumericError("magnetic operator has no real matrix form");
  const auto n = static_cast<Eigen::Index>(size());
  const double k = kinetic_scale();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = 2.0 * domain_.dimension() * k + potential_[static_cast<std::size_t>(i)];
  }
  for (const auto& e : domain_.edges()) {
    const auto a = static_cast<Eigen::Index>(e.from);
    const auto b = static_cast<Eigen::Index>(e.to);
    h(a, b) = -k;
    h(b, a) = -k;
  }
  return h;
}

Eigen::MatrixXcd LatticeOperator::complex_matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  const double k = kinetic_scale();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = 2.0 * domain_.dimension() * k + potential_[static_cast<std::size_t>(i)];
  }
  const auto& edges = domain_.edges();
  for (std::size_t j = 0; j < edges.size(); ++j) {
    const auto a = static_cast<Eigen::Index>(edges[j].from);
    const auto b = static_cast<Eigen::Index>(edges[j].to);
    const std::complex<double> phase = phases_ ? (*phases_)[j] : std::complex<double>(1.0);
    h(a, b) = -k * phase;
    h(b, a) = -k * std::conj(phase);
  }
  return h;
}

LatticeOperator LatticeOperator::with_potential(std::vector<double> potential) const {
  return LatticeOperator(domain_, std::move(potential), phases_);
}

LatticeOperator assemble_operator(const Domain& domain, std::vector<double> potential,
                                  std::optional<std::vector<std::complex<double>>> phases) {
  return LatticeOperator(domain, std::move(potential), std::move(phases));
}

std::vector<std::complex<double>> constant_field_phases(const Domain& domain, double field,
                                                        Gauge gauge) {
  if (domain.dimension() < 2) throw ValidationError("a magnetic field needs dimension >= 2");
  const double flux = field * domain.spacing() * domain.spacing();
  std::vector<std::complex<double>> phases;
  phases.reserve(domain.edges().size());
  for (const auto& e : domain.edges()) {
    const Coord& x = domain.sites()[e.from];
    double theta = 0.0;
    if (gauge == Gauge::landau) {
      // A = (-B y, 0, 0)
      if (e.axis == 0) theta = -flux * x[1];
    } else {
      // A = (B/2)(-y, x, 0)
      if (e.axis == 0) theta = -0.5 * flux * x[1];
      if (e.axis == 1) theta = 0.5 * flux * x[0];
    }
    phases.push_back(std::polar(1.0, theta));
  }
  return phases;
}

SingleSitePotential SingleSitePotential::cell_indicator(int dimension, double spacing,
                                                        double amplitude) {
  check_dimension(dimension);
  check_spacing(spacing);
  SingleSitePotential u;
  if (spacing >= 1.0 - kCellSlack) {
    // At most one site per cell.
    u.offsets.push_back({0, 0, 0});
    u.values.push_back(amplitude);
    return u;
  }
  const double per_axis = 1.0 / spacing;
  const int m = static_cast<int>(std::lround(per_axis));
  if (std::abs(per_axis - m) > 1e-9) {
    throw ValidationError("cell indicator needs 1/h to be an integer when h < 1");
  }
  const int nz = dimension >= 3 ? m : 1;
  const int ny = dimension >= 2 ? m : 1;
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < ny; ++y)
      for (int z = 0; z < nz; ++z) {
        u.offsets.push_back({x, y, z});
        u.values.push_back(amplitude);
      }
  return u;
}

double SingleSitePotential::cell_floor(const Domain& domain) const {
  // Evaluate u on the sites of the cell anchored at the origin.
  const Coord origin{0, 0, 0};
  const Coord anchor = domain.cell_anchor(origin);
  const Domain probe = build_box_domain(domain.dimension(),
                                        static_cast<int>(std::ceil(1.0 / domain.spacing())) + 2,
                                        domain.spacing());
  double kappa = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    if (probe.cell_of(i) != origin) continue;
    any = true;
    double value = 0.0;
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      Coord at = anchor;
      for (int a = 0; a < 3; ++a) at[a] += offsets[j][a];
      if (at == probe.sites()[i]) value += values[j];
    }
    kappa = std::min(kappa, value);
  }
  return any ? std::max(0.0, kappa) : 0.0;
}

std::vector<double> alloy_potential(const Domain& domain, const SingleSitePotential& u,
                                    std::span<const double> couplings,
                                    std::span<const double> periodic) {
  if (u.offsets.size() != u.values.size()) {
    throw ValidationError("single-site potential offsets and values differ in length");
  }
  if (couplings.size() != domain.cells().size()) {
    throw ValidationError("coupling count " + std::to_string(couplings.size()) +
                          " does not match cell count " + std::to_string(domain.cells().size()));
  }
  if (periodic.size() != domain.size()) {
    throw ValidationError("periodic potential length does not match site count");
  }
  std::vector<double> v(periodic.begin(), periodic.end());
  const auto& cells = domain.cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (couplings[k] == 0.0) continue;
    const Coord anchor = domain.cell_anchor(cells[k]);
    for (std::size_t j = 0; j < u.offsets.size(); ++j) {
      Coord at = anchor;
      for (int a = 0; a < 3; ++a) at[a] += u.offsets[j][a];
      if (auto idx = domain.index_of(at)) v[*idx] += couplings[k] * u.values[j];
    }
  }
  return v;
}

std::vector<double> covering_function(const Domain& domain, const SingleSitePotential& u) {
  std::vector<double> ones(domain.cells().size(), 1.0);
  std::vector<double> zero(domain.size(), 0.0);
  return alloy_potential(domain, u, ones, zero);
}

}  // namespace ssflab
