#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ssflab {

/// Integer lattice coordinate. Components beyond the domain dimension are 0.
using Coord = std::array<int, 3>;

/// Nearest-neighbour bond. Site `to` sits one step along `axis` from `from`.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  int axis = 0;
};

/// Finite set of lattice sites with spacing h. Physical position of site x is h*x.
class Domain {
 public:
  Domain(int dimension, double spacing, std::vector<Coord> sites);

  int dimension() const noexcept { return dimension_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return sites_.size(); }
  const std::vector<Coord>& sites() const noexcept { return sites_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Continuum volume N * h^d.
  double volume() const noexcept;

  std::optional<std::size_t> index_of(const Coord& c) const;

  /// Unit cell [k, k+1)^d (continuum coordinates) containing a site.
  Coord cell_of(std::size_t site) const;
  /// Sorted list of cells holding at least one site; couplings are indexed by it.
  const std::vector<Coord>& cells() const noexcept { return cells_; }
  /// First lattice site (per axis) whose continuum position lies in cell k.
  Coord cell_anchor(const Coord& cell) const;

  /// Same region at spacing h/2: each site becomes a 2^d block.
  Domain refined() const;

  friend bool operator==(const Domain& a, const Domain& b) {
    return a.dimension_ == b.dimension_ && a.spacing_ == b.spacing_ && a.sites_ == b.sites_;
  }

 private:
  int dimension_;
  double spacing_;
  std::vector<Coord> sites_;
  std::vector<Edge> edges_;
  std::vector<Coord> cells_;
  std::map<Coord, std::size_t> lookup_;
};

Domain build_box_domain(int dimension, int side, double spacing);
Domain build_masked_domain(int dimension, std::vector<Coord> mask, double spacing);

/// Dirichlet restriction to a subset: the listed sites are removed.
struct Restriction {
  Domain domain;
  /// parent_index[i] is the index in the original domain of new site i.
  std::vector<std::size_t> parent_index;
};
Restriction remove_sites(const Domain& domain, std::span<const std::size_t> removed);

/// Discrete magnetic Schroedinger operator (-i grad - A)^2 + V with Dirichlet
/// boundary: diagonal 2d/h^2 + V(x), hopping -h^-2 * phase on each edge.
class LatticeOperator {
 public:
  LatticeOperator(Domain domain, std::vector<double> potential,
                  std::optional<std::vector<std::complex<double>>> phases);

  const Domain& domain() const noexcept { return domain_; }
  const std::vector<double>& potential() const noexcept { return potential_; }
  const std::optional<std::vector<std::complex<double>>>& phases() const noexcept {
    return phases_;
  }
  double kinetic_scale() const noexcept;
  std::size_t size() const noexcept { return domain_.size(); }
  bool is_magnetic() const noexcept { return phases_.has_value(); }

  /// Real symmetric matrix; throws NumericError for magnetic operators.
  Eigen::MatrixXd real_matrix() const;
  Eigen::MatrixXcd complex_matrix() const;

  LatticeOperator with_potential(std::vector<double> potential) const;

 private:
  Domain domain_;
  std::vector<double> potential_;
  std::optional<std::vector<std::complex<double>>> phases_;
};

LatticeOperator assemble_operator(const Domain& domain, std::vector<double> potential,
                                  std::optional<std::vector<std::complex<double>>> phases = {});

enum class Gauge { landau, symmetric };

/// Peierls phases for a constant field B along the third axis (flux B*h^2 per
/// plaquette). Requires dimension >= 2.
std::vector<std::complex<double>> constant_field_phases(const Domain& domain, double field,
                                                        Gauge gauge = Gauge::landau);

/// Compactly supported single-site bump u, given on lattice offsets from the
/// anchor site of its cell.
struct SingleSitePotential {
  std::vector<Coord> offsets;
  std::vector<double> values;

  /// u = amplitude * indicator of the unit cell, sampled on the lattice.
  static SingleSitePotential cell_indicator(int dimension, double spacing, double amplitude);

  /// Largest kappa with u >= kappa on the sites of its own cell (0 if none).
  double cell_floor(const Domain& domain) const;
};

/// V_per(x) + sum_k omega_k u(x - k), truncated to the domain.
/// `couplings` is indexed like domain.cells().
std::vector<double> alloy_potential(const Domain& domain, const SingleSitePotential& u,
                                    std::span<const double> couplings,
                                    std::span<const double> periodic);

/// sum_k u(x - k) at every site (the covering function).
std::vector<double> covering_function(const Domain& domain, const SingleSitePotential& u);

}  // namespace ssflab
