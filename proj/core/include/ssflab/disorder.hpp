#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ssflab/rng.hpp"

namespace ssflab {

struct UniformLaw {
  double a = 0.0;
  double b = 1.0;
};

/// Value b with probability p, value a otherwise.
struct BernoulliLaw {
  double p = 0.5;
  double a = 0.0;
  double b = 1.0;
};

/// Finitely many atoms plus an optional uniform component on [a, b].
struct AtomicMixtureLaw {
  std::vector<double> atoms;
  std::vector<double> weights;
  double continuous_weight = 0.0;
  double a = 0.0;
  double b = 1.0;
};

/// Depth-limited two-piece Cantor measure on [a, b]. Each level keeps the
/// outer pieces of relative length r = 2^(-1/alpha); alpha = log 2 / log 3
/// gives the middle-thirds measure, which is Hoelder continuous of order alpha.
struct CantorLaw {
  int depth = 16;
  double alpha = 0.6309297535714574;  // log 2 / log 3
  double a = 0.0;
  double b = 1.0;
};

/// Continuous piecewise-linear CDF through (x_i, F_i).
struct TabulatedCdfLaw {
  std::vector<double> x;
  std::vector<double> cdf;
};

using DisorderLaw =
    std::variant<UniformLaw, BernoulliLaw, AtomicMixtureLaw, CantorLaw, TabulatedCdfLaw>;

/// Constant density on [lo, hi] carrying total mass `mass`.
struct DensityPiece {
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.0;
};

struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

/// Probability measure mu on a compact interval. Immutable; safe to share
/// across threads.
class DisorderDistribution {
 public:
  explicit DisorderDistribution(DisorderLaw law);

  const DisorderLaw& law() const noexcept { return law_; }
  std::string kind() const;

  /// Support endpoints a <= b.
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  double sample(StreamRng& rng) const;

  /// mu((-inf, x]).
  double cdf(double x) const;
  /// mu([lo, hi]), closed interval.
  double mass(double lo, double hi) const;

  /// Exact decomposition into atoms and piecewise-constant densities.
  const std::vector<Atom>& atoms() const noexcept { return *atoms_; }
  const std::vector<DensityPiece>& pieces() const noexcept { return pieces_; }

 private:
  DisorderLaw law_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  // Sorted by position. Shared because Cantor laws carry 2^depth atoms.
  std::shared_ptr<const std::vector<Atom>> atoms_;
  std::vector<DensityPiece> pieces_;
  std::vector<double> atom_prefix_;  // prefix sums of atom weights
};

/// s(mu, eps) = sup_E mu([E - eps, E + eps]), exact for every supported law.
double modulus_of_continuity(const DisorderDistribution& dist, double eps);

/// i.i.d. couplings, a pure function of (master_seed, realization).
std::vector<double> sample_couplings(const DisorderDistribution& dist, std::size_t count,
                                     std::uint64_t master_seed, std::uint64_t realization);

/// Stream component used by sample_couplings.
inline constexpr std::uint64_t kCouplingStream = 0x636f75706c696e67ull;

}  // namespace ssflab
