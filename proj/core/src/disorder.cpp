#include "ssflab/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssflab/errors.hpp"

namespace ssflab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Closed-interval comparisons tolerate rounding in atom positions.
double slack(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

std::vector<Atom> cantor_atoms(const CantorLaw& law) {
  const double r = std::pow(2.0, -1.0 / law.alpha);
  const std::size_t count = std::size_t{1} << law.depth;
  std::vector<double> step(static_cast<std::size_t>(law.depth));
  for (int j = 0; j < law.depth; ++j) step[static_cast<std::size_t>(j)] = (1.0 - r) * std::pow(r, j);
  const double width = law.b - law.a;
  const double w = 1.0 / static_cast<double>(count);
  std::vector<Atom> atoms(count);
  // Bit j (from the top) of the index selects the right piece at level j+1,
  // so atom positions increase with the index.
  for (std::size_t i = 0; i < count; ++i) {
    double x = 0.0;
    for (int j = 0; j < law.depth; ++j) {
      if ((i >> (law.depth - 1 - j)) & 1u) x += step[static_cast<std::size_t>(j)];
    }
    atoms[i] = {law.a + width * x, w};
  }
  return atoms;
}

}  // namespace

DisorderDistribution::DisorderDistribution(DisorderLaw law) : law_(std::move(law)) {
  std::vector<Atom> atoms;
  std::visit(
      overloaded{
          [&](const UniformLaw& u) {
            require(std::isfinite(u.a) && std::isfinite(u.b) && u.a < u.b,
                    "uniform law needs finite a < b");
            lower_ = u.a;
            upper_ = u.b;
            pieces_.push_back({u.a, u.b, 1.0});
          },
          [&](const BernoulliLaw& l) {
            require(l.p >= 0.0 && l.p <= 1.0, "bernoulli p must lie in [0, 1]");
            require(std::isfinite(l.a) && std::isfinite(l.b) && l.a < l.b,
                    "bernoulli law needs finite a < b");
            lower_ = l.a;
            upper_ = l.b;
            if (l.p < 1.0) atoms.push_back({l.a, 1.0 - l.p});
            if (l.p > 0.0) atoms.push_back({l.b, l.p});
          },
          [&](const AtomicMixtureLaw& m) {
            require(m.atoms.size() == m.weights.size(), "atom and weight lists differ in length");
            require(m.continuous_weight >= 0.0 && m.continuous_weight <= 1.0,
                    "continuous weight must lie in [0, 1]");
            double total = m.continuous_weight;
            lower_ = std::numeric_limits<double>::infinity();
            upper_ = -lower_;
            for (std::size_t i = 0; i < m.atoms.size(); ++i) {
              require(std::isfinite(m.atoms[i]), "atoms must be finite");
              require(m.weights[i] >= 0.0, "atom weights must be nonnegative");
              total += m.weights[i];
              if (m.weights[i] > 0.0) {
                atoms.push_back({m.atoms[i], m.weights[i]});
                lower_ = std::min(lower_, m.atoms[i]);
                upper_ = std::max(upper_, m.atoms[i]);
              }
            }
            require(std::abs(total - 1.0) <= 1e-12, "mixture weights must sum to 1");
            if (m.continuous_weight > 0.0) {
              require(std::isfinite(m.a) && std::isfinite(m.b) && m.a < m.b,
                      "continuous part needs finite a < b");
              pieces_.push_back({m.a, m.b, m.continuous_weight});
              lower_ = std::min(lower_, m.a);
              upper_ = std::max(upper_, m.b);
            }
            require(std::isfinite(lower_), "mixture carries no mass");
          },
          [&](const CantorLaw& c) {
            require(c.depth >= 1 && c.depth <= 20, "cantor depth must lie in [1, 20]");
            require(c.alpha > 0.0 && c.alpha < 1.0, "cantor exponent must lie in (0, 1)");
            require(std::isfinite(c.a) && std::isfinite(c.b) && c.a < c.b,
                    "cantor law needs finite a < b");
            lower_ = c.a;
            upper_ = c.b;
            atoms = cantor_atoms(c);
          },
          [&](const TabulatedCdfLaw& t) {
            require(t.x.size() >= 2 && t.x.size() == t.cdf.size(),
                    "tabulated CDF needs at least two matching points");
            require(t.cdf.front() == 0.0 && t.cdf.back() == 1.0,
                    "tabulated CDF must run from 0 to 1");
            for (std::size_t i = 1; i < t.x.size(); ++i) {
              require(t.x[i] > t.x[i - 1], "tabulated CDF abscissae must increase strictly");
              require(t.cdf[i] >= t.cdf[i - 1], "tabulated CDF must be nondecreasing");
              if (t.cdf[i] > t.cdf[i - 1]) {
                pieces_.push_back({t.x[i - 1], t.x[i], t.cdf[i] - t.cdf[i - 1]});
              }
            }
            lower_ = t.x.front();
            upper_ = t.x.back();
          },
      },
      law_);
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.position < r.position; });
  atom_prefix_.resize(atoms.size() + 1, 0.0);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    atom_prefix_[i + 1] = atom_prefix_[i] + atoms[i].weight;
  }
  atoms_ = std::make_shared<const std::vector<Atom>>(std::move(atoms));
}

std::string DisorderDistribution::kind() const {
  return std::visit(overloaded{
                        [](const UniformLaw&) { return std::string("uniform"); },
                        [](const BernoulliLaw&) { return std::string("bernoulli"); },
                        [](const AtomicMixtureLaw&) { return std::string("atomic-mixture"); },
                        [](const CantorLaw&) { return std::string("cantor"); },
                        [](const TabulatedCdfLaw&) { return std::string("user-cdf"); },
                    },
                    law_);
}

double DisorderDistribution::sample(StreamRng& rng) const {
  return std::visit(
      overloaded{
          [&](const UniformLaw& u) { return u.a + (u.b - u.a) * rng.uniform01(); },
          [&](const BernoulliLaw& l) { return rng.uniform01() < l.p ? l.b : l.a; },
          [&](const AtomicMixtureLaw& m) {
            double pick = rng.uniform01();
            const double where = rng.uniform01();
            if (pick < m.continuous_weight) return m.a + (m.b - m.a) * where;
            pick -= m.continuous_weight;
            const auto& at = atoms();
            for (const auto& a : at) {
              if (pick < a.weight) return a.position;
              pick -= a.weight;
            }
            return at.back().position;
          },
          [&](const CantorLaw& c) {
            const std::uint64_t index = rng() >> (64 - c.depth);
            return atoms()[static_cast<std::size_t>(index)].position;
          },
          [&](const TabulatedCdfLaw& t) {
            const double u = rng.uniform01();
            auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), u);
            const auto i = static_cast<std::size_t>(std::distance(t.cdf.begin(), it));
            if (i == 0) return t.x.front();
            if (i >= t.x.size()) return t.x.back();
            const double f0 = t.cdf[i - 1];
            const double f1 = t.cdf[i];
            const double s = f1 > f0 ? (u - f0) / (f1 - f0) : 0.0;
            return std::clamp(t.x[i - 1] + s * (t.x[i] - t.x[i - 1]), t.x.front(), t.x.back());
          },
      },
      law_);
}

double DisorderDistribution::mass(double lo, double hi) const {
  if (hi < lo) return 0.0;
  double m = 0.0;
  const auto& at = atoms();
  if (!at.empty()) {
    const double lo_s = lo - slack(lo);
    const double hi_s = hi + slack(hi);
    auto first = std::lower_bound(at.begin(), at.end(), lo_s,
                                  [](const Atom& a, double v) { return a.position < v; });
    auto last = std::upper_bound(at.begin(), at.end(), hi_s,
                                 [](double v, const Atom& a) { return v < a.position; });
    m += atom_prefix_[static_cast<std::size_t>(last - at.begin())] -
         atom_prefix_[static_cast<std::size_t>(first - at.begin())];
  }
  for (const auto& p : pieces_) {
    const double overlap = std::min(hi, p.hi) - std::max(lo, p.lo);
    if (overlap > 0.0) m += p.mass * overlap / (p.hi - p.lo);
  }
  return std::min(m, 1.0);
}

double DisorderDistribution::cdf(double x) const {
  if (x < lower_) return 0.0;
  if (x >= upper_) return 1.0;
  const auto& at = atoms();
  auto last = std::upper_bound(at.begin(), at.end(), x,
                               [](double v, const Atom& a) { return v < a.position; });
  double m = atom_prefix_[static_cast<std::size_t>(last - at.begin())];
  for (const auto& p : pieces_) {
    if (x >= p.hi) {
      m += p.mass;
    } else if (x > p.lo) {
      m += p.mass * (x - p.lo) / (p.hi - p.lo);
    }
  }
  return std::min(m, 1.0);
}

double modulus_of_continuity(const DisorderDistribution& dist, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ValidationError("modulus of continuity needs eps > 0");
  }
  const double width = 2.0 * eps;
  if (width >= dist.upper() - dist.lower()) return 1.0;

  // The mass of [lo, lo + 2 eps] is piecewise linear in lo with kinks where an
  // endpoint meets an atom or a density breakpoint; its sup is attained at a
  // window that starts or ends at one of them.
  std::vector<double> starts;
  const auto& atoms = dist.atoms();
  const bool only_atoms = dist.pieces().empty();
  if (only_atoms) {
    // Equal or unequal weights: a window starting at an atom is optimal.
    double best = 0.0;
    std::size_t j = 0;
    std::vector<double> prefix(atoms.size() + 1, 0.0);
    for (std::size_t i = 0; i < atoms.size(); ++i) prefix[i + 1] = prefix[i] + atoms[i].weight;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double hi = atoms[i].position + width;
      if (j < i) j = i;
      while (j + 1 < atoms.size() && atoms[j + 1].position <= hi + slack(hi)) ++j;
      best = std::max(best, prefix[j + 1] - prefix[i]);
    }
    return std::min(best, 1.0);
  }
  for (const auto& a : atoms) {
    starts.push_back(a.position);
    starts.push_back(a.position - width);
  }
  for (const auto& p : dist.pieces()) {
    starts.push_back(p.lo);
    starts.push_back(p.hi);
    starts.push_back(p.lo - width);
    starts.push_back(p.hi - width);
  }
  double best = 0.0;
  for (double lo : starts) best = std::max(best, dist.mass(lo, lo + width));
  return std::min(best, 1.0);
}

std::vector<double> sample_couplings(const DisorderDistribution& dist, std::size_t count,
                                     std::uint64_t master_seed, std::uint64_t realization) {
  StreamRng rng({master_seed, realization, kCouplingStream});
  std::vector<double> omega(count);
  for (auto& w : omega) w = dist.sample(rng);
  return omega;
}

}  // namespace ssflab
