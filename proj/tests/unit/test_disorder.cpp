#include <doctest.h>

#include <cmath>

#include "ssflab/disorder.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/numerics.hpp"

using namespace ssflab;

namespace {

std::vector<DisorderDistribution> zoo() {
  return {DisorderDistribution(UniformLaw{-0.5, 1.5}),
          DisorderDistribution(BernoulliLaw{0.3, 0.0, 1.0}),
          DisorderDistribution(AtomicMixtureLaw{{0.1, 0.7}, {0.2, 0.3}, 0.5, 0.0, 1.0}),
          DisorderDistribution(CantorLaw{10}),
          DisorderDistribution(TabulatedCdfLaw{{0.0, 0.2, 1.0}, {0.0, 0.8, 1.0}})};
}

// sup over windows [E - eps, E + eps] whose left end sits on an atom.
double brute_force_atomic(const DisorderDistribution& d, double eps) {
  double best = 0.0;
  for (const Atom& a : d.atoms()) best = std::max(best, d.mass(a.position, a.position + 2 * eps));
  return best;
}

}  // namespace

TEST_SUITE("disorder") {
  TEST_CASE("degenerate bernoulli samples its upper value") {
    const DisorderDistribution d(BernoulliLaw{1.0});
    CHECK(sample_couplings(d, 4, 1, 0) == std::vector<double>{1, 1, 1, 1});
  }

  TEST_CASE("uniform sample mean obeys the law of large numbers") {
    const DisorderDistribution d(UniformLaw{0.0, 1.0});
    const auto w = sample_couplings(d, 10000, 2024, 0);
    double sum = 0.0;
    for (double x : w) sum += x;
    CHECK(std::abs(sum / 10000 - 0.5) < 0.02);
  }

  TEST_CASE("sampling is a pure function of seed and realization") {
    const DisorderDistribution d(CantorLaw{});
    CHECK(sample_couplings(d, 50, 7, 3) == sample_couplings(d, 50, 7, 3));
    CHECK(sample_couplings(d, 50, 7, 3) != sample_couplings(d, 50, 7, 4));
    CHECK(sample_couplings(d, 50, 7, 3) != sample_couplings(d, 50, 8, 3));
  }

  TEST_CASE("samples stay in the support") {
    for (const auto& d : zoo()) {
      for (double x : sample_couplings(d, 2000, 3, 1)) {
        CHECK(x >= d.lower());
        CHECK(x <= d.upper());
      }
    }
  }

  TEST_CASE("cdf is a distribution function") {
    for (const auto& d : zoo()) {
      CHECK(d.cdf(d.lower() - 1e-9) == 0.0);
      CHECK(d.cdf(d.upper()) == doctest::Approx(1.0).epsilon(1e-12));
      double prev = 0.0;
      for (int i = 0; i <= 400; ++i) {
        const double x = d.lower() - 0.1 + (d.upper() - d.lower() + 0.2) * i / 400.0;
        const double c = d.cdf(x);
        CHECK(c >= prev - 1e-15);
        CHECK(c <= 1.0 + 1e-15);
        prev = c;
      }
    }
  }

  TEST_CASE("cdf is right-continuous at atoms") {
    const DisorderDistribution d(BernoulliLaw{0.5});
    CHECK(d.cdf(0.0) == 0.5);
    CHECK(d.cdf(-1e-12) == 0.0);
    CHECK(d.cdf(1.0) == 1.0);
  }

  TEST_CASE("modulus of continuity closed forms") {
    CHECK(modulus_of_continuity(DisorderDistribution(UniformLaw{0, 1}), 0.1) ==
          doctest::Approx(0.2));
    CHECK(modulus_of_continuity(DisorderDistribution(UniformLaw{0, 1}), 0.7) == 1.0);
    const DisorderDistribution b(BernoulliLaw{0.5});
    CHECK(modulus_of_continuity(b, 0.3) == doctest::Approx(0.5));
    CHECK(modulus_of_continuity(b, 0.6) == doctest::Approx(1.0));
    CHECK_THROWS_AS(modulus_of_continuity(b, 0.0), ValidationError);
    CHECK_THROWS_AS(modulus_of_continuity(b, -1.0), ValidationError);
  }

  TEST_CASE("cantor modulus scales with exponent log 2 / log 3") {
    const DisorderDistribution c(CantorLaw{12});
    std::vector<double> xs, ys;
    for (int k = 1; k <= 6; ++k) {
      const double eps = std::pow(3.0, -k);
      const double s = modulus_of_continuity(c, eps);
      CHECK(s <= std::pow(2.0, -k + 1) + 1e-12);
      xs.push_back(std::log(eps));
      ys.push_back(std::log(s));
    }
    CHECK(std::abs(fit_line(xs, ys).slope - std::log(2.0) / std::log(3.0)) < 0.05);
  }

  TEST_CASE("modulus matches brute force on atomic laws") {
    const DisorderDistribution c(CantorLaw{6});
    const DisorderDistribution m(AtomicMixtureLaw{{0.0, 0.05, 0.3, 0.31, 0.9}, {0.1, 0.2, 0.25, 0.15, 0.3}});
    for (double eps : {0.001, 0.01, 0.02, 0.1, 0.2, 0.4}) {
      CHECK(modulus_of_continuity(c, eps) == doctest::Approx(brute_force_atomic(c, eps)));
      CHECK(modulus_of_continuity(m, eps) == doctest::Approx(brute_force_atomic(m, eps)));
    }
  }

  TEST_CASE("modulus dominates every window and is monotone") {
    for (const auto& d : zoo()) {
      double prev = 0.0;
      for (double eps : {0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 0.5, 1.0, 3.0}) {
        const double s = modulus_of_continuity(d, eps);
        CHECK(s >= prev - 1e-15);
        CHECK(s <= 1.0 + 1e-15);
        CHECK(s > 0.0);
        for (int i = 0; i <= 200; ++i) {
          const double e = d.lower() - eps + (d.upper() - d.lower() + 2 * eps) * i / 200.0;
          CHECK(d.mass(e - eps, e + eps) <= s + 1e-12);
        }
        prev = s;
      }
    }
  }

  TEST_CASE("invalid laws are rejected") {
    CHECK_THROWS_AS(DisorderDistribution(UniformLaw{1, 0}), ValidationError);
    CHECK_THROWS_AS(DisorderDistribution(BernoulliLaw{1.5}), ValidationError);
    CHECK_THROWS_AS(DisorderDistribution(AtomicMixtureLaw{{0.1}, {0.5}}), ValidationError);
    CHECK_THROWS_AS(DisorderDistribution(CantorLaw{0}), ValidationError);
    CHECK_THROWS_AS(DisorderDistribution(CantorLaw{8, 1.2}), ValidationError);
    CHECK_THROWS_AS(DisorderDistribution(TabulatedCdfLaw{{0, 1}, {0, 0.5}}), ValidationError);
  }

  TEST_CASE("kind names") {
    const auto z = zoo();
    CHECK(z[0].kind() == "uniform");
    CHECK(z[1].kind() == "bernoulli");
    CHECK(z[2].kind() == "atomic-mixture");
    CHECK(z[3].kind() == "cantor");
    CHECK(z[4].kind() == "user-cdf");
  }
}
