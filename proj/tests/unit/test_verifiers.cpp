#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/ssf.hpp"
#include "ssflab/wegner.hpp"

using namespace ssflab;

TEST_SUITE("verifiers") {
  TEST_CASE("partial integration bound with constant phi") {
    const DisorderDistribution u(UniformLaw{});
    const auto r = lemma3_verify(u, [](double) { return 3.0; }, 0.1);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK(r.holds);
  }

  TEST_CASE("partial integration bound is an equality for a point mass") {
    const DisorderDistribution pm(AtomicMixtureLaw{{0.5}, {1.0}});
    const auto phi = [](double x) { return std::atan(4 * x); };
    const auto r = lemma3_verify(pm, phi, 0.2);
    CHECK(r.lhs == doctest::Approx(phi(0.7) - phi(0.5)));
    CHECK(r.rhs == doctest::Approx(phi(0.7) - phi(0.5)));
    CHECK(r.holds);
  }

  TEST_CASE("partial integration bound on random laws and test functions") {
    StreamRng rng({31, 0, 0});
    const std::vector<DisorderDistribution> laws{
        DisorderDistribution(UniformLaw{-1, 2}), DisorderDistribution(BernoulliLaw{0.3, 0, 1}),
        DisorderDistribution(CantorLaw{}),
        DisorderDistribution(AtomicMixtureLaw{{0.2, 0.9}, {0.25, 0.25}, 0.5, 0, 1})};
    for (int i = 0; i < 200; ++i) {
      const auto& law = laws[static_cast<std::size_t>(i) % laws.size()];
      const double c = 2.0 * rng.uniform01();
      const double w = 0.01 + rng.uniform01();
      const double eps = std::exp(std::log(1e-3) * rng.uniform01());
      const auto r = lemma3_verify(law, [&](double x) { return std::tanh((x - c) / w); }, eps);
      CHECK(r.holds);
      CHECK(r.lhs >= 0.0);
    }
    CHECK_THROWS_AS(lemma3_verify(laws[0], [](double x) { return -x; }, 0.1), ValidationError);
  }

  TEST_CASE("Weyl lower bound on a fine 2D box") {
    const Domain d = build_box_domain(2, 32, 1.0 / 32);
    const std::vector<double> v(d.size(), 0.0);
    const auto r = weyl_check(d, v, 0.1);
    CHECK(r.violations == 0);
    CHECK(r.delta == 0.0);
    CHECK(r.checked == 102);
    CHECK(r.min_margin >= 0.0);
    CHECK(r.volume == doctest::Approx(1.0));
  }

  TEST_CASE("Weyl bound on the unit interval beats 2 pi / e") {
    const Domain d = build_box_domain(1, 64, 1.0 / 64);
    const auto r = weyl_check(d, std::vector<double>(d.size(), 0.0), 0.25);
    CHECK(r.violations == 0);
    CHECK(r.eigenvalues.front() == doctest::Approx(4.0 * 64 * 64 * std::pow(std::sin(std::numbers::pi / 130), 2)));
    CHECK(r.bounds.front() == doctest::Approx(2 * std::numbers::pi / std::numbers::e));
  }

  TEST_CASE("negative potential shifts the Weyl bound") {
    const Domain d = build_box_domain(1, 32, 1.0 / 32);
    const std::vector<double> v(d.size(), -1.0);
    const auto r = weyl_check(d, v, 0.2);
    CHECK(r.shift == 1.0);
    CHECK(r.delta > 0.0);
    CHECK(r.delta < 1e-3);
    CHECK(r.violations == 0);
    const auto study = weyl_refinement_study(d, v, 0.2);
    CHECK(study.fine.spacing == 1.0 / 64);
    CHECK(study.fine.violations == 0);
    CHECK_THROWS_AS(weyl_check(d, v, 0.3), ValidationError);
  }

  TEST_CASE("semigroup trace bound on the unit interval") {
    const Domain d = build_box_domain(1, 256, 1.0 / 256);
    const std::vector<double> v(d.size(), 0.0);
    const auto r = semigroup_trace_check(d, v, std::vector<double>{0.01, 0.1, 1.0});
    CHECK(r.all_hold);
    CHECK(r.rows[0].margin >= 0.1);
    CHECK_THROWS_AS(semigroup_trace_check(d, v, std::vector<double>{1e-6}), ValidationError);
    CHECK_THROWS_AS(semigroup_trace_check(d, v, std::vector<double>{2.0}), ValidationError);
  }

  TEST_CASE("semigroup trace follows the Dirichlet heat trace") {
    const double t = 0.001;
    const std::vector<double> grid{t};
    const Domain one = build_box_domain(1, 256, 1.0 / 256);
    const Domain two = build_box_domain(1, 512, 1.0 / 256);
    const auto a = semigroup_trace_check(one, std::vector<double>(one.size(), 0.0), grid);
    const auto b = semigroup_trace_check(two, std::vector<double>(two.size(), 0.0), grid);
    CHECK(b.rows[0].rhs == doctest::Approx(2.0 * a.rows[0].rhs));
    const double k = 1.0 / std::sqrt(8 * std::numbers::pi * t);
    CHECK(a.rows[0].lhs == doctest::Approx(k - 0.5).epsilon(0.01));
    CHECK(b.rows[0].lhs / a.rows[0].lhs == doctest::Approx((2 * k - 0.5) / (k - 0.5)).epsilon(0.01));
  }

  TEST_CASE("singular values vanish for a zero perturbation") {
    DecayConfig cfg;
    cfg.model.side = 24;
    cfg.amplitudes = {0.0};
    const auto r = singular_value_experiment(cfg);
    for (double s : r.rows[0].singular_values.values) CHECK(s == 0.0);
    CHECK_FALSE(r.rows[0].fit_root.has_value());
    CHECK_FALSE(r.rows[0].fit_error.empty());
  }

  TEST_CASE("singular values decay stretched-exponentially in 1D") {
    DecayConfig cfg;
    cfg.model.side = 96;
    cfg.amplitudes = {1.0};
    const auto r = singular_value_experiment(cfg);
    REQUIRE(r.rows[0].fit_root.has_value());
    CHECK(r.rows[0].fit_root->rate > 0.0);
    CHECK(r.rows[0].fit_root->r_squared >= 0.9);
  }

  TEST_CASE("large amplitude approaches site deletion") {
    DecayConfig cfg;
    cfg.model.side = 64;
    cfg.amplitudes = {1e6, kSiteDeletion};
    const auto r = singular_value_experiment(cfg);
    const auto& big = r.rows[0].singular_values.values;
    const auto& del = r.rows[1].singular_values.values;
    for (std::size_t n = 0; n < 10 && n < big.size(); ++n) {
      if (big[n] <= cfg.floor && del[n] <= cfg.floor) break;
      CHECK(std::abs(big[n] - del[n]) <= 1e-3);
    }
  }

  TEST_CASE("covering function of the cell indicator") {
    const Domain d = build_box_domain(2, 12, 0.5);
    const auto u = SingleSitePotential::cell_indicator(2, 0.5, 1.5);
    for (double c : covering_function(d, u)) CHECK(c == 1.5);
    CHECK(u.cell_floor(d) == 1.5);
  }

  TEST_CASE("eigenvalue derivatives sum to one for the Anderson model") {
    const Domain d = build_box_domain(2, 8, 1.0);
    const auto u = SingleSitePotential::cell_indicator(2, 1.0, 1.0);
    StreamRng rng({32, 0, 0});
    std::vector<double> omega(d.cells().size());
    for (auto& w : omega) w = rng.uniform01();
    const auto sums = coupling_derivative_sums(d, u, omega, std::vector<double>(d.size(), 0.0), 1e-3);
    for (double s : sums) CHECK(std::abs(s - 1.0) < 1e-8);
  }

  TEST_CASE("trace of rho is monotone in each coupling") {
    const Domain d = build_box_domain(1, 20, 1.0);
    const auto u = SingleSitePotential::cell_indicator(1, 1.0, 1.0);
    std::vector<double> omega(d.cells().size(), 0.5);
    std::vector<double> values;
    for (int i = 0; i <= 40; ++i) values.push_back(i / 40.0);
    const SwitchFunction rho = make_switch(2.0, 0.1);
    const auto traces = frozen_coupling_traces(d, u, omega, std::vector<double>(d.size(), 0.0), 7, values,
                                               [&](double x) { return rho(x); });
    for (std::size_t i = 1; i < traces.size(); ++i) CHECK(traces[i] >= traces[i - 1] - 1e-12);
    CHECK(traces.back() - traces.front() <= 1.0 + 1e-12);
  }
}
