#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/lattice.hpp"
#include "ssflab/spectral.hpp"

using namespace ssflab;

TEST_SUITE("lattice") {
  TEST_CASE("box domains have grid graph edge counts") {
    const Domain a = build_box_domain(1, 3, 1.0);
    CHECK(a.size() == 3);
    CHECK(a.edges().size() == 2);
    const Domain b = build_box_domain(2, 2, 0.5);
    CHECK(b.size() == 4);
    CHECK(b.edges().size() == 4);
    CHECK(b.volume() == doctest::Approx(1.0));
    const Domain c = build_box_domain(3, 2, 1.0);
    CHECK(c.size() == 8);
    CHECK(c.edges().size() == 12);
  }

  TEST_CASE("box domain rejects bad arguments") {
    CHECK_THROWS_AS(build_box_domain(0, 3, 1.0), ValidationError);
    CHECK_THROWS_AS(build_box_domain(4, 3, 1.0), ValidationError);
    CHECK_THROWS_AS(build_box_domain(1, 0, 1.0), ValidationError);
    CHECK_THROWS_AS(build_box_domain(1, 3, 0.0), ValidationError);
    CHECK_THROWS_AS(build_box_domain(1, 3, -1.0), ValidationError);
  }

  TEST_CASE("masked domains keep only interior adjacency") {
    const Domain l = build_masked_domain(2, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, 1.0);
    CHECK(l.size() == 3);
    CHECK(l.edges().size() == 2);
    const Domain gap = build_masked_domain(1, {{0, 0, 0}, {2, 0, 0}}, 1.0);
    CHECK(gap.size() == 2);
    CHECK(gap.edges().empty());
    std::vector<Coord> ring;
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y)
        if (x != 2 || y != 2) ring.push_back({x, y, 0});
    const Domain r = build_masked_domain(2, ring, 1.0);
    CHECK(r.size() == 24);
    CHECK(r.edges().size() == 36);
    CHECK_THROWS_AS(build_masked_domain(2, {}, 1.0), ValidationError);
  }

  TEST_CASE("edges join unit-distance sites only") {
    const Domain d = build_box_domain(3, 3, 1.0);
    for (const auto& e : d.edges()) {
      int dist = 0;
      for (int a = 0; a < 3; ++a) dist += std::abs(d.sites()[e.from][a] - d.sites()[e.to][a]);
      CHECK(dist == 1);
    }
  }

  TEST_CASE("assembled operators match closed forms") {
    const auto path = spectrum(assemble_operator(build_box_domain(1, 3, 1.0), {0, 0, 0}));
    CHECK(path.eigenvalues[0] == doctest::Approx(2.0 - std::sqrt(2.0)));
    CHECK(path.eigenvalues[1] == doctest::Approx(2.0));
    CHECK(path.eigenvalues[2] == doctest::Approx(2.0 + std::sqrt(2.0)));

    const auto one = assemble_operator(build_box_domain(1, 1, 1.0), {5.0});
    CHECK(one.real_matrix()(0, 0) == 7.0);

    const Domain sq = build_box_domain(2, 2, 1.0);
    const auto phases = std::vector<std::complex<double>>(sq.edges().size(), 1.0);
    const auto s = spectrum(assemble_operator(sq, {0, 0, 0, 0}, phases));
    const std::vector<double> expect{2, 4, 4, 6};
    CHECK(testing::max_abs_diff(testing::to_vector(s.eigenvalues), expect) < 1e-12);
  }

  TEST_CASE("operator entries follow the stencil") {
    const Domain d = build_box_domain(2, 3, 0.5);
    std::vector<double> v(d.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i);
    const auto h = assemble_operator(d, v).real_matrix();
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(h(i, i) == doctest::Approx(2 * 2 * 4.0 + v[i]));
    }
    for (const auto& e : d.edges()) CHECK(h(e.from, e.to) == -4.0);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("assembly rejects mismatched or non-unimodular input") {
    const Domain d = build_box_domain(2, 2, 1.0);
    CHECK_THROWS_AS(assemble_operator(d, {0, 0, 0}), ValidationError);
    std::vector<std::complex<double>> bad(d.edges().size(), 1.0);
    bad[1] = 1.5;
    CHECK_THROWS_AS(assemble_operator(d, {0, 0, 0, 0}, bad), ValidationError);
    std::vector<std::complex<double>> short_list(d.edges().size() - 1, 1.0);
    CHECK_THROWS_AS(assemble_operator(d, {0, 0, 0, 0}, short_list), ValidationError);
  }

  TEST_CASE("magnetic operators are exactly Hermitian") {
    const Domain d = build_box_domain(2, 5, 0.5);
    const auto op = assemble_operator(d, std::vector<double>(d.size(), 0.3),
                                      constant_field_phases(d, 1.7, Gauge::symmetric));
    const auto h = op.complex_matrix();
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(op.real_matrix(), NumericError);
  }

  TEST_CASE("plaquette flux equals B h^2 in both gauges") {
    const Domain d = build_box_domain(2, 3, 0.5);
    const double b = 0.8;
    for (Gauge g : {Gauge::landau, Gauge::symmetric}) {
      const auto op = assemble_operator(d, std::vector<double>(d.size(), 0.0),
                                        constant_field_phases(d, b, g));
      const auto h = op.complex_matrix();
      auto hop = [&](Coord a, Coord c) {
        return -h(*d.index_of(a), *d.index_of(c)) / 4.0;  // h^-2 = 4
      };
      const auto loop = hop({0, 0, 0}, {1, 0, 0}) * hop({1, 0, 0}, {1, 1, 0}) *
                        hop({1, 1, 0}, {0, 1, 0}) * hop({0, 1, 0}, {0, 0, 0});
      CHECK(std::arg(loop) == doctest::Approx(b * 0.25));
    }
  }

  TEST_CASE("spectrum is gauge invariant") {
    const Domain d = build_box_domain(2, 6, 1.0);
    std::vector<double> v(d.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(1.3 * static_cast<double>(i));
    const auto a = spectrum(assemble_operator(d, v, constant_field_phases(d, 0.9, Gauge::landau)));
    const auto s =
        spectrum(assemble_operator(d, v, constant_field_phases(d, 0.9, Gauge::symmetric)));
    CHECK((a.eigenvalues - s.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("field needs two dimensions") {
    CHECK_THROWS_AS(constant_field_phases(build_box_domain(1, 4, 1.0), 1.0), ValidationError);
  }

  TEST_CASE("cells partition the sites") {
    const Domain d = build_box_domain(2, 8, 0.25);
    CHECK(d.cells().size() == 4);
    const auto u = SingleSitePotential::cell_indicator(2, 0.25, 1.0);
    CHECK(u.offsets.size() == 16);
    for (double c : covering_function(d, u)) CHECK(c == 1.0);
    CHECK(u.cell_floor(d) == 1.0);
    const Domain coarse = build_box_domain(1, 5, 3.0);
    CHECK(coarse.cells().size() == 5);
    CHECK(coarse.cell_of(2) == Coord{6, 0, 0});
  }

  TEST_CASE("alloy potential examples") {
    const Domain d = build_box_domain(1, 5, 1.0);
    const auto u = SingleSitePotential::cell_indicator(1, 1.0, 1.0);
    const std::vector<double> per{0.5, -1, 2, 0, 3};
    CHECK(alloy_potential(d, u, std::vector<double>(5, 0.0), per) == per);
    const auto shifted = alloy_potential(d, u, std::vector<double>(5, 0.75), per);
    for (std::size_t i = 0; i < 5; ++i) CHECK(shifted[i] == per[i] + 0.75);

    SingleSitePotential two{{{0, 0, 0}, {1, 0, 0}}, {1.0, 0.5}};
    const auto conv = alloy_potential(d, two, std::vector<double>{0, 1, 0, 0, 0},
                                      std::vector<double>(5, 0.0));
    CHECK(conv == std::vector<double>{0, 1, 0.5, 0, 0});
    // Contributions that fall outside the domain are dropped.
    const auto edge = alloy_potential(d, two, std::vector<double>{0, 0, 0, 0, 2},
                                      std::vector<double>(5, 0.0));
    CHECK(edge == std::vector<double>{0, 0, 0, 0, 2});
    CHECK_THROWS_AS(alloy_potential(d, u, std::vector<double>(4, 0.0), per), ValidationError);
  }

  TEST_CASE("alloy potential is linear in the couplings") {
    const Domain d = build_box_domain(2, 6, 0.5);
    const auto u = SingleSitePotential::cell_indicator(2, 0.5, 1.3);
    StreamRng rng({5, 0, 0});
    std::vector<double> w1(d.cells().size()), w2(d.cells().size()), mix(d.cells().size());
    for (std::size_t k = 0; k < w1.size(); ++k) {
      w1[k] = rng.uniform01();
      w2[k] = rng.uniform01();
      mix[k] = 2.0 * w1[k] - 0.5 * w2[k];
    }
    const std::vector<double> zero(d.size(), 0.0);
    const auto a = alloy_potential(d, u, w1, zero);
    const auto b = alloy_potential(d, u, w2, zero);
    const auto c = alloy_potential(d, u, mix, zero);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(c[i] == doctest::Approx(2 * a[i] - 0.5 * b[i]));
  }

  TEST_CASE("nonnegative potential never lowers an eigenvalue") {
    const Domain d = build_box_domain(2, 8, 1.0);
    StreamRng rng({11, 0, 0});
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> v(d.size()), w(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) {
        v[i] = 4.0 * rng.uniform01() - 2.0;
        w[i] = v[i] + (rng.uniform01() < 0.3 ? 3.0 * rng.uniform01() : 0.0);
      }
      const auto a = spectrum(assemble_operator(d, v));
      const auto b = spectrum(assemble_operator(d, w));
      for (Eigen::Index n = 0; n < a.eigenvalues.size(); ++n) {
        CHECK(b.eigenvalues[n] >= a.eigenvalues[n] - 1e-12);
      }
    }
  }

  TEST_CASE("site removal keeps parent indices") {
    const Domain d = build_box_domain(1, 6, 1.0);
    const std::vector<std::size_t> removed{2, 3};
    const Restriction r = remove_sites(d, removed);
    CHECK(r.domain.size() == 4);
    CHECK(r.parent_index == std::vector<std::size_t>{0, 1, 4, 5});
    CHECK(r.domain.edges().size() == 2);
  }

  TEST_CASE("refinement doubles resolution and keeps volume") {
    const Domain d = build_box_domain(2, 3, 0.5);
    const Domain f = d.refined();
    CHECK(f.size() == 36);
    CHECK(f.spacing() == 0.25);
    CHECK(f.volume() == doctest::Approx(d.volume()));
  }
}
