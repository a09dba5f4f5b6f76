#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/lattice.hpp"
#include "ssflab/spectral.hpp"

using namespace ssflab;
using testing::max_abs_diff;
using testing::to_vector;

namespace {

std::vector<double> path_eigenvalues(int n) {
  std::vector<double> v;
  for (int k = 1; k <= n; ++k) {
    const double s = std::sin(k * std::numbers::pi / (2.0 * (n + 1)));
    v.push_back(4.0 * s * s);
  }
  return v;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("diagonal input sorts ascending") {
    Eigen::MatrixXd m = Eigen::Vector3d(3, 1, 2).asDiagonal();
    const auto s = eigen_decompose(DenseMatrix(m));
    CHECK(to_vector(s.eigenvalues) == std::vector<double>{1, 2, 3});
  }

  TEST_CASE("path Laplacian matches closed form") {
    const auto s = eigen_decompose(assemble_operator(build_box_domain(1, 4, 1.0), {0, 0, 0, 0}));
    CHECK(max_abs_diff(to_vector(s.eigenvalues), path_eigenvalues(4)) < 1e-12);
  }

  TEST_CASE("2D box spectrum is the tensor sum of 1D spectra") {
    const auto s = spectrum(assemble_operator(build_box_domain(2, 3, 1.0), std::vector<double>(9, 0.0)));
    const auto one = path_eigenvalues(3);
    std::vector<double> sums;
    for (double a : one)
      for (double b : one) sums.push_back(a + b);
    CHECK(max_abs_diff(to_vector(s.eigenvalues), testing::sorted(sums)) < 1e-12);
  }

  TEST_CASE("decomposition invariants hold") {
    StreamRng rng({3, 1, 4});
    for (int n : {5, 17, 40}) {
      const Eigen::MatrixXd h = 10.0 * testing::random_symmetric(n, rng);
      const auto s = eigen_decompose(DenseMatrix(h));
      const double scale = 1.0 + s.eigenvalues.cwiseAbs().maxCoeff();
      CHECK(reconstruction_residual(s, DenseMatrix(h)) <= 1e-10 * scale);
      CHECK(orthonormality_defect(s) <= 1e-10);
      for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) {
        CHECK(s.eigenvalues[i] >= s.eigenvalues[i - 1]);
      }
    }
    const Domain d = build_box_domain(2, 5, 1.0);
    const auto op = assemble_operator(d, std::vector<double>(d.size(), 0.0),
                                      constant_field_phases(d, 0.7));
    const auto s = eigen_decompose(op);
    CHECK(reconstruction_residual(s, operator_matrix(op)) <= 1e-10 * 10.0);
    CHECK(orthonormality_defect(s) <= 1e-10);
  }

  TEST_CASE("dense cap and Hermiticity are enforced") {
    const auto op = assemble_operator(build_box_domain(1, 10, 1.0), std::vector<double>(10, 0.0));
    CHECK_THROWS_AS(eigen_decompose(op, 9), NumericError);
    CHECK_THROWS_AS(spectrum(op, 9), NumericError);
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 0, 1;
    CHECK_THROWS_AS(eigen_decompose(DenseMatrix(m)), NumericError);
  }

  TEST_CASE("semigroup examples") {
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
    const auto e0 = std::get<Eigen::MatrixXd>(semigroup(testing::spec_of(zero), 1.0));
    CHECK(e0(0, 0) == doctest::Approx(1.0));

    Eigen::MatrixXd d = Eigen::Vector2d(std::log(2.0), std::log(4.0)).asDiagonal();
    const auto e1 = std::get<Eigen::MatrixXd>(semigroup(testing::spec_of(d), 1.0));
    CHECK(std::abs(e1(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(e1(1, 1) - 0.25) < 1e-15);
    CHECK(std::abs(e1(0, 1)) < 1e-15);

    StreamRng rng({8, 8, 8});
    const Eigen::MatrixXd h = testing::random_symmetric(12, rng);
    const auto s = testing::spec_of(h);
    const auto e = std::get<Eigen::MatrixXd>(semigroup(s, 1.0));
    double expect = 0.0;
    for (double l : to_vector(s.eigenvalues)) expect += std::exp(-l);
    CHECK(std::abs(e.trace() - expect) <= 1e-12 * expect);
    CHECK_THROWS_AS(semigroup(s, 0.0), ValidationError);
    CHECK_THROWS_AS(semigroup(s, -1.0), ValidationError);
  }

  TEST_CASE("singular value examples") {
    const auto z = singular_values(DenseMatrix(Eigen::MatrixXd(Eigen::MatrixXd::Zero(4, 4))));
    CHECK(z.values == std::vector<double>(4, 0.0));
    Eigen::MatrixXd d = Eigen::Vector2d(-3, 2).asDiagonal();
    const auto sv = singular_values(DenseMatrix(d));
    CHECK(max_abs_diff(sv.values, {3, 2}) < 1e-14);

    const Domain dom = build_box_domain(1, 8, 1.0);
    const auto s1 = eigen_decompose(assemble_operator(dom, std::vector<double>(8, 0.2)));
    const auto v = singular_values(difference(semigroup(s1, 1.0), semigroup(s1, 1.0)));
    for (double x : v.values) CHECK(x == 0.0);
  }

  TEST_CASE("spectral mapping for the semigroup") {
    StreamRng rng({21, 0, 0});
    const Eigen::MatrixXd h = 3.0 * testing::random_symmetric(15, rng);
    const auto s = testing::spec_of(h);
    const auto sv = singular_values(semigroup(s, 1.0));
    std::vector<double> expect;
    for (double l : to_vector(s.eigenvalues)) expect.push_back(std::exp(-l));
    std::sort(expect.rbegin(), expect.rend());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(std::abs(sv.values[i] - expect[i]) <= 1e-10 * expect[0]);
    }
  }

  TEST_CASE("counting function") {
    const auto s = testing::diag_spec({1, 2, 3});
    CHECK(counting_function(s, 2.0) == 2);
    CHECK(counting_function(s, 0.5) == 0);
    CHECK(counting_function(s, 3.0) == 3);
    CHECK(counting_function(s, 99.0) == 3);
    CHECK(counting_function(testing::diag_spec({2, 2, 2}), 2.0) == 3);
  }

  TEST_CASE("trace function") {
    const auto s = testing::diag_spec({-1, 0.5, 2, 7});
    CHECK(trace_function(s, [](double) { return 1.0; }) == 4.0);
    CHECK(trace_function(s, [](double x) { return x >= 0.0 && x <= 2.0 ? 1.0 : 0.0; }) == 2.0);
    CHECK(trace_function(testing::diag_spec({0, std::log(2.0)}),
                         [](double x) { return std::exp(-x); }) == doctest::Approx(1.5));
    CHECK_THROWS_AS(trace_function(s, [](double x) { return 1.0 / (x - 0.5); }),
                    NumericError);
  }

  TEST_CASE("fit_decay on exact data") {
    SingularValueList a, b;
    for (int n = 1; n <= 12; ++n) {
      a.values.push_back(std::exp(-2.0 * n));
      b.values.push_back(std::exp(-std::sqrt(static_cast<double>(n))));
    }
    const DecayFit fa = fit_decay(a, 1.0, kDefaultDecayFloor, 0);
    CHECK(std::abs(fa.rate - 2.0) < 1e-10);
    CHECK(std::abs(fa.prefactor - 1.0) < 1e-10);
    CHECK(std::abs(fa.r_squared - 1.0) < 1e-10);
    const DecayFit fb = fit_decay(b, 0.5, kDefaultDecayFloor, 0);
    CHECK(std::abs(fb.rate - 1.0) < 1e-10);
    CHECK(std::abs(fb.r_squared - 1.0) < 1e-10);
    const DecayFit skipped = fit_decay(a, 1.0, kDefaultDecayFloor, 3);
    CHECK(skipped.n_min == 4);
    CHECK(skipped.n_max == 12);
  }

  TEST_CASE("fit_decay rejects too few points") {
    SingularValueList few{{1.0, 0.5, 0.2, 1e-13, 1e-14, 0.0}};
    CHECK_THROWS_AS(fit_decay(few, 1.0, kDefaultDecayFloor, 0), NumericError);
    SingularValueList zeros{std::vector<double>(20, 0.0)};
    CHECK_THROWS_AS(fit_decay(zeros, 1.0), NumericError);
  }

  TEST_CASE("semigroup difference of a center-site bump decays") {
    const Domain d = build_box_domain(1, 64, 1.0);
    std::vector<double> v(64, 0.0);
    const auto s1 = eigen_decompose(assemble_operator(d, v));
    v[32] = 5.0;
    const auto s2 = eigen_decompose(assemble_operator(d, v));
    const auto sv = singular_values(difference(semigroup(s1, 1.0), semigroup(s2, 1.0)));
    const DecayFit f = fit_decay(sv, 1.0);
    CHECK(f.rate > 0.0);
    CHECK(f.r_squared >= 0.9);
  }

  TEST_CASE("Weyl perturbation inequality") {
    StreamRng rng({4, 4, 4});
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::MatrixXd h = testing::random_symmetric(10, rng);
      Eigen::VectorXd diag(10);
      for (int i = 0; i < 10; ++i) diag[i] = 2.0 * rng.uniform01() - 1.0;
      const Eigen::MatrixXd hd = h + Eigen::MatrixXd(diag.asDiagonal());
      const auto a = testing::spec_of(h);
      const auto b = testing::spec_of(hd);
      CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() <=
            diag.cwiseAbs().maxCoeff() + 1e-12);
    }
  }

  TEST_CASE("Dirichlet bracketing on nested masks") {
    std::vector<Coord> small, large;
    for (int x = 0; x < 6; ++x)
      for (int y = 0; y < 6; ++y) {
        large.push_back({x, y, 0});
        if (x + y < 7) small.push_back({x, y, 0});
      }
    const auto a = spectrum(assemble_operator(build_masked_domain(2, small, 1.0),
                                              std::vector<double>(small.size(), 0.0)));
    const auto b = spectrum(assemble_operator(build_masked_domain(2, large, 1.0),
                                              std::vector<double>(large.size(), 0.0)));
    for (Eigen::Index n = 0; n < a.eigenvalues.size(); ++n) {
      CHECK(b.eigenvalues[n] <= a.eigenvalues[n] + 1e-12);
    }
    const auto p = spectrum(assemble_operator(build_box_domain(1, 10, 1.0), std::vector<double>(10, 0.0)));
    const auto q = spectrum(assemble_operator(build_box_domain(1, 20, 1.0), std::vector<double>(20, 0.0)));
    for (Eigen::Index n = 0; n < 10; ++n) CHECK(q.eigenvalues[n] <= p.eigenvalues[n] + 1e-12);
  }

  TEST_CASE("Ky Fan inequality for differences") {
    StreamRng rng({6, 6, 6});
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::MatrixXd a = testing::random_symmetric(12, rng);
      const Eigen::MatrixXd b = testing::random_symmetric(12, rng);
      const auto sa = singular_values(DenseMatrix(a)).values;
      const auto sb = singular_values(DenseMatrix(b)).values;
      const auto sd = singular_values(DenseMatrix(Eigen::MatrixXd(a - b))).values;
      for (std::size_t m = 1; m <= 12; ++m)
        for (std::size_t k = 1; m + k - 1 <= 12; ++k) {
          CHECK(sd[m + k - 2] <= sa[m - 1] + sb[k - 1] + 1e-12);
        }
    }
  }

  TEST_CASE("embedding zero-extends a restricted operator") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 2, 3;
    const std::vector<std::size_t> parents{0, 2};
    const auto e = std::get<Eigen::MatrixXd>(embed(DenseMatrix(m), parents, 3));
    CHECK(e(0, 0) == 1);
    CHECK(e(0, 2) == 2);
    CHECK(e(2, 2) == 3);
    CHECK(e.row(1).cwiseAbs().sum() == 0.0);
  }
}
