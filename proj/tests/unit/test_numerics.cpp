#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ssflab/errors.hpp"
#include "ssflab/numerics.hpp"
#include "ssflab/summation.hpp"

using namespace ssflab;

TEST_SUITE("numerics") {
  TEST_CASE("adaptive quadrature on closed forms") {
    CHECK(std::abs(integrate([](double x) { return std::sin(x); }, 0, std::numbers::pi) - 2.0) < 1e-10);
    CHECK(std::abs(integrate([](double x) { return std::exp(x); }, 0, 1) - (std::numbers::e - 1)) < 1e-12);
    CHECK(integrate([](double) { return 1.0; }, 2, 2) == 0.0);
    CHECK(std::abs(integrate([](double x) { return std::sqrt(x); }, 0, 1) - 2.0 / 3.0) < 1e-9);
  }

  TEST_CASE("golden section finds the maximum") {
    const auto r = golden_maximize([](double x) { return -(x - 0.3) * (x - 0.3) + 2; }, -1, 4);
    CHECK(std::abs(r.argmax - 0.3) < 1e-6);
    CHECK(r.value == doctest::Approx(2.0));
  }

  TEST_CASE("least squares line") {
    const std::vector<double> xs{0, 1, 2, 3};
    const std::vector<double> ys{1, 3, 5, 7};
    const LineFit f = fit_line(xs, ys);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r_squared == doctest::Approx(1.0));
  }

  TEST_CASE("median") {
    CHECK(median(std::vector<double>{3, 1, 2}) == 2.0);
    CHECK(median(std::vector<double>{4, 1, 2, 3}) == 2.5);
    CHECK_THROWS_AS(median(std::vector<double>{}), NumericError);
  }

  TEST_CASE("compensated sum keeps small terms") {
    CompensatedSum s;
    s += 1e16;
    s += 1.0;
    s += -1e16;
    CHECK(s.value() == 1.0);
  }
}
