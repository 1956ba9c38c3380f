#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bowsim/quadrature.hpp"

using namespace bowsim;

TEST_CASE("adaptive GK integrates smooth functions to tolerance") {
    auto f1 = [](double x) { return x * x; };
    CHECK(integrate_gk(f1, 0.0, 1.0, 1e-12, 100) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    auto f2 = [](double x) { return std::sin(x); };
    CHECK(integrate_gk(f2, 0.0, std::numbers::pi, 1e-12, 100) ==
          doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("adaptive GK resolves an integrable endpoint layer") {
    auto f = [](double x) { return std::log(x); };
    CHECK(integrate_gk(f, 1e-300 + 0.0 + 1e-12, 1.0, 1e-10, 2000) ==
          doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("budget exhaustion raises QuadratureFailure") {
    auto f = [](double x) { return std::sin(1000.0 * x); };
    CHECK_THROWS_AS(integrate_gk(f, 0.0, 50.0, 1e-13, 8), QuadratureFailure);
}

TEST_CASE("Euler transform sums slowly alternating series") {
    // sum (-1)^{k+1}/k = ln 2
    std::vector<double> terms;
    for (int k = 1; k <= 40; ++k)
        terms.push_back((k % 2 ? 1.0 : -1.0) / k);
    CHECK(euler_sum_alternating(terms) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-11));
    CHECK(euler_sum_alternating({}) == 0.0);
}

TEST_CASE("spec validation bounds") {
    QuadratureSpec s;
    s.relative_tolerance = 1e-2;  // above the 1e-3 cap
    CHECK_THROWS_AS(s.validate(), QuadratureFailure);
    s = QuadratureSpec{};
    s.max_subdivisions = 2;
    CHECK_THROWS_AS(s.validate(), QuadratureFailure);
}
