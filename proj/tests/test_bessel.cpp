#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "entforce/bessel.hpp"

using namespace entforce;

namespace {

// Independent oracle: J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt.
// The integrand continues evenly across both endpoints, so the trapezoid
// rule converges spectrally; the node count scales with x to resolve the
// oscillation of the phase.
double bessel_oracle(int n, double x, int nodes = 0) {
    if (nodes == 0) nodes = 400 + static_cast<int>(12.0 * x);
    const double h = M_PI / nodes;
    double sum = 0.5 * (std::cos(0.0) + std::cos(n * M_PI));
    for (int k = 1; k < nodes; ++k) {
        const double t = k * h;
        sum += std::cos(n * t - x * std::sin(t));
    }
    return sum * h / M_PI;
}

} // namespace

TEST_CASE("bessel trivial values at the origin", "[bessel]") {
    CHECK(bessel_j(0, 0.0) == Catch::Approx(1.0).margin(1e-15));
    CHECK(bessel_j(1, 0.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(bessel_j(2, 0.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("first zero of J0", "[bessel]") {
    // location frozen from bisection on the independent integral oracle
    CHECK(std::abs(bessel_j(0, 2.404825557695773)) < 1e-9);
}

TEST_CASE("bessel values match the integral-representation oracle", "[bessel]") {
    const double xs[] = {0.05, 0.5, 1.0, 2.4, 5.0, 9.3, 11.9, 12.0,
                         12.1, 15.0, 25.0, 60.0, 100.0, 350.0, 1000.0, 1e4};
    for (double x : xs) {
        for (int n = 0; n <= 2; ++n) {
            const double ref = bessel_oracle(n, x);
            CHECK(std::abs(bessel_j(n, x) - ref) < 2e-10);
        }
    }
}

TEST_CASE("bessel recurrence J0 + J2 = 2 J1 / x", "[bessel]") {
    for (int i = 0; i <= 60; ++i) {
        const double x = 0.1 * std::pow(1000.0, i / 60.0);  // log grid on [0.1, 100]
        const double lhs = bessel_j(0, x) + bessel_j(2, x);
        const double rhs = 2.0 * bessel_j(1, x) / x;
        CHECK(std::abs(lhs - rhs) < 1e-9);
    }
}

TEST_CASE("bessel domain errors", "[bessel]") {
    CHECK_THROWS_AS(bessel_j(3, 1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_j(-1, 1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_j(0, -0.5), std::domain_error);
    CHECK_THROWS_AS(bessel_j(0, std::nan("")), std::domain_error);
    CHECK_THROWS_AS(bessel_j(0, std::numeric_limits<double>::infinity()), std::domain_error);
}
