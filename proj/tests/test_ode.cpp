#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "entforce/ode.hpp"

using namespace entforce;

namespace {

ComplexMatrix col(std::initializer_list<cplx> vals) {
    ComplexMatrix m(vals.size(), 1);
    std::size_t i = 0;
    for (cplx v : vals) m(i++, 0) = v;
    return m;
}

} // namespace

TEST_CASE("exponential decay reaches e^{-1}", "[ode]") {
    auto rhs = [](double, const ComplexMatrix& y) { return (-1.0) * y; };
    auto sol = integrate_ode(rhs, col({cplx{1.0, 0.0}}), 0.0, 1.0);
    CHECK(std::abs(sol.states.back()(0, 0).real() - std::exp(-1.0)) < 1e-8);
    CHECK(sol.times.back() == 1.0);
    CHECK(sol.times.front() == 0.0);
}

TEST_CASE("harmonic oscillator keeps its norm over a hundred cycles", "[ode]") {
    auto rhs = [](double, const ComplexMatrix& y) {
        ComplexMatrix dy(2, 1);
        dy(0, 0) = y(1, 0);
        dy(1, 0) = -y(0, 0);
        return dy;
    };
    OdeOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-14;
    auto sol = integrate_ode(rhs, col({cplx{1.0, 0.0}, cplx{0.0, 0.0}}),
                             0.0, 200.0 * M_PI, {}, opts);
    double norm2 = std::norm(sol.states.back()(0, 0)) + std::norm(sol.states.back()(1, 0));
    CHECK(std::abs(norm2 - 1.0) < 1e-8);
}

TEST_CASE("detuned Rabi oscillation matches the closed form", "[ode]") {
    // two-level amplitudes with drive Omega = 1.3 and detuning Delta = 0.7:
    //   i cg' = (Omega/2) ce,  i ce' = (Omega/2) cg + Delta ce
    // gives P_e(t) = (Omega^2 / Omega_R^2) sin^2(Omega_R t / 2), Omega_R^2 = Omega^2 + Delta^2
    const double Omega = 1.3, Delta = 0.7;
    const double OmegaR = std::sqrt(Omega * Omega + Delta * Delta);
    auto rhs = [&](double, const ComplexMatrix& y) {
        ComplexMatrix dy(2, 1);
        dy(0, 0) = cplx{0.0, -0.5 * Omega} * y(1, 0);
        dy(1, 0) = cplx{0.0, -0.5 * Omega} * y(0, 0) + cplx{0.0, -Delta} * y(1, 0);
        return dy;
    };
    std::vector<double> samples;
    for (int k = 1; k <= 40; ++k) samples.push_back(0.25 * k);
    auto sol = integrate_ode(rhs, col({cplx{1.0, 0.0}, cplx{0.0, 0.0}}), 0.0, 10.0, samples);
    REQUIRE(sol.times.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double t = samples[i];
        const double pe = std::norm(sol.states[i](1, 0));
        const double ref = (Omega * Omega / (OmegaR * OmegaR))
                           * std::pow(std::sin(0.5 * OmegaR * t), 2);
        CHECK(std::abs(pe - ref) < 1e-6);
    }
}

TEST_CASE("dense output interpolates between accepted steps", "[ode]") {
    auto rhs = [](double t, const ComplexMatrix&) {
        ComplexMatrix dy(1, 1);
        dy(0, 0) = cplx{std::cos(t), 0.0};
        return dy;
    };
    std::vector<double> samples{0.1, 0.37, 1.234, 2.999, 4.5};
    auto sol = integrate_ode(rhs, col({cplx{0.0, 0.0}}), 0.0, 5.0, samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        // the interpolant is one order below the step solution, so allow ~10x tolerance
        CHECK(std::abs(sol.states[i](0, 0).real() - std::sin(samples[i])) < 1e-7);
    }
}

TEST_CASE("trace of a randomly generated closed system is conserved", "[ode]") {
    // rho' = -i [H, rho] conserves tr(rho); H is a fixed 4x4 hermitian matrix
    // generated from a small xorshift stream so the test is stable.
    const std::size_t d = 4;
    ComplexMatrix H(d, d);
    unsigned long long s = 88172645463325252ull;
    auto rng = [&]() {
        s ^= s << 13; s ^= s >> 7; s ^= s << 17;
        return double(s % 1000003) / 1000003.0 - 0.5;
    };
    for (std::size_t i = 0; i < d; ++i) {
        H(i, i) = cplx{rng(), 0.0};
        for (std::size_t j = i + 1; j < d; ++j) {
            cplx v{rng(), rng()};
            H(i, j) = v;
            H(j, i) = std::conj(v);
        }
    }
    auto rhs = [&](double, const ComplexMatrix& y) {
        return cplx{0.0, -1.0} * (H * y - y * H);
    };
    ComplexMatrix rho0(d, d);
    rho0(0, 0) = cplx{0.4, 0.0};
    rho0(1, 1) = cplx{0.6, 0.0};
    rho0(0, 1) = cplx{0.2, 0.1};
    rho0(1, 0) = cplx{0.2, -0.1};
    auto sol = integrate_ode(rhs, rho0, 0.0, 25.0);
    CHECK(std::abs(sol.states.back().trace() - cplx{1.0, 0.0}) < 1e-9);
}

TEST_CASE("finite-time blowup raises a stiffness error", "[ode]") {
    auto rhs = [](double, const ComplexMatrix& y) {
        ComplexMatrix dy(1, 1);
        dy(0, 0) = y(0, 0) * y(0, 0);
        return dy;
    };
    bool thrown = false;
    try {
        integrate_ode(rhs, col({cplx{1.0, 0.0}}), 0.0, 2.0);
    } catch (const StiffnessError& e) {
        thrown = true;
        CHECK(e.time > 0.9);
        CHECK(e.time < 1.1);
    }
    CHECK(thrown);
}

TEST_CASE("degenerate spans and bad sample grids are rejected", "[ode]") {
    auto rhs = [](double, const ComplexMatrix& y) { return y; };
    ComplexMatrix y0 = col({cplx{1.0, 0.0}});
    CHECK_THROWS_AS(integrate_ode(rhs, y0, 0.0, 1.0, {0.5, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(integrate_ode(rhs, y0, 0.0, 1.0, {0.7, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(integrate_ode(rhs, y0, 1.0, 1.0), std::invalid_argument);
}
