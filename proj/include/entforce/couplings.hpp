#ifndef ENTFORCE_COUPLINGS_HPP
#define ENTFORCE_COUPLINGS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "entforce/complex_matrix.hpp"
#include "entforce/constants.hpp"
#include "entforce/greens.hpp"
#include "entforce/quadrature.hpp"
#include "entforce/sommerfeld.hpp"

// Coupling constants between two identical two-level atoms: spontaneous and
// cooperative decay rates, the coherent dipole-dipole shift, the force matrix
// element driving entangled states, and the ground-state van der Waals
// potential/force. Everything funnels through the Green tensor.

namespace entforce {

// Atom pair: transition frequency omega0 (rad/s), dipole magnitude d0 (C m),
// and the dipole direction (cos theta, 0, sin theta) in the xz-plane, so
// theta = 0 points along the separation axis and theta = pi/2 normal to it
// (and to the interface when one is present).
struct DipolePairConfig {
    double omega0 = 0.0;
    double d0 = 0.0;
    double theta = 0.0;
    Geometry geometry{};
    std::optional<GrapheneModel> graphene{};  // empty means vacuum
};

struct CouplingSet {
    double gamma0 = 0.0;         // 1/s
    double gamma12 = 0.0;        // 1/s
    double delta12 = 0.0;        // rad/s
    double force_element = 0.0;  // newtons, F_{eg,ge}(r)
    Geometry geometry{};
    bool graphene_environment = false;
};

// 4x4 force operator over the basis {gg, eg, ge, ee}: the off-diagonal
// block couples |eg> and |ge>, so its eigenvectors are (|eg> +- |ge>)/sqrt2
// with eigenvalues +-force_element.
struct ForceOperator {
    ComplexMatrix matrix{4, 4};
};

// gamma0 = omega0^3 d0^2 / (3 pi hbar eps0 c^3); for the Rb D1 line
// (omega0 = 2 pi 3.77e14, d0 = 2.54e-29) this is 2 pi 5.75e6 1/s.
inline double spontaneous_decay_rate(double omega0, double d0) {
    if (!(omega0 > 0.0))
        throw std::domain_error("spontaneous_decay_rate: omega0 must be positive");
    if (d0 < 0.0)
        throw std::domain_error("spontaneous_decay_rate: d0 must be nonnegative");
    const double c3 = constants::c_light * constants::c_light * constants::c_light;
    return omega0 * omega0 * omega0 * d0 * d0 /
           (3.0 * M_PI * constants::hbar * constants::eps0 * c3);
}

inline double impulse_force_estimate(double omega0, double tau_f) {
    if (!(omega0 > 0.0) || !(tau_f > 0.0))
        throw std::domain_error("impulse_force_estimate: omega0 and tau_f must be positive");
    return constants::hbar * omega0 / (constants::c_light * tau_f);
}

namespace detail {

// Closed forms at x = k0 r, in units of gamma0 (rates/shifts) and
// hbar gamma0 k0 (force elements). The force brackets are the exact
// r-derivatives of the shift brackets, F = -d(hbar delta)/dr.
struct FreeSpaceBrackets {
    double gamma_par, gamma_perp;
    double delta_par, delta_perp;
    double force_par, force_perp;
};

inline FreeSpaceBrackets free_space_brackets(double x) {
    const double s = std::sin(x), c = std::cos(x);
    const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
    FreeSpaceBrackets b;
    b.gamma_par = 3.0 * (s / x3 - c / x2);
    b.gamma_perp = 1.5 * (-s / x3 + c / x2 + s / x);
    b.delta_par = -1.5 * (c / x3 + s / x2);
    b.delta_perp = 0.75 * (c / x3 + s / x2 - c / x);
    b.force_par = 1.5 * (c / x2 - 3.0 * s / x3 - 3.0 * c / x4);
    b.force_perp = 0.75 * (3.0 * c / x4 + 3.0 * s / x3 - 2.0 * c / x2 - s / x);
    return b;
}

inline double polarization_mix(double theta, double par, double perp) {
    const double ct = std::cos(theta), st = std::sin(theta);
    return ct * ct * par + st * st * perp;
}

inline GreenSample green_for(const DipolePairConfig& cfg, double r) {
    Geometry g = cfg.geometry;
    g.r = r;
    if (cfg.graphene)
        return reflected_green(g, cfg.omega0, *cfg.graphene);
    return free_space_green(g, cfg.omega0);
}

// mu . M . mu for mu = (cos theta, 0, sin theta); the antisymmetric xz part
// of a reflected tensor drops out of this quadratic form.
inline cplx dipole_projection(double theta, const ComplexMatrix& g) {
    const double ct = std::cos(theta), st = std::sin(theta);
    return ct * ct * g(0, 0) + st * st * g(2, 2) + ct * st * (g(0, 2) + g(2, 0));
}

inline void validate_pair(const DipolePairConfig& cfg, const char* who) {
    if (!(cfg.omega0 > 0.0) || !(cfg.d0 > 0.0))
        throw std::domain_error(std::string(who) + ": omega0 and d0 must be positive");
    if (!(cfg.theta >= 0.0) || !(cfg.theta <= M_PI / 2.0 + 1e-12))
        throw std::domain_error(std::string(who) + ": theta must lie in [0, pi/2]");
    if (!(cfg.geometry.r > 0.0))
        throw std::domain_error(std::string(who) + ": separation must be positive");
}

} // namespace detail

// Vacuum couplings from the closed forms, mixed by polarization angle:
// X(theta) = cos^2(theta) X_par + sin^2(theta) X_perp.
inline CouplingSet couplings_free_space(const DipolePairConfig& cfg) {
    detail::validate_pair(cfg, "couplings_free_space");
    if (cfg.graphene)
        throw std::invalid_argument(
            "couplings_free_space: config carries a graphene environment; "
            "use couplings_from_green");

    const double gamma0 = spontaneous_decay_rate(cfg.omega0, cfg.d0);
    const double k0 = cfg.omega0 / constants::c_light;
    const auto b = detail::free_space_brackets(k0 * cfg.geometry.r);

    CouplingSet set;
    set.gamma0 = gamma0;
    set.gamma12 = gamma0 * detail::polarization_mix(cfg.theta, b.gamma_par, b.gamma_perp);
    set.delta12 = gamma0 * detail::polarization_mix(cfg.theta, b.delta_par, b.delta_perp);
    set.force_element = constants::hbar * gamma0 * k0 *
                        detail::polarization_mix(cfg.theta, b.force_par, b.force_perp);
    set.geometry = cfg.geometry;
    return set;
}

// Generic environment: project the supplied Green sample,
//   gamma12 = (2 omega0^2 / hbar eps0 c^2) mu . Im G . mu,
//   delta12 = -(omega0^2 / hbar eps0 c^2) mu . Re G . mu,
// and differentiate delta12 over r (Richardson-extrapolated central
// differences, step r 1e-4) for the force element.
inline CouplingSet couplings_from_green(const DipolePairConfig& cfg, const GreenSample& g) {
    detail::validate_pair(cfg, "couplings_from_green");

    const double c2 = constants::c_light * constants::c_light;
    const double rate_pref = 2.0 * cfg.omega0 * cfg.omega0 * cfg.d0 * cfg.d0 /
                             (constants::hbar * constants::eps0 * c2);
    auto delta_of = [&](const GreenSample& sample) {
        return -0.5 * rate_pref * detail::dipole_projection(cfg.theta, sample.tensor).real();
    };

    CouplingSet set;
    set.gamma0 = spontaneous_decay_rate(cfg.omega0, cfg.d0);
    set.gamma12 = rate_pref * detail::dipole_projection(cfg.theta, g.tensor).imag();
    set.delta12 = delta_of(g);

    const double r = cfg.geometry.r;
    const double h = r * 1e-4;
    auto delta_at = [&](double rr) { return delta_of(detail::green_for(cfg, rr)); };
    const double d1 = (delta_at(r + h) - delta_at(r - h)) / (2.0 * h);
    const double d2 = (delta_at(r + 0.5 * h) - delta_at(r - 0.5 * h)) / h;
    set.force_element = -constants::hbar * (4.0 * d2 - d1) / 3.0;

    set.geometry = cfg.geometry;
    set.graphene_environment = cfg.graphene.has_value();
    return set;
}

inline CouplingSet couplings_from_green(const DipolePairConfig& cfg) {
    detail::validate_pair(cfg, "couplings_from_green");
    return couplings_from_green(cfg, detail::green_for(cfg, cfg.geometry.r));
}

// vdw_force_gg, when supplied, sits on the ground-ground diagonal so the same
// operator can report both the entangled-state and ground-state forces.
inline ForceOperator force_operator(const CouplingSet& set, double vdw_force_gg = 0.0) {
    ForceOperator op;
    op.matrix(1, 2) = set.force_element;
    op.matrix(2, 1) = set.force_element;
    op.matrix(0, 0) = vdw_force_gg;
    return op;
}

namespace detail {

// Shared factors of the ground-state dispersion integrand at u = omega0 s:
// B = c^2/(2 pi u^2 r^3) and v = u r / c. The s^4 Jacobian weight exactly
// cancels the 1/s^4 in B^2, so the integrand is O(1) near s = 0.
struct VdwIntegrandScales {
    double weight;  // s^4/(1+s^2)^2 B^2 e^{-2v}, without the bracket
    double v;
};

inline VdwIntegrandScales vdw_scales(double s, double k0r, double omega0, double r) {
    VdwIntegrandScales out;
    out.v = k0r * s;
    const double c2 = constants::c_light * constants::c_light;
    const double b_times_s2 = c2 / (2.0 * M_PI * omega0 * omega0 * r * r * r);
    const double w = 1.0 / (1.0 + s * s);
    out.weight = w * w * b_times_s2 * b_times_s2 * std::exp(-2.0 * out.v);
    return out;
}

inline double vdw_prefactor(const DipolePairConfig& cfg) {
    const double mu0sq = constants::mu0 * constants::mu0;
    const double d4 = cfg.d0 * cfg.d0 * cfg.d0 * cfg.d0;
    return 2.0 * mu0sq * d4 * cfg.omega0 * cfg.omega0 * cfg.omega0 /
           (9.0 * constants::hbar * M_PI);
}

} // namespace detail

// Ground-state dispersion potential
//   U(r) = -(2 mu0^2 d0^4 / 9 hbar pi)
//          int_0^inf du [omega0^2 u^4/(omega0^2+u^2)^2] Tr[G(iu) G(iu)],
// evaluated after substituting u = omega0 s so the quadrature sees O(1)
// structure for every separation.
inline double vdw_potential(const DipolePairConfig& cfg) {
    detail::validate_pair(cfg, "vdw_potential");
    if (cfg.graphene)
        throw std::invalid_argument("vdw_potential: only the vacuum environment is supported");

    auto integrand = [&](double s) -> cplx {
        const GreenSample g = imaginary_freq_green(cfg.geometry, cfg.omega0 * s);
        const cplx trace_gg = (g.tensor * g.tensor).trace();
        const double w = 1.0 / (1.0 + s * s);
        return s * s * s * s * w * w * trace_gg;
    };
    auto result = integrate_adaptive(integrand, 0.0, std::numeric_limits<double>::infinity(),
                                     1e-10, 1e-300);
    return -detail::vdw_prefactor(cfg) * result.value.real();
}

// F = -dU/dr with the derivative taken under the integral sign; the closed
// forms give d Tr[G^2]/dr = -(B^2/r) e^{-2v} [2(1+v)(3+3v+v^2)
// + (1+v+v^2)(3+3v+2v^2+v^3)], strictly negative, so F < 0 (attractive).
inline double vdw_force(const DipolePairConfig& cfg) {
    detail::validate_pair(cfg, "vdw_force");
    if (cfg.graphene)
        throw std::invalid_argument("vdw_force: only the vacuum environment is supported");

    const double r = cfg.geometry.r;
    const double k0r = cfg.omega0 * r / constants::c_light;
    auto integrand = [&](double s) -> cplx {
        const auto sc = detail::vdw_scales(s, k0r, cfg.omega0, r);
        const double v = sc.v;
        const double bracket = 2.0 * (1.0 + v) * (3.0 + 3.0 * v + v * v) +
                               (1.0 + v + v * v) * (3.0 + 3.0 * v + 2.0 * v * v + v * v * v);
        return cplx{-sc.weight * bracket / r, 0.0};
    };
    auto result = integrate_adaptive(integrand, 0.0, std::numeric_limits<double>::infinity(),
                                     1e-10, 1e-300);
    return detail::vdw_prefactor(cfg) * result.value.real();
}

} // namespace entforce

#endif
