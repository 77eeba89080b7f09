#ifndef ENTFORCE_GRAPHENE_HPP
#define ENTFORCE_GRAPHENE_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "entforce/constants.hpp"
#include "entforce/quadrature.hpp"

// Kubo optical conductivity of a graphene sheet (intra-band Drude part plus
// inter-band transitions) and the dimensionless sheet response
// alpha = 2 pi sigma / (eps0 c) entering the Fresnel coefficients.

namespace entforce {

struct GrapheneModel {
    double fermi_energy = 1.0;       // eV
    double relaxation_time = 1e-13;  // seconds (Drude)
    double temperature = 0.0;        // kelvin; 0 selects the closed forms
    cplx substrate_permittivity{2.5, 0.0};
    bool sheet = true;               // false: bare substrate (sigma = 0)
};

namespace detail {

// H(x) = sinh(x/kT) / (cosh(EF/kT) + cosh(x/kT)) evaluated without overflow:
// multiply through by e^{-x/kT} once the arguments get large.
inline double graphene_h(double x, double ef, double kt) {
    const double a = x / kt;
    const double b = ef / kt;
    if (a < 30.0 && b < 30.0)
        return std::sinh(a) / (std::cosh(b) + std::cosh(a));
    const double num = 1.0 - std::exp(-2.0 * a);
    const double den = std::exp(b - a) + std::exp(-b - a) + 1.0 + std::exp(-2.0 * a);
    return num / den;
}

} // namespace detail

inline cplx graphene_conductivity(const GrapheneModel& model, double omega) {
    if (!(omega > 0.0))
        throw std::domain_error("graphene_conductivity: omega must be positive");
    if (!model.sheet) return cplx{0.0, 0.0};
    if (!(model.fermi_energy > 0.0) || !(model.relaxation_time > 0.0))
        throw std::domain_error("graphene_conductivity: fermi_energy and relaxation_time must be positive");

    const double e = constants::elementary_charge;
    const double hbar = constants::hbar;
    const double ef = model.fermi_energy * constants::ev;  // joules
    const double hw = hbar * omega;
    const cplx drude_pole = cplx{omega, 1.0 / model.relaxation_time};

    if (model.temperature <= 0.0) {
        const cplx intra = (e * e / (M_PI * hbar)) * cplx{0.0, 1.0} * (ef / hbar) / drude_pole;
        if (std::abs(hw - 2.0 * ef) <= 1e-9 * (hw + 2.0 * ef))
            throw std::domain_error(
                "graphene_conductivity: hbar*omega = 2*E_F hits the T=0 logarithmic "
                "singularity; add temperature or detune");
        const double step = hw > 2.0 * ef ? 1.0 : 0.0;
        const double lg = std::log(std::abs((hw - 2.0 * ef) / (hw + 2.0 * ef)));
        const cplx inter = (e * e / (4.0 * hbar)) * (cplx{step, 0.0} + cplx{0.0, lg / M_PI});
        return intra + inter;
    }

    const double kt = constants::k_boltzmann * model.temperature;
    // log(2 cosh(EF/2kT)) written overflow-safely as EF/2kT + log(1 + e^{-EF/kT})
    const double logterm = 0.5 * ef / kt + std::log1p(std::exp(-ef / kt));
    const cplx intra = (2.0 * e * e * kt / (M_PI * hbar * hbar)) * cplx{0.0, 1.0} / drude_pole * logterm;

    const double h_half = detail::graphene_h(0.5 * hw, ef, kt);
    // Inter-band dispersion integral, substituted x = (hw/2) s so the
    // quadrature sees O(1) scales:
    //   int_0^inf dx (H(x) - H(hw/2)) / (hw^2 - 4 x^2)
    //     = (1 / 2 hw) int_0^inf ds (H(hw s / 2) - H(hw/2)) / (1 - s^2).
    // The point s = 1 is removable after the subtraction; near it the direct
    // quotient cancels catastrophically, so switch to the first-order form
    // -(hw/2) H'(midpoint) / (2 + u) with u = s - 1.
    auto integrand = [&](double s) {
        const double u = s - 1.0;
        if (std::abs(u) < 1e-4) {
            const double xm = 0.5 * hw * (1.0 + 0.5 * u);
            const double dx = 1e-6 * hw;
            const double hp = (detail::graphene_h(xm + dx, ef, kt) -
                               detail::graphene_h(xm - dx, ef, kt)) / (2.0 * dx);
            return cplx{-0.5 * hw * hp / (2.0 + u), 0.0};
        }
        return cplx{(detail::graphene_h(0.5 * hw * s, ef, kt) - h_half) / (1.0 - s * s), 0.0};
    };
    auto tail = integrate_adaptive(integrand, 0.0, std::numeric_limits<double>::infinity(),
                                   1e-9, 1e-14);
    const cplx inter = (e * e / (4.0 * hbar)) *
                       (cplx{h_half, 0.0} + cplx{0.0, 2.0 / M_PI} * tail.value);
    return intra + inter;
}

// Dimensionless sheet coupling entering r_s and r_p.
inline cplx sheet_alpha(const GrapheneModel& model, double omega) {
    return 2.0 * M_PI * graphene_conductivity(model, omega) /
           (constants::eps0 * constants::c_light);
}

} // namespace entforce

#endif
