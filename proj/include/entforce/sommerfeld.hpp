#ifndef ENTFORCE_SOMMERFELD_HPP
#define ENTFORCE_SOMMERFELD_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "entforce/bessel.hpp"
#include "entforce/graphene.hpp"
#include "entforce/greens.hpp"
#include "entforce/quadrature.hpp"

// Reflected dyadic Green tensor above a graphene-coated substrate, evaluated
// as spectral integrals over the normalized in-plane wavevector q. The
// branch Im q_z >= 0 selects outgoing/decaying waves on both sides.

namespace entforce {

inline cplx fresnel_rs(cplx qz, cplx qzp, cplx alpha) {
    return (qz - qzp - 2.0 * alpha) / (qz + qzp + 2.0 * alpha);
}

inline cplx fresnel_rp(cplx qz, cplx qzp, cplx alpha, cplx eps) {
    return (eps * qz - qzp + 2.0 * qz * qzp * alpha) /
           (qzp + eps * qz + 2.0 * qz * qzp * alpha);
}

struct SommerfeldOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-13;
    double q_max_cap = 1e4;
    double q_max_override = 0.0;  // > 0 forces the truncation point (tail studies)
    std::size_t max_evaluations = 400000;
};

namespace detail {

inline cplx upper_sqrt(cplx v) {
    cplx w = std::sqrt(v);
    return w.imag() >= 0.0 ? w : -w;
}

inline cplx qz_vacuum(double q) { return upper_sqrt(cplx{1.0 - q * q, 0.0}); }

inline cplx qz_substrate(double q, cplx eps) { return upper_sqrt(eps - q * q); }

// Newton iteration on the r_p denominator, seeded with the large-q asymptote
// q_p = i(1+eps)/(2 alpha). Returns the root, or the seed if the iteration
// fails to settle (it is only used to place quadrature breakpoints).
inline cplx locate_plasmon_pole(cplx alpha, cplx eps) {
    cplx q = cplx{0.0, 1.0} * (1.0 + eps) / (2.0 * alpha);
    if (q.real() < 0.0) q = -q;
    for (int it = 0; it < 60; ++it) {
        const cplx qz = upper_sqrt(1.0 - q * q);
        const cplx qzp = upper_sqrt(eps - q * q);
        const cplx f = qzp + eps * qz + 2.0 * qz * qzp * alpha;
        const cplx dqz = -q / qz;
        const cplx dqzp = -q / qzp;
        const cplx df = dqzp + eps * dqz + 2.0 * alpha * (dqz * qzp + qz * dqzp);
        const cplx step = f / df;
        q -= step;
        if (std::abs(step) < 1e-13 * std::abs(q)) break;
    }
    return q;
}

// Integrates f(q) over [0, q_max] with the q = 1 branch point neutralized by
// the substitutions q = 1 -+ w^2 on a window of half-width delta around it,
// and with extra panel boundaries at the supplied interior breakpoints.
template <typename F>
QuadratureResult sommerfeld_panels(F& f, double q_max,
                                   const std::vector<double>& interior_breaks,
                                   double rel_tol, double abs_tol,
                                   std::size_t max_evals) {
    const double delta = 1e-3;
    QuadratureResult total;
    auto accumulate = [&](QuadratureResult r) {
        total.value += r.value;
        total.abs_error_estimate += r.abs_error_estimate;
        total.evaluations += r.evaluations;
    };

    std::vector<std::pair<double, double>> panels;
    if (q_max <= 1.0 - delta) {
        panels.push_back({0.0, q_max});
    } else {
        panels.push_back({0.0, 1.0 - delta});
    }
    const double per_panel_abs = abs_tol / (4.0 + interior_breaks.size());

    for (auto [a, b] : panels)
        accumulate(integrate_finite(f, a, b, rel_tol, per_panel_abs, max_evals));
    if (q_max <= 1.0 - delta) return total;

    const double wmax = std::sqrt(delta);
    auto below = [&f](double w) { return f(1.0 - w * w) * (2.0 * w); };
    accumulate(integrate_finite(below, 0.0, wmax, rel_tol, per_panel_abs, max_evals));
    auto above = [&f](double w) { return f(1.0 + w * w) * (2.0 * w); };
    accumulate(integrate_finite(above, 0.0, wmax, rel_tol, per_panel_abs, max_evals));

    std::vector<double> cuts{1.0 + delta};
    for (double b : interior_breaks)
        if (b > 1.0 + delta && b < q_max) cuts.push_back(b);
    cuts.push_back(q_max);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i])
            accumulate(integrate_finite(f, cuts[i], cuts[i + 1], rel_tol, per_panel_abs, max_evals));
    return total;
}

// Dimensionless reflected tensor: G_R = k * reflected_spectral(...), with
// beta = k r_perp, zeta = k (z1 + z2). rs/rp are callables of q.
template <typename Rs, typename Rp>
ComplexMatrix reflected_spectral(double beta, double zeta, double phi0,
                                 Rs&& rs, Rp&& rp,
                                 const std::vector<double>& interior_breaks,
                                 const SommerfeldOptions& opts) {
    const double c1 = std::cos(phi0), s1 = std::sin(phi0);
    const double c2 = std::cos(2.0 * phi0), s2 = std::sin(2.0 * phi0);
    const double q_max =
        opts.q_max_override > 0.0
            ? opts.q_max_override
            : std::min(std::sqrt(1.0 + (40.0 / zeta) * (40.0 / zeta)), opts.q_max_cap);

    auto integrate_component = [&](auto kern) {
        auto f = [&](double q) -> cplx {
            const cplx qz = qz_vacuum(q);
            return kern(q, qz) * std::exp(cplx{0.0, 1.0} * qz * zeta);
        };
        return sommerfeld_panels(f, q_max, interior_breaks, opts.rel_tol,
                                 opts.abs_tol, opts.max_evaluations)
            .value;
    };

    // s- and p-polarized kernels after the azimuth integral; J_n at beta*q
    auto sfac = [&rs](double q, cplx qz) { return q * rs(q) / qz; };
    auto pfac = [&rp](double q) { return -q * rp(q); };

    const cplx gxx = integrate_component([&](double q, cplx qz) {
        const double j0 = bessel_j(0, beta * q), j2 = bessel_j(2, beta * q);
        return sfac(q, qz) * (j0 + j2 * c2) + pfac(q) * qz * (j0 - j2 * c2);
    });
    const cplx gyy = integrate_component([&](double q, cplx qz) {
        const double j0 = bessel_j(0, beta * q), j2 = bessel_j(2, beta * q);
        return sfac(q, qz) * (j0 - j2 * c2) + pfac(q) * qz * (j0 + j2 * c2);
    });
    const cplx gzz = integrate_component([&](double q, cplx qz) {
        const double j0 = bessel_j(0, beta * q);
        return pfac(q) * (-2.0 * j0 * q * q / qz);
    });
    cplx gxy{0.0, 0.0}, gxz{0.0, 0.0}, gyz{0.0, 0.0};
    if (std::abs(s2) > 0.0)
        gxy = integrate_component([&](double q, cplx qz) {
            const double j2 = bessel_j(2, beta * q);
            return sfac(q, qz) * j2 * s2 - pfac(q) * qz * j2 * s2;
        });
    if (std::abs(c1) > 0.0)
        gxz = integrate_component([&](double q, cplx qz) {
            (void)qz;
            const double j1 = bessel_j(1, beta * q);
            return pfac(q) * cplx{0.0, 2.0} * q * j1 * c1;
        });
    if (std::abs(s1) > 0.0)
        gyz = integrate_component([&](double q, cplx qz) {
            (void)qz;
            const double j1 = bessel_j(1, beta * q);
            return pfac(q) * cplx{0.0, 2.0} * q * j1 * s1;
        });

    const cplx pre{0.0, 1.0 / (8.0 * M_PI)};
    ComplexMatrix g(3, 3);
    g(0, 0) = pre * gxx;
    g(1, 1) = pre * gyy;
    g(2, 2) = pre * gzz;
    g(0, 1) = pre * gxy;
    g(1, 0) = pre * gxy;
    g(0, 2) = pre * gxz;
    g(2, 0) = -pre * gxz;
    g(1, 2) = pre * gyz;
    g(2, 1) = -pre * gyz;
    return g;
}

} // namespace detail

// Full Green sample above the interface: closed-form free part plus the
// spectral reflected part with graphene Fresnel coefficients.
inline GreenSample reflected_green(const Geometry& geom, double omega,
                                   const GrapheneModel& model,
                                   const SommerfeldOptions& opts = SommerfeldOptions{}) {
    if (!(geom.z0 > 0.0))
        throw std::domain_error("reflected_green: atoms must sit above the interface (z0 > 0)");
    if (!(omega > 0.0))
        throw std::domain_error("reflected_green: omega must be positive");
    if (!(geom.r > 0.0))
        throw std::domain_error("reflected_green: separation must be positive");

    const double k = omega / constants::c_light;
    const double beta = k * geom.r;
    const double zeta = 2.0 * k * geom.z0;
    const cplx alpha = sheet_alpha(model, omega);
    const cplx eps = model.substrate_permittivity;

    std::vector<double> breaks;
    const double sqrt_re_eps = std::sqrt(std::max(eps.real(), 0.0));
    if (sqrt_re_eps > 1.0) breaks.push_back(sqrt_re_eps);
    cplx pole{0.0, 0.0};
    bool have_pole = false;
    if (std::abs(alpha) > 1e-14) {
        pole = detail::locate_plasmon_pole(alpha, eps);
        if (std::isfinite(pole.real()) && pole.real() > 1.0) {
            have_pole = true;
            const double w = std::max(std::abs(pole.imag()), 1e-6 * pole.real());
            for (double m : {-20.0, -5.0, 0.0, 5.0, 20.0})
                breaks.push_back(pole.real() + m * w);
        }
    }

    auto rs = [&](double q) {
        return fresnel_rs(detail::qz_vacuum(q), detail::qz_substrate(q, eps), alpha);
    };
    auto rp = [&](double q) {
        return fresnel_rp(detail::qz_vacuum(q), detail::qz_substrate(q, eps), alpha, eps);
    };

    GreenSample s = free_space_green(geom, omega);
    try {
        s.reflected_part =
            k * detail::reflected_spectral(beta, zeta, geom.phi0, rs, rp, breaks, opts);
    } catch (const ConvergenceError& e) {
        std::string msg = std::string("reflected_green: ") + e.what();
        if (have_pole)
            msg += " (plasmon pole near q = " + std::to_string(pole.real()) + " + " +
                   std::to_string(pole.imag()) + "i)";
        throw ConvergenceError(msg, e.partial);
    }
    s.tensor = s.free_part + s.reflected_part;
    return s;
}

} // namespace entforce

#endif
