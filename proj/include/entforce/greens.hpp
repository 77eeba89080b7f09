#ifndef ENTFORCE_GREENS_HPP
#define ENTFORCE_GREENS_HPP

#include <cmath>
#include <complex>
#include <stdexcept>

#include "entforce/complex_matrix.hpp"
#include "entforce/constants.hpp"

// Free-space dyadic Green tensor between two atoms, in closed form at real
// frequency and on the positive imaginary axis. Units: the tensor carries
// 1/m, positions are meters, frequencies rad/s.

namespace entforce {

// Two atoms separated by r along the in-plane direction set by phi0
// (phi0 = 0 puts the displacement on the x-axis), both at height z0 above
// the interface when one is present. z0 = 0 means free space.
struct Geometry {
    double r = 0.0;
    double z0 = 0.0;
    double phi0 = 0.0;
};

struct GreenSample {
    cplx frequency{0.0, 0.0};
    ComplexMatrix tensor{3, 3};
    ComplexMatrix free_part{3, 3};
    ComplexMatrix reflected_part{3, 3};
};

namespace detail {

// Closed dyadic at arbitrary displacement: G0 = e^{ikR}/(4 pi R) (A I + B e e)
// with A = 1 + i/kR - 1/(kR)^2 and B = -1 - 3i/kR + 3/(kR)^2. Accepts any
// nonzero real k so conjugation/reciprocity properties can be probed directly.
inline ComplexMatrix free_dyadic(double dx, double dy, double dz, double k) {
    const double R = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (R <= 0.0)
        throw std::domain_error("free_dyadic: coincident points");
    const double kR = k * R;
    const cplx a = cplx{1.0, 0.0} + cplx{0.0, 1.0} / kR - cplx{1.0, 0.0} / (kR * kR);
    const cplx b = cplx{-1.0, 0.0} - cplx{0.0, 3.0} / kR + cplx{3.0, 0.0} / (kR * kR);
    const cplx pre = std::exp(cplx{0.0, kR}) / (4.0 * M_PI * R);
    const double e[3] = {dx / R, dy / R, dz / R};
    ComplexMatrix g(3, 3);
    for (int i = 0; i < 3; ++i) {
        g(i, i) = pre * a;
        for (int j = 0; j < 3; ++j) g(i, j) += pre * b * e[i] * e[j];
    }
    return g;
}

} // namespace detail

// Diagonal free-space tensor for displacement r along the in-plane axis:
// the axial component G_par = (c^2 / 2 pi w^2 r^3)(1 - i w r/c) e^{i w r/c}
// and the two transverse components
// G_perp = -(c^2 / 4 pi w^2 r^3)(1 - i w r/c - (w r/c)^2) e^{i w r/c}.
inline GreenSample free_space_green(const Geometry& geom, double omega) {
    if (!(omega > 0.0))
        throw std::domain_error("free_space_green: omega must be positive");
    if (geom.r == 0.0)
        throw std::domain_error(
            "free_space_green: coincident atoms; the real part diverges "
            "(coincidence_im_green gives the finite imaginary part)");
    if (!(geom.r > 0.0))
        throw std::domain_error("free_space_green: separation must be positive");

    const double r = geom.r;
    const double x = omega * r / constants::c_light;
    const double pref = constants::c_light * constants::c_light / (omega * omega * r * r * r);
    const cplx phase = std::exp(cplx{0.0, x});
    const cplx gpar = pref / (2.0 * M_PI) * (cplx{1.0, 0.0} - cplx{0.0, x}) * phase;
    const cplx gperp = -pref / (4.0 * M_PI) *
                       (cplx{1.0 - x * x, 0.0} - cplx{0.0, x}) * phase;

    GreenSample s;
    s.frequency = cplx{omega, 0.0};
    const double cp = std::cos(geom.phi0), sp = std::sin(geom.phi0);
    // displacement direction (cos phi0, sin phi0, 0); rotate the diagonal form
    s.free_part(0, 0) = gpar * (cp * cp) + gperp * (sp * sp);
    s.free_part(1, 1) = gpar * (sp * sp) + gperp * (cp * cp);
    s.free_part(0, 1) = (gpar - gperp) * cp * sp;
    s.free_part(1, 0) = s.free_part(0, 1);
    s.free_part(2, 2) = gperp;
    s.tensor = s.free_part;
    return s;
}

// Imaginary part of the one-point tensor's diagonal: finite even though the
// real part diverges at coincidence. Sets the spontaneous decay rate.
inline double coincidence_im_green(double omega) {
    if (!(omega > 0.0))
        throw std::domain_error("coincidence_im_green: omega must be positive");
    return omega / (6.0 * M_PI * constants::c_light);
}

// Free-space tensor continued to omega = iu (u > 0): the phase turns into the
// decaying exponential e^{-ur/c} and every component is real.
inline GreenSample imaginary_freq_green(const Geometry& geom, double u) {
    if (!(u > 0.0))
        throw std::domain_error("imaginary_freq_green: u must be positive");
    if (!(geom.r > 0.0))
        throw std::domain_error("imaginary_freq_green: separation must be positive");

    const double r = geom.r;
    const double v = u * r / constants::c_light;
    const double pref = constants::c_light * constants::c_light / (u * u * r * r * r);
    const double damp = std::exp(-v);
    const double gpar = -pref / (2.0 * M_PI) * (1.0 + v) * damp;
    const double gperp = pref / (4.0 * M_PI) * (1.0 + v + v * v) * damp;

    GreenSample s;
    s.frequency = cplx{0.0, u};
    const double cp = std::cos(geom.phi0), sp = std::sin(geom.phi0);
    s.free_part(0, 0) = gpar * (cp * cp) + gperp * (sp * sp);
    s.free_part(1, 1) = gpar * (sp * sp) + gperp * (cp * cp);
    s.free_part(0, 1) = (gpar - gperp) * cp * sp;
    s.free_part(1, 0) = s.free_part(0, 1);
    s.free_part(2, 2) = gperp;
    s.tensor = s.free_part;
    return s;
}

} // namespace entforce

#endif
