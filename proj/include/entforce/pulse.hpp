#ifndef ENTFORCE_PULSE_HPP
#define ENTFORCE_PULSE_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

// Gaussian light pulses driving the atom pair. A Fock pulse carries a
// definite photon number with a normalized temporal envelope xi(t); a
// coherent pulse is a classical drive whose amplitude scales with the square
// root of the mean photon number. The efficiencies eta_j quantify how well
// the pulse mode overlaps the emission pattern of atom j.

namespace entforce {

using cplx = std::complex<double>;

enum class PulseKind { fock, coherent };

struct PulseSpec {
    PulseKind kind = PulseKind::fock;
    int photon_count = 1;             // Fock pulses: photon number n >= 1
    double mean_photon_number = 1.0;  // coherent pulses: <n> > 0
    double tau_f = 0.0;               // pulse length tau_f, seconds
    double carrier = 0.0;             // carrier frequency, rad/s; 0 = resonant
    double t1 = 0.0;                  // pulse-peak arrival time at atom 1, s
    double t2 = 0.0;                  // pulse-peak arrival time at atom 2, s
    double eta1 = std::numbers::sqrt2 / 2.0;  // coupling efficiency, atom 1
    double eta2 = std::numbers::sqrt2 / 2.0;  // coupling efficiency, atom 2
};

// Normalized Gaussian wave packet
//   xi(t) = (2 pi tau_f^2)^{-1/4} exp(-t^2 / 4 tau_f^2) exp(-i carrier t),
// integral |xi|^2 dt = 1. Its Fourier magnitude (unitary convention) is
// (2 tau_f^2 / pi)^{1/4} exp(-tau_f^2 (w - carrier)^2).
inline cplx gaussian_wavepacket(double tau_f, double carrier, double t) {
    if (!(tau_f > 0.0))
        throw std::domain_error("gaussian_wavepacket: tau_f must be positive");
    const double amp = std::pow(2.0 * std::numbers::pi * tau_f * tau_f, -0.25) *
                       std::exp(-t * t / (4.0 * tau_f * tau_f));
    return amp * std::exp(cplx{0.0, -carrier * t});
}

// Real envelope |xi(t)| of the wave packet above.
inline double gaussian_envelope(double tau_f, double t) {
    if (!(tau_f > 0.0))
        throw std::domain_error("gaussian_envelope: tau_f must be positive");
    return std::pow(2.0 * std::numbers::pi * tau_f * tau_f, -0.25) *
           std::exp(-t * t / (4.0 * tau_f * tau_f));
}

inline void validate_pulse(const PulseSpec& pulse) {
    if (!(pulse.tau_f > 0.0))
        throw std::invalid_argument("PulseSpec: tau_f must be positive");
    if (pulse.kind == PulseKind::fock && pulse.photon_count < 1)
        throw std::invalid_argument("PulseSpec: Fock photon_count must be >= 1");
    if (pulse.kind == PulseKind::coherent && !(pulse.mean_photon_number > 0.0))
        throw std::invalid_argument("PulseSpec: coherent mean_photon_number must be positive");
    if (!(pulse.eta1 >= 0.0 && pulse.eta1 <= 1.0) || !(pulse.eta2 >= 0.0 && pulse.eta2 <= 1.0))
        throw std::invalid_argument("PulseSpec: efficiencies eta1, eta2 must lie in [0, 1]");
    if (!std::isfinite(pulse.t1) || !std::isfinite(pulse.t2))
        throw std::invalid_argument("PulseSpec: arrival times must be finite");
    if (pulse.carrier < 0.0)
        throw std::invalid_argument("PulseSpec: carrier frequency must be non-negative");
}

// Soft checks: conditions the models tolerate but that usually indicate a
// misconfigured experiment. eta1^2 + eta2^2 > 1 means the two collection
// channels together capture more than the whole pulse.
inline std::vector<std::string> pulse_warnings(const PulseSpec& pulse) {
    std::vector<std::string> warnings;
    const double total = pulse.eta1 * pulse.eta1 + pulse.eta2 * pulse.eta2;
    if (total > 1.0 + 1e-12)
        warnings.push_back("pulse efficiencies exceed unit capture: eta1^2 + eta2^2 = " +
                           std::to_string(total));
    return warnings;
}

} // namespace entforce

#endif
