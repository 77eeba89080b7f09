#ifndef ENTFORCE_CONSTANTS_HPP
#define ENTFORCE_CONSTANTS_HPP

// SI constants (CODATA 2018). mu0 is derived from eps0 and c so that
// mu0*eps0*c^2 == 1 holds exactly in double precision; the Green-tensor
// identities used throughout assume that relation.

namespace entforce {
namespace constants {

inline constexpr double c_light = 2.99792458e8;        // m/s
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double eps0 = 8.8541878128e-12;       // F/m
inline constexpr double mu0 = 1.0 / (eps0 * c_light * c_light);
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double k_boltzmann = 1.380649e-23;    // J/K
inline constexpr double ev = elementary_charge;        // 1 eV in J

} // namespace constants
} // namespace entforce

#endif
