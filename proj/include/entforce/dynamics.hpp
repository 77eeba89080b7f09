#ifndef ENTFORCE_DYNAMICS_HPP
#define ENTFORCE_DYNAMICS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "entforce/complex_matrix.hpp"
#include "entforce/couplings.hpp"
#include "entforce/ode.hpp"
#include "entforce/pulse.hpp"

// Time-dependent master equation for two driven atoms. A Fock pulse with n
// photons is handled with an extended density matrix on the product of an
// (n+1)-dimensional photon-record ladder and the 4-dimensional two-atom
// space; the physical atomic state is the fully-absorbed record block. A
// coherent pulse needs no record ladder: the drive enters as a classical
// amplitude sqrt(mean_n) xi(t). Everything integrates in the frame rotating
// at the pulse carrier, so step sizes are set by gamma0, not the optical
// frequency.
//
// Atomic basis ordering throughout: {gg, eg, ge, ee} with eg = atom 1
// excited. Atom 1 lowering = |gg><eg| + |ge><ee|.

namespace entforce {

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& msg, double time_gamma0)
        : std::runtime_error(msg), time(time_gamma0) {}
    double time;  // gamma0 * t where the problem was detected
};

struct ExtendedState {
    ComplexMatrix matrix;  // density operator on (photon record) x (two atoms)
    double time = 0.0;     // seconds
};

struct ObservableSeries {
    std::vector<double> times;           // gamma0 * t
    std::vector<double> force;           // <F_RDDI>, newtons
    std::vector<double> concurrence;     // Wootters concurrence of the pair
    std::vector<double> p1e;             // excitation probability, atom 1
    std::vector<double> p2e;             // excitation probability, atom 2
    std::vector<double> absorbed_total;  // p1e + p2e
};

struct PeakMetrics {
    double force_time = 0.0;        // gamma0 * t of the |force| maximum
    double force_value = 0.0;       // peak |force|, newtons
    double concurrence_time = 0.0;
    double concurrence_value = 0.0;
    double p1e_time = 0.0;
    double p1e_value = 0.0;
    bool force_flat = false;        // maximum sat on the grid edge (no bump)
    bool concurrence_flat = false;
    bool p1e_flat = false;
};

struct SweepPoint {
    double tau_f = 0.0;  // seconds
    PeakMetrics peaks;
};

using Superoperator = std::function<ComplexMatrix(const ComplexMatrix&)>;

namespace detail {

inline ComplexMatrix atomic_lowering(int atom) {
    ComplexMatrix s(4, 4);
    if (atom == 1) {
        s(0, 1) = 1.0;
        s(2, 3) = 1.0;
    } else if (atom == 2) {
        s(0, 2) = 1.0;
        s(1, 3) = 1.0;
    } else {
        throw std::invalid_argument("atomic_lowering: atom index must be 1 or 2");
    }
    return s;
}

// Photon-record ladder operator for an n-photon Fock pulse: entries
// sqrt(n - m) at (m, m+1) on the (n+1)-dimensional record space, so the
// fully-absorbed block (0,0) is sourced by its higher neighbors. At n = 1
// this is the 2x2 raising-type matrix with a single unit entry.
inline ComplexMatrix record_raising(int n) {
    if (n < 1)
        throw std::invalid_argument("record_raising: photon number must be >= 1");
    ComplexMatrix t(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(n) + 1);
    for (int m = 0; m < n; ++m)
        t(static_cast<std::size_t>(m), static_cast<std::size_t>(m) + 1) =
            std::sqrt(static_cast<double>(n - m));
    return t;
}

// Master-equation right-hand side in gamma0-scaled time tau = gamma0 t. All
// couplings are stored divided by gamma0, so the integrator sees O(1) rates.
struct DynamicsEngine {
    int ladder = 1;
    bool fock = true;
    double gamma0 = 0.0;      // 1/s, the time unit
    double g12n = 0.0;        // gamma12 / gamma0
    double amp1 = 0.0;        // eta_1 (times sqrt(mean_n) for coherent pulses)
    double amp2 = 0.0;
    double tau_n = 0.0;       // pulse length, gamma0 units
    double t1_n = 0.0;        // arrival times, gamma0 units
    double t2_n = 0.0;
    ComplexMatrix hnh;        // drift Hamiltonian minus i/2 damping, gamma0 units
    ComplexMatrix hnh_dag;
    ComplexMatrix s1m, s1p, s2m, s2p;  // atomic ops, identity on the record
    ComplexMatrix tp, tm;              // record ladder ops, identity on the atoms

    std::size_t dim() const { return static_cast<std::size_t>(4 * ladder); }

    ComplexMatrix derivative(double tau, const ComplexMatrix& b) const {
        ComplexMatrix d = cplx{0.0, -1.0} * (hnh * b - b * hnh_dag);
        const ComplexMatrix x1 = s1m * b;
        const ComplexMatrix x2 = s2m * b;
        d += x1 * s1p;
        d += x2 * s2p;
        if (g12n != 0.0) {
            d += g12n * (x1 * s2p);
            d += g12n * (x2 * s1p);
        }
        const double xi1 = amp1 != 0.0 ? amp1 * gaussian_envelope(tau_n, tau - t1_n) : 0.0;
        const double xi2 = amp2 != 0.0 ? amp2 * gaussian_envelope(tau_n, tau - t2_n) : 0.0;
        if (xi1 != 0.0 || xi2 != 0.0) {
            if (fock) {
                const ComplexMatrix tpb = tp * b;
                const ComplexMatrix btm = b * tm;
                if (xi1 != 0.0) {
                    d += xi1 * (tpb * s1p - s1p * tpb);
                    d += xi1 * (s1m * btm - btm * s1m);
                }
                if (xi2 != 0.0) {
                    d += xi2 * (tpb * s2p - s2p * tpb);
                    d += xi2 * (s2m * btm - btm * s2m);
                }
            } else {
                if (xi1 != 0.0) {
                    d += xi1 * (b * s1p - s1p * b);
                    d += xi1 * (s1m * b - b * s1m);
                }
                if (xi2 != 0.0) {
                    d += xi2 * (b * s2p - s2p * b);
                    d += xi2 * (s2m * b - b * s2m);
                }
            }
        }
        return d;
    }
};

inline DynamicsEngine make_engine(const CouplingSet& set, const PulseSpec& pulse,
                                  double omega0) {
    validate_pulse(pulse);
    if (!(set.gamma0 > 0.0))
        throw std::invalid_argument("make_engine: couplings must have gamma0 > 0");

    DynamicsEngine e;
    e.fock = pulse.kind == PulseKind::fock;
    e.ladder = e.fock ? pulse.photon_count + 1 : 1;
    e.gamma0 = set.gamma0;
    e.g12n = set.gamma12 / set.gamma0;
    const double scale = e.fock ? 1.0 : std::sqrt(pulse.mean_photon_number);
    e.amp1 = pulse.eta1 * scale;
    e.amp2 = pulse.eta2 * scale;
    e.tau_n = set.gamma0 * pulse.tau_f;
    e.t1_n = set.gamma0 * pulse.t1;
    e.t2_n = set.gamma0 * pulse.t2;

    const std::size_t l = static_cast<std::size_t>(e.ladder);
    const ComplexMatrix il = ComplexMatrix::identity(l);
    e.s1m = kron(il, atomic_lowering(1));
    e.s2m = kron(il, atomic_lowering(2));
    e.s1p = e.s1m.adjoint();
    e.s2p = e.s2m.adjoint();
    if (e.fock) {
        e.tp = kron(record_raising(pulse.photon_count), ComplexMatrix::identity(4));
        e.tm = e.tp.adjoint();
    }

    // exchange operator and total excitation number, gamma0-scaled couplings
    const ComplexMatrix exch = e.s1p * e.s2m + e.s2p * e.s1m;
    const ComplexMatrix num = e.s1p * e.s1m + e.s2p * e.s2m;
    const double d12n = set.delta12 / set.gamma0;
    // frame rotating at the pulse carrier: atoms keep a residual detuning
    const double carrier = pulse.carrier > 0.0 ? pulse.carrier : omega0;
    const double detuning_n = (omega0 - carrier) / set.gamma0;
    e.hnh = cplx{d12n, -0.5 * e.g12n} * exch + cplx{detuning_n, -0.5} * num;
    e.hnh_dag = e.hnh.adjoint();
    return e;
}

} // namespace detail

// Time-independent dissipative generator (SI rates, 1/s): coherent exchange
// at delta12, damping gamma0 per atom with cross-damping gamma12, acting on
// the atomic factor and leaving an optional photon-record factor untouched.
// The lab-frame variant adds the free evolution omega0 * (excitation number).
inline Superoperator lindblad_generator(const CouplingSet& set, int ladder_dim = 1,
                                        bool rotating_frame = true, double omega0 = 0.0) {
    if (ladder_dim < 1)
        throw std::invalid_argument("lindblad_generator: ladder_dim must be >= 1");
    if (!rotating_frame && !(omega0 > 0.0))
        throw std::invalid_argument("lindblad_generator: lab frame needs omega0 > 0");
    if (!(set.gamma0 >= 0.0))
        throw std::invalid_argument("lindblad_generator: gamma0 must be non-negative");

    const ComplexMatrix il = ComplexMatrix::identity(static_cast<std::size_t>(ladder_dim));
    struct Ops {
        ComplexMatrix s1m, s1p, s2m, s2p, hnh, hnh_dag;
        double gamma0, gamma12;
    } ops;
    ops.s1m = kron(il, detail::atomic_lowering(1));
    ops.s2m = kron(il, detail::atomic_lowering(2));
    ops.s1p = ops.s1m.adjoint();
    ops.s2p = ops.s2m.adjoint();
    ops.gamma0 = set.gamma0;
    ops.gamma12 = set.gamma12;
    const ComplexMatrix exch = ops.s1p * ops.s2m + ops.s2p * ops.s1m;
    const ComplexMatrix num = ops.s1p * ops.s1m + ops.s2p * ops.s2m;
    const double w0 = rotating_frame ? 0.0 : omega0;
    ops.hnh = cplx{set.delta12, -0.5 * set.gamma12} * exch + cplx{w0, -0.5 * set.gamma0} * num;
    ops.hnh_dag = ops.hnh.adjoint();

    return [ops = std::move(ops)](const ComplexMatrix& b) {
        if (b.rows() != ops.s1m.rows() || b.cols() != ops.s1m.cols())
            throw std::invalid_argument("lindblad_generator: state dimension mismatch");
        ComplexMatrix d = cplx{0.0, -1.0} * (ops.hnh * b - b * ops.hnh_dag);
        const ComplexMatrix x1 = ops.s1m * b;
        const ComplexMatrix x2 = ops.s2m * b;
        d += ops.gamma0 * (x1 * ops.s1p);
        d += ops.gamma0 * (x2 * ops.s2p);
        if (ops.gamma12 != 0.0) {
            d += ops.gamma12 * (x1 * ops.s2p);
            d += ops.gamma12 * (x2 * ops.s1p);
        }
        return d;
    };
}

// Pump superoperator at time t (seconds, SI rates). For a Fock pulse the
// photon-record ladder mediates the drive,
//   sum_j sqrt(gamma0) eta_j xi(t - t_j) ([T+ rho, S_j+] + h.c. pairing),
// and for a coherent pulse the record operators collapse to 1 with xi scaled
// by sqrt(mean_n). Expressed in the frame co-rotating with the carrier, so
// the envelope is the real Gaussian.
inline Superoperator pump_generator(const PulseSpec& pulse, const CouplingSet& set, double t) {
    validate_pulse(pulse);
    if (!std::isfinite(t))
        throw std::invalid_argument("pump_generator: time must be finite");
    if (!(set.gamma0 >= 0.0))
        throw std::invalid_argument("pump_generator: gamma0 must be non-negative");

    const bool fock = pulse.kind == PulseKind::fock;
    const int ladder = fock ? pulse.photon_count + 1 : 1;
    const ComplexMatrix il = ComplexMatrix::identity(static_cast<std::size_t>(ladder));
    struct Ops {
        ComplexMatrix s1m, s1p, s2m, s2p, tp, tm;
        double xi1, xi2;
        bool fock;
    } ops;
    ops.fock = fock;
    ops.s1m = kron(il, detail::atomic_lowering(1));
    ops.s2m = kron(il, detail::atomic_lowering(2));
    ops.s1p = ops.s1m.adjoint();
    ops.s2p = ops.s2m.adjoint();
    if (fock) {
        ops.tp = kron(detail::record_raising(pulse.photon_count), ComplexMatrix::identity(4));
        ops.tm = ops.tp.adjoint();
    }
    const double root_rate = std::sqrt(set.gamma0);
    const double scale = fock ? 1.0 : std::sqrt(pulse.mean_photon_number);
    ops.xi1 = root_rate * pulse.eta1 * scale * gaussian_envelope(pulse.tau_f, t - pulse.t1);
    ops.xi2 = root_rate * pulse.eta2 * scale * gaussian_envelope(pulse.tau_f, t - pulse.t2);

    return [ops = std::move(ops)](const ComplexMatrix& b) {
        if (b.rows() != ops.s1m.rows() || b.cols() != ops.s1m.cols())
            throw std::invalid_argument("pump_generator: state dimension mismatch");
        ComplexMatrix d(b.rows(), b.cols());
        if (ops.fock) {
            const ComplexMatrix tpb = ops.tp * b;
            const ComplexMatrix btm = b * ops.tm;
            if (ops.xi1 != 0.0) {
                d += ops.xi1 * (tpb * ops.s1p - ops.s1p * tpb);
                d += ops.xi1 * (ops.s1m * btm - btm * ops.s1m);
            }
            if (ops.xi2 != 0.0) {
                d += ops.xi2 * (tpb * ops.s2p - ops.s2p * tpb);
                d += ops.xi2 * (ops.s2m * btm - btm * ops.s2m);
            }
        } else {
            if (ops.xi1 != 0.0) {
                d += ops.xi1 * (b * ops.s1p - ops.s1p * b);
                d += ops.xi1 * (ops.s1m * b - b * ops.s1m);
            }
            if (ops.xi2 != 0.0) {
                d += ops.xi2 * (b * ops.s2p - ops.s2p * b);
                d += ops.xi2 * (ops.s2m * b - b * ops.s2m);
            }
        }
        return d;
    };
}

// Physical atomic state: the record projector with its single nonzero
// element at the fully-absorbed rung selects the top-left 4x4 block.
inline ComplexMatrix extract_atomic_state(const ComplexMatrix& m) {
    if (m.rows() != m.cols() || m.rows() < 4 || m.rows() % 4 != 0)
        throw std::invalid_argument("extract_atomic_state: matrix is not (4 L) x (4 L)");
    ComplexMatrix rho(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) rho(i, j) = m(i, j);
    return rho;
}

inline ComplexMatrix extract_atomic_state(const ExtendedState& state) {
    return extract_atomic_state(state.matrix);
}

// Wootters concurrence of a two-qubit density matrix: the decreasingly
// sorted square roots s_i of the eigenvalues of rho (sy x sy) rho^* (sy x sy)
// give C = max(0, s1 - s2 - s3 - s4). Computed through the Hermitian form
// sqrt(rho) rho_flipped sqrt(rho), which shares the nonzero spectrum.
inline double concurrence(const ComplexMatrix& rho, double tol = 1e-8) {
    if (rho.rows() != 4 || rho.cols() != 4)
        throw std::domain_error("concurrence: need a 4x4 density matrix");
    if (!rho.is_hermitian(tol))
        throw std::domain_error("concurrence: matrix is not Hermitian");
    if (std::abs(rho.trace() - cplx{1.0, 0.0}) > tol)
        throw std::domain_error("concurrence: trace differs from 1");

    ComplexMatrix h = rho;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const cplx avg = 0.5 * (h(i, j) + std::conj(h(j, i)));
            h(i, j) = avg;
            h(j, i) = std::conj(avg);
        }
    const HermitianEigen eig = hermitian_eigen(h);
    if (eig.values.front() < -tol)
        throw std::domain_error("concurrence: matrix is not positive semidefinite");

    ComplexMatrix sqrt_rho(4, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        const double lam = std::max(eig.values[k], 0.0);
        const double root = std::sqrt(lam);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                sqrt_rho(i, j) += root * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }

    // spin flip sy x sy = antidiag(-1, 1, 1, -1) in the product basis
    ComplexMatrix yy(4, 4);
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const ComplexMatrix flipped = yy * h.conjugate() * yy;
    ComplexMatrix m = sqrt_rho * flipped * sqrt_rho;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const cplx avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m(i, j) = avg;
            m(j, i) = std::conj(avg);
        }
    const HermitianEigen meig = hermitian_eigen(m);
    double s[4];
    for (std::size_t k = 0; k < 4; ++k) s[k] = std::sqrt(std::max(meig.values[k], 0.0));
    // ascending order from the eigensolver: s[3] is the largest
    const double c = s[3] - s[2] - s[1] - s[0];
    return std::clamp(c, 0.0, 1.0);
}

// Integration window catching essentially all of the pulse (the tail beyond
// 6 tau_f carries < 1e-9 of the norm) plus enough decay time afterwards for
// full re-emission.
inline std::pair<double, double> default_time_span(double gamma0, const PulseSpec& pulse) {
    if (!(gamma0 > 0.0))
        throw std::invalid_argument("default_time_span: gamma0 must be positive");
    validate_pulse(pulse);
    const double lo = std::min(pulse.t1, pulse.t2) - 6.0 * pulse.tau_f;
    const double hi = std::max(pulse.t1, pulse.t2) + 5.0 * pulse.tau_f + 20.0 / gamma0;
    return {lo, hi};
}

namespace detail {

struct SimulationRun {
    CouplingSet set;
    std::vector<double> times_n;  // gamma0 * t
    std::vector<ComplexMatrix> states;
};

inline CouplingSet couplings_for(const DipolePairConfig& config) {
    return config.graphene ? couplings_from_green(config) : couplings_free_space(config);
}

inline SimulationRun run_dynamics(const DipolePairConfig& config, const PulseSpec& pulse,
                                  std::pair<double, double> t_span, std::size_t samples) {
    validate_pulse(pulse);
    if (samples < 2)
        throw std::invalid_argument("simulate: need at least 2 samples");
    if (!(t_span.second > t_span.first))
        throw std::invalid_argument("simulate: time span must have positive length");

    SimulationRun run;
    run.set = couplings_for(config);
    const DynamicsEngine engine = make_engine(run.set, pulse, config.omega0);

    ComplexMatrix b0(engine.dim(), engine.dim());
    for (int m = 0; m < engine.ladder; ++m)
        b0(static_cast<std::size_t>(4 * m), static_cast<std::size_t>(4 * m)) = 1.0;

    const double tau0 = run.set.gamma0 * t_span.first;
    const double tau1 = run.set.gamma0 * t_span.second;
    run.times_n.resize(samples);
    for (std::size_t i = 0; i < samples; ++i)
        run.times_n[i] = tau0 + (tau1 - tau0) * static_cast<double>(i) /
                                    static_cast<double>(samples - 1);
    run.times_n.back() = tau1;

    OdeOptions opts;
    opts.rel_tol = 1e-9;
    opts.abs_tol = 1e-13;
    try {
        OdeSolution sol = integrate_ode(
            [&engine](double tau, const ComplexMatrix& b) { return engine.derivative(tau, b); },
            b0, tau0, tau1, run.times_n, opts);
        run.states = std::move(sol.states);
    } catch (const StiffnessError& err) {
        throw IntegrationError(std::string("simulate: ") + err.what(), err.time);
    }
    return run;
}

struct ChannelPeak {
    double t = 0.0;
    double v = 0.0;
    bool flat = false;
};

inline ChannelPeak refine_peak(const std::vector<double>& ts, const std::vector<double>& ys) {
    std::size_t imax = 0;
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i] > ys[imax]) imax = i;
    if (imax == 0 || imax + 1 == ys.size())
        return {ts[imax], ys[imax], true};
    const double ym = ys[imax - 1], y0 = ys[imax], yp = ys[imax + 1];
    const double denom = ym - 2.0 * y0 + yp;
    if (!(denom < 0.0))
        return {ts[imax], y0, true};
    const double h = 0.5 * (ts[imax + 1] - ts[imax - 1]);
    const double shift = std::clamp(0.5 * (ym - yp) / denom, -1.0, 1.0);
    const double value = y0 - (yp - ym) * (yp - ym) / (8.0 * denom);
    return {ts[imax] + shift * h, value, false};
}

} // namespace detail

// Sampled extended states (raw, without observable extraction).
inline std::vector<ExtendedState> simulate_states(const DipolePairConfig& config,
                                                  const PulseSpec& pulse,
                                                  std::pair<double, double> t_span,
                                                  std::size_t samples = 2000) {
    detail::SimulationRun run = detail::run_dynamics(config, pulse, t_span, samples);
    std::vector<ExtendedState> out;
    out.reserve(run.states.size());
    for (std::size_t i = 0; i < run.states.size(); ++i)
        out.push_back(ExtendedState{std::move(run.states[i]), run.times_n[i] / run.set.gamma0});
    return out;
}

// Integrates the driven master equation from the ground state with a blank
// photon record and extracts force, concurrence, and excitation
// probabilities at uniformly spaced samples. Throws IntegrationError when
// the sampled state drifts from a physical density matrix by more than 1e-6
// (trace, hermiticity, or positivity).
inline ObservableSeries simulate(const DipolePairConfig& config, const PulseSpec& pulse,
                                 std::pair<double, double> t_span, std::size_t samples = 2000) {
    detail::SimulationRun run = detail::run_dynamics(config, pulse, t_span, samples);
    const ComplexMatrix fhat = force_operator(run.set).matrix;

    ObservableSeries out;
    const std::size_t n = run.states.size();
    out.times = run.times_n;
    out.force.resize(n);
    out.concurrence.resize(n);
    out.p1e.resize(n);
    out.p2e.resize(n);
    out.absorbed_total.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const ComplexMatrix& b = run.states[i];
        const double tau = run.times_n[i];
        const double herm_dev = (b - b.adjoint()).max_abs();
        if (herm_dev > 1e-6)
            throw IntegrationError(
                "simulate: hermiticity lost (deviation " + std::to_string(herm_dev) + ")", tau);

        ComplexMatrix rho = extract_atomic_state(b);
        const double tr = rho.trace().real();
        if (std::abs(tr - 1.0) > 1e-6)
            throw IntegrationError(
                "simulate: trace of the physical block drifted to " + std::to_string(tr), tau);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = r + 1; c < 4; ++c) {
                const cplx avg = 0.5 * (rho(r, c) + std::conj(rho(c, r)));
                rho(r, c) = avg;
                rho(c, r) = std::conj(avg);
            }
        const HermitianEigen eig = hermitian_eigen(rho);
        if (eig.values.front() < -1e-6)
            throw IntegrationError("simulate: positivity violated (min eigenvalue " +
                                       std::to_string(eig.values.front()) + ")",
                                   tau);

        out.force[i] = (rho * fhat).trace().real();
        out.concurrence[i] = concurrence(rho, 1e-6);
        out.p1e[i] = (rho(1, 1) + rho(3, 3)).real();
        out.p2e[i] = (rho(2, 2) + rho(3, 3)).real();
        out.absorbed_total[i] = out.p1e[i] + out.p2e[i];
    }
    return out;
}

inline ObservableSeries simulate(const DipolePairConfig& config, const PulseSpec& pulse) {
    const double gamma0 = spontaneous_decay_rate(config.omega0, config.d0);
    return simulate(config, pulse, default_time_span(gamma0, pulse));
}

// Global maxima of |force|, concurrence, and p1e with parabolic refinement
// around interior grid maxima; edge or plateau maxima are flagged flat and
// reported unrefined. force_value is the peak magnitude.
inline PeakMetrics peak_metrics(const ObservableSeries& series) {
    const std::size_t n = series.times.size();
    if (n == 0)
        throw std::invalid_argument("peak_metrics: empty series");
    if (series.force.size() != n || series.concurrence.size() != n || series.p1e.size() != n)
        throw std::invalid_argument("peak_metrics: ragged series");

    std::vector<double> fmag(n);
    for (std::size_t i = 0; i < n; ++i) fmag[i] = std::abs(series.force[i]);

    PeakMetrics pk;
    const detail::ChannelPeak f = detail::refine_peak(series.times, fmag);
    pk.force_time = f.t;
    pk.force_value = f.v;
    pk.force_flat = f.flat;
    const detail::ChannelPeak c = detail::refine_peak(series.times, series.concurrence);
    pk.concurrence_time = c.t;
    pk.concurrence_value = c.v;
    pk.concurrence_flat = c.flat;
    const detail::ChannelPeak p = detail::refine_peak(series.times, series.p1e);
    pk.p1e_time = p.t;
    pk.p1e_value = p.v;
    pk.p1e_flat = p.flat;
    return pk;
}

// One simulation per pulse length (seconds, strictly increasing). Points are
// independent and run on a small worker pool; results keep grid order, so
// the output is identical for any job count.
inline std::vector<SweepPoint> sweep_pulse_length(const DipolePairConfig& config,
                                                  const PulseSpec& pulse_template,
                                                  const std::vector<double>& tau_grid,
                                                  int jobs = 0) {
    if (tau_grid.empty())
        throw std::invalid_argument("sweep_pulse_length: empty pulse-length grid");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        if (!(tau_grid[i] > 0.0))
            throw std::invalid_argument("sweep_pulse_length: pulse lengths must be positive");
        if (i > 0 && !(tau_grid[i] > tau_grid[i - 1]))
            throw std::invalid_argument("sweep_pulse_length: grid must be strictly increasing");
    }

    const std::size_t n = tau_grid.size();
    std::vector<SweepPoint> rows(n);
    std::vector<std::exception_ptr> failures(n);

    auto work = [&](std::size_t i) {
        try {
            PulseSpec pulse = pulse_template;
            pulse.tau_f = tau_grid[i];
            rows[i] = SweepPoint{tau_grid[i], peak_metrics(simulate(config, pulse))};
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };

    std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) work(i);
            });
        for (std::thread& th : pool) th.join();
    }
    for (std::size_t i = 0; i < n; ++i)
        if (failures[i]) std::rethrow_exception(failures[i]);
    return rows;
}

} // namespace entforce

#endif
