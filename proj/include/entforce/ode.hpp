#ifndef ENTFORCE_ODE_HPP
#define ENTFORCE_ODE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "entforce/complex_matrix.hpp"

// Dormand-Prince 5(4) adaptive integrator for matrix-valued states, with the
// standard quartic dense-output interpolant. The extended master equation is
// non-stiff at the rate scales used here (everything ~ gamma0), so an
// explicit embedded pair is the right tool.

namespace entforce {

struct OdeOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double initial_step = 0.0;     // 0: pick from span
    double max_step = 0.0;         // 0: unbounded
    std::size_t max_steps = 2000000;
};

struct OdeSolution {
    std::vector<double> times;
    std::vector<ComplexMatrix> states;
};

class StiffnessError : public std::runtime_error {
public:
    StiffnessError(const std::string& msg, double when)
        : std::runtime_error(msg), time(when) {}
    double time;
};

namespace detail {

// Dormand-Prince coefficients
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
// y1 - yhat1 (5th order minus embedded 4th order)
inline constexpr double dp_e[7] = {
    71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
    -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
// dense-output quartic coefficients (Hairer, Norsett, Wanner)
inline constexpr double dp_d[7] = {
    -12715105075.0 / 11282082432.0, 0.0,
    87487479700.0 / 32700410799.0, -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0, -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0};

inline double error_norm(const ComplexMatrix& err, const ComplexMatrix& y0,
                         const ComplexMatrix& y1, double rel, double abs) {
    double acc = 0.0;
    const std::size_t n = err.rows() * err.cols();
    for (std::size_t i = 0; i < err.rows(); ++i)
        for (std::size_t j = 0; j < err.cols(); ++j) {
            const double sc = abs + rel * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
            const double e = std::abs(err(i, j)) / sc;
            acc += e * e;
        }
    return std::sqrt(acc / static_cast<double>(n));
}

} // namespace detail

// Integrates y' = rhs(t, y) from t0 to t1 (t1 > t0) and returns the state at
// each requested sample time (dense interpolation). With no sample times the
// accepted step points themselves are returned.
template <typename RHS>
OdeSolution integrate_ode(RHS&& rhs, const ComplexMatrix& y0, double t0, double t1,
                          const std::vector<double>& sample_times = {},
                          const OdeOptions& opts = OdeOptions{}) {
    if (!(t1 > t0))
        throw std::invalid_argument("integrate_ode: need t1 > t0");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < t0 || sample_times[i] > t1)
            throw std::invalid_argument("integrate_ode: sample time outside span");
        if (i > 0 && sample_times[i] <= sample_times[i - 1])
            throw std::invalid_argument("integrate_ode: sample times must be strictly increasing");
    }

    OdeSolution sol;
    const bool natural = sample_times.empty();
    std::size_t next_sample = 0;

    ComplexMatrix y = y0;
    double t = t0;
    const double span = t1 - t0;
    double h = opts.initial_step > 0.0 ? opts.initial_step : span * 1e-3;
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

    ComplexMatrix k[7];
    k[0] = rhs(t, y);

    if (natural) {
        sol.times.push_back(t);
        sol.states.push_back(y);
    } else if (sample_times[0] == t0) {
        sol.times.push_back(t0);
        sol.states.push_back(y);
        next_sample = 1;
    }

    const double hmin_floor = 1e4 * std::numeric_limits<double>::epsilon();

    for (std::size_t step = 0; step < opts.max_steps; ++step) {
        if (t >= t1) break;
        h = std::min(h, t1 - t);
        const double hmin = hmin_floor * std::max(std::abs(t), span);
        if (h < hmin)
            throw StiffnessError("integrate_ode: step size underflow at t = " +
                                     std::to_string(t) + " (stiffness suspected)",
                                 t);

        for (int s = 1; s < 7; ++s) {
            ComplexMatrix acc = y;
            for (int j = 0; j < s; ++j)
                if (detail::dp_a[s][j] != 0.0) acc += (h * detail::dp_a[s][j]) * k[j];
            k[s] = rhs(t + detail::dp_c[s] * h, acc);
        }
        // stage 7 argument is the 5th-order solution itself (FSAL structure)
        ComplexMatrix y1 = y;
        for (int j = 0; j < 6; ++j)
            if (detail::dp_a[6][j] != 0.0) y1 += (h * detail::dp_a[6][j]) * k[j];

        ComplexMatrix err(y.rows(), y.cols());
        for (int j = 0; j < 7; ++j)
            if (detail::dp_e[j] != 0.0) err += (h * detail::dp_e[j]) * k[j];

        const double en = detail::error_norm(err, y, y1, opts.rel_tol, opts.abs_tol);
        if (en <= 1.0) {
            // dense output over [t, t+h]
            if (!natural) {
                ComplexMatrix rc3, rc4, rc5;
                bool have_cont = false;
                while (next_sample < sample_times.size() &&
                       sample_times[next_sample] <= t + h + 1e-14 * span) {
                    if (!have_cont) {
                        ComplexMatrix ydiff = y1 - y;
                        rc3 = (h * 1.0) * k[0] - ydiff;
                        rc4 = ydiff - (h * 1.0) * k[6] - rc3;
                        rc5 = ComplexMatrix(y.rows(), y.cols());
                        for (int j = 0; j < 7; ++j)
                            if (detail::dp_d[j] != 0.0) rc5 += (h * detail::dp_d[j]) * k[j];
                        have_cont = true;
                    }
                    const double th = (sample_times[next_sample] - t) / h;
                    const double omth = 1.0 - th;
                    ComplexMatrix inner = rc4 + omth * rc5;
                    ComplexMatrix mid = rc3 + th * inner;
                    ComplexMatrix yi = y + th * ((y1 - y) + omth * mid);
                    sol.times.push_back(sample_times[next_sample]);
                    sol.states.push_back(yi);
                    ++next_sample;
                }
            }
            t += h;
            y = y1;
            k[0] = k[6];  // FSAL: last stage equals f at the new point
            if (natural) {
                sol.times.push_back(t);
                sol.states.push_back(y);
            }
            double factor = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
            if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
        }
    }

    if (t < t1)
        throw StiffnessError("integrate_ode: step budget exhausted at t = " + std::to_string(t), t);
    return sol;
}

} // namespace entforce

#endif
