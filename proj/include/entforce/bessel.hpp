#ifndef ENTFORCE_BESSEL_HPP
#define ENTFORCE_BESSEL_HPP

#include <cmath>
#include <stdexcept>

// Bessel functions J0, J1, J2 for non-negative real arguments, as needed by
// the interface (Sommerfeld) kernels. Ascending power series below x = 12,
// Hankel asymptotic expansion with optimally truncated P/Q series beyond.
// Accuracy is ~1e-12 absolute relative to the sqrt(2/pi x) envelope over
// [0, 1e4], which is ample for the quadratures built on top.

namespace entforce {

namespace detail {

inline double bessel_series(int n, double x) {
    // J_n(x) = sum_k (-1)^k / (k! (k+n)!) (x/2)^{2k+n}
    const double h = 0.5 * x;
    double term = 1.0;
    for (int m = 1; m <= n; ++m) term *= h / m;  // (x/2)^n / n!
    double sum = term;
    const double h2 = h * h;
    for (int k = 1; k < 80; ++k) {
        term *= -h2 / (static_cast<double>(k) * (k + n));
        sum += term;
        if (std::abs(term) < 1e-17 * (std::abs(sum) + 1e-300) && k > 4) break;
    }
    return sum;
}

inline double bessel_asymptotic(int n, double x) {
    // J_n(x) ~ sqrt(2/(pi x)) [P(n,x) cos(chi) - Q(n,x) sin(chi)],
    // chi = x - (2n+1) pi/4. P and Q are the standard Stokes series in
    // mu = 4 n^2; truncated at the smallest term.
    const double mu = 4.0 * n * n;
    const double ax8 = 8.0 * x;
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double prev = std::abs(term);
    for (int k = 0; k < 30; ++k) {
        // next factor for the (2k+1)-th term: contributes to Q at k even steps
        const double f1 = (mu - (4.0 * k + 1.0) * (4.0 * k + 1.0)) / ((2.0 * k + 1.0) * ax8);
        term *= f1;
        if (std::abs(term) > prev) break;  // series started to diverge
        q += (k % 2 == 0) ? term : -term;
        prev = std::abs(term);

        const double f2 = (mu - (4.0 * k + 3.0) * (4.0 * k + 3.0)) / ((2.0 * k + 2.0) * ax8);
        term *= f2;
        if (std::abs(term) > prev) break;
        p += (k % 2 == 0) ? -term : term;
        prev = std::abs(term);
    }
    const double chi = x - (2.0 * n + 1.0) * 0.25 * M_PI;
    return std::sqrt(2.0 / (M_PI * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace detail

inline double bessel_j(int order, double x) {
    if (order < 0 || order > 2)
        throw std::domain_error("bessel_j: order must be 0, 1, or 2");
    if (!std::isfinite(x) || x < 0.0)
        throw std::domain_error("bessel_j: argument must be finite and non-negative");
    if (x < 12.0) return detail::bessel_series(order, x);
    return detail::bessel_asymptotic(order, x);
}

} // namespace entforce

#endif
