#ifndef ENTFORCE_FIT_HPP
#define ENTFORCE_FIT_HPP

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace entforce {

// Least-squares slope of log(y) versus log(x); used for the power-law scaling
// checks (force and potential versus distance).
inline double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4)
        throw std::domain_error("fit_loglog_slope: need at least 4 points");
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx(points.size()), ly(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].first > 0.0) || !(points[i].second > 0.0))
            throw std::domain_error("fit_loglog_slope: points must be strictly positive");
        lx[i] = std::log(points[i].first);
        ly[i] = std::log(points[i].second);
        sx += lx[i];
        sy += ly[i];
    }
    const double mx = sx / points.size();
    const double my = sy / points.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    if (den == 0.0)
        throw std::domain_error("fit_loglog_slope: all x values identical");
    return num / den;
}

} // namespace entforce

#endif
