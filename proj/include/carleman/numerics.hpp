#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace carleman {

// Pairwise (cascade) summation. All quadrature and norm accumulations go
// through this so results do not depend on thread count or chunking.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(std::span<const double>(v));
}

// Golden-section maximization of a unimodal function on [a, b].
inline double golden_section_max(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-12) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// First parameter value in [lo, hi] where `holds` becomes true, assuming
// monotone onset: coarse scan then bisection. NaN when it never holds on
// the scanned range.
inline double threshold_search(const std::function<bool(double)>& holds, double lo, double hi,
                               int coarse_steps = 64, int refine_iters = 48) {
    if (holds(lo)) return lo;
    double prev = lo;
    double found = std::numeric_limits<double>::quiet_NaN();
    for (int k = 1; k <= coarse_steps; ++k) {
        const double x = lo + (hi - lo) * static_cast<double>(k) / coarse_steps;
        if (holds(x)) {
            found = x;
            break;
        }
        prev = x;
    }
    if (std::isnan(found)) return found;
    double a = prev, b = found;
    for (int it = 0; it < refine_iters; ++it) {
        const double mid = 0.5 * (a + b);
        (holds(mid) ? b : a) = mid;
    }
    return b;
}

}  // namespace carleman
