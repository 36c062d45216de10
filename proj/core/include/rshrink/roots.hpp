#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace rshrink::roots {

struct RootResult {
    double x = 0.0;
    double residual = 0.0;  // |h(x) - target|
    int iterations = 0;
};

/// Root of h(x) = target for h strictly decreasing on [lo, hi] with
/// h(lo) >= target >= h(hi). `h` returns (value, derivative). Newton steps are
/// taken when they stay inside the current bracket, otherwise the bracket is
/// bisected (geometrically while it spans more than a factor of four).
template <typename Fn>
RootResult solve_decreasing(Fn&& h, double target, double lo, double hi, int max_iter = 400) {
    RootResult best{lo, std::numeric_limits<double>::infinity(), 0};
    double x = (hi / lo > 4.0 && lo > 0.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    for (int k = 0; k < max_iter; ++k) {
        const auto [value, slope] = h(x);
        const double gap = value - target;
        best.iterations = k + 1;
        if (std::abs(gap) < best.residual) {
            best.x = x;
            best.residual = std::abs(gap);
        }
        if (gap == 0.0) break;
        if (gap > 0.0) lo = x; else hi = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;

        const double newton = x - gap / slope;
        if (std::isfinite(newton) && slope < 0.0 && newton > lo && newton < hi) {
            x = newton;
        } else {
            x = (hi / lo > 4.0 && lo > 0.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        }
        // Newton has stalled at machine precision
        if (best.residual <= 1e-15 * std::max(1.0, std::abs(target))) break;
    }
    return best;
}

/// Plain bisection for g increasing on [lo, hi]; returns the midpoint once the
/// bracket can no longer shrink.
template <typename Fn>
double bisect_increasing(Fn&& g, double target, double lo, double hi, int max_iter = 200) {
    for (int k = 0; k < max_iter; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double v = g(mid);
        if (v == target) return mid;
        if (v < target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace rshrink::roots
