#pragma once

#include <cmath>
#include <functional>

namespace pw {

struct ScalarMin {
    double x;
    double fx;
};

// Golden-section minimization on [lo, hi].  Stops when the bracket width
// drops below rel_tol * max(|x|, 1e-12) or after max_iter shrink steps.
// Assumes f is unimodal on the bracket.
template <typename F>
ScalarMin golden_min(F&& f, double lo, double hi, double rel_tol = 1e-6,
                     int max_iter = 200) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (a + b);
        if (b - a <= rel_tol * std::max(std::fabs(mid), 1e-12)) break;
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? ScalarMin{x1, f1} : ScalarMin{x2, f2};
}

// Coarse grid scan followed by golden-section refinement around the best
// grid cell.  Robust when unimodality is only approximate.
template <typename F>
ScalarMin grid_then_golden(F&& f, double lo, double hi, int grid_points,
                           double rel_tol = 1e-6) {
    const double step = (hi - lo) / (grid_points - 1);
    int best = 0;
    double best_f = f(lo);
    for (int i = 1; i < grid_points; ++i) {
        const double fx = f(lo + i * step);
        if (fx < best_f) {
            best_f = fx;
            best = i;
        }
    }
    const double a = lo + std::max(0, best - 1) * step;
    const double b = lo + std::min(grid_points - 1, best + 1) * step;
    return golden_min(f, a, b, rel_tol);
}

}  // namespace pw
