#pragma once

#include <cmath>
#include <cstddef>

namespace mfut {

/// Adaptive Simpson integration with Richardson correction.
/// Subintervals stop splitting at @p max_depth or once @p max_evals integrand
/// calls have been spent; the tolerance halves on each split.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-12, int max_depth = 40,
                        std::size_t max_evals = 2'000'000) {
    if (a == b) return 0.0;

    struct Rec {
        F& f;
        std::size_t evals_left;
        double step(double a, double fa, double m, double fm, double b, double fb, double whole,
                    double tol, int depth) {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            evals_left = evals_left > 2 ? evals_left - 2 : 0;
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || evals_left == 0 || std::abs(delta) <= 15.0 * tol)
                return left + right + delta / 15.0;
            return step(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
                   step(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
        }
    };

    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    Rec rec{f, max_evals};
    return rec.step(a, fa, m, fm, b, fb, whole, abs_tol, max_depth);
}

}  // namespace mfut
