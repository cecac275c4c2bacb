#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "latfuse/errors.hpp"

namespace latfuse {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = (left + right - whole) / 15.0;
    if (std::abs(err) <= tol) return left + right + err;
    if (depth <= 0) throw NumericalError("adaptive quadrature did not converge");
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction; absolute tolerance.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol, int max_depth = 60) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

// Integrates over [knots.front(), knots.back()] with panel boundaries at every
// knot; use knots to pin integrand kinks and narrow features.
template <class F>
double integrate_piecewise(const F& f, std::vector<double> knots, double abs_tol) {
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    if (knots.size() < 2) throw ContractError("integrate_piecewise needs at least two knots");
    const double panel_tol = abs_tol / static_cast<double>(knots.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        total += adaptive_simpson(f, knots[i], knots[i + 1], panel_tol);
    return total;
}

}  // namespace latfuse
