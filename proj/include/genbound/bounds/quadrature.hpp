#pragma once

#include <cmath>
#include <cstddef>

#include "genbound/error.hpp"

namespace genbound {

struct QuadratureSpec {
    double abs_tolerance = 1e-10;
    int max_depth = 40;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

namespace detail {

template <class Fn>
void simpson_recurse(const Fn& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                     int depth, QuadratureResult& acc) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
        if (depth <= 0 && std::abs(diff) > 15.0 * tol) acc.converged = false;
        acc.value += left + right + diff / 15.0;
        acc.error_estimate += std::abs(diff) / 15.0;
        return;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc);
    simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction on [a, b].
template <class Fn>
QuadratureResult adaptive_simpson(const Fn& f, double a, double b, const QuadratureSpec& spec = {}) {
    if (!(spec.abs_tolerance > 0.0) || spec.max_depth < 1) throw DomainError("invalid quadrature spec");
    QuadratureResult acc;
    acc.value = 0.0;
    if (a == b) return acc;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    detail::simpson_recurse(f, a, b, fa, fm, fb, whole, spec.abs_tolerance, spec.max_depth, acc);
    return acc;
}

}  // namespace genbound
