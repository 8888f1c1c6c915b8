#pragma once

// Step-size factors of the bounded-loss bounds:
//
//   delta(eta, alpha) = exp(-c eta^p) * int_0^eta exp(c u^p) du,
//       p = 1 - alpha, c = 1 / (2 p)
//   zeta(eta, alpha, lmin, lmax): same with c = lmin / (2 lmax p)
//
// Both lie in (0, eta]. The prefactor is folded into the integrand so the
// integrand stays in (0, 1].

#include <cmath>

#include "genbound/bounds/quadrature.hpp"
#include "genbound/error.hpp"

namespace genbound {

namespace detail {

inline void check_step_args(double eta, double alpha) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("step size must be positive and finite");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

/// exponent_sign = +1 is the real integrand; -1 is a deliberately broken
/// variant used by the property suite's negative control.
inline double step_integral(double eta, double alpha, double coeff_scale, const QuadratureSpec& quad,
                            double exponent_sign = 1.0) {
    const double p = 1.0 - alpha;
    const double c = exponent_sign * coeff_scale / (2.0 * p);
    const double eta_p = std::pow(eta, p);
    const auto integrand = [&](double u) { return std::exp(c * (std::pow(u, p) - eta_p)); };
    return adaptive_simpson(integrand, 0.0, eta, quad).value;
}

}  // namespace detail

inline double delta_s(double eta, double alpha, const QuadratureSpec& quad = {}) {
    detail::check_step_args(eta, alpha);
    return detail::step_integral(eta, alpha, 1.0, quad);
}

inline double zeta_s(double eta, double alpha, double lambda_min, double lambda_max, const QuadratureSpec& quad = {}) {
    detail::check_step_args(eta, alpha);
    if (!(lambda_min > 0.0) || !(lambda_min <= lambda_max))
        throw DomainError("zeta_s needs 0 < lambda_min <= lambda_max");
    return detail::step_integral(eta, alpha, lambda_min / lambda_max, quad);
}

}  // namespace genbound
