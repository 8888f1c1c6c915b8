#pragma once

// Sample-size sweep of the bounded-loss bound with noise sigma_n = c n^-gamma:
//   bound(n) = a sigma_n^2 + c0 c1 / n * sqrt(k * 2 delta eta / sigma_n^2)
// The first term models the flatness term (a plays the role of E[Laplacian f]),
// the second is the trajectory term for k constant steps.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "genbound/bounds/step_integrals.hpp"
#include "genbound/bounds/trajectory.hpp"
#include "genbound/error.hpp"

namespace genbound {

struct RateModel {
    double flatness_coeff = 1.0;
    double sigma_coeff = 1.0;
    double lr = 0.01;
    std::size_t steps = 100;
    double alpha = 0.5;
    double c0 = 1.0;
    double c1 = 1.0;
};

struct RateSweepResult {
    std::vector<double> n_values;
    std::vector<double> flatness;
    std::vector<double> trajectory;
    std::vector<double> bound;
    double slope = 0.0;       // least-squares slope of log bound vs log n
    double tail_slope = 0.0;  // same, restricted to n >= max(n) / 10
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("slope fit lengths", x.size(), y.size());
    if (x.size() < 2) throw DomainError("slope fit needs at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive values");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw DomainError("slope fit needs distinct x values");
    return sxy / sxx;
}

inline RateSweepResult rate_sweep(std::span<const double> n_list, double gamma, const RateModel& model = {},
                                  const QuadratureSpec& quad = {}) {
    if (n_list.size() < 4) throw DomainError("rate sweep needs at least 4 sample sizes");
    const auto [lo, hi] = std::minmax_element(n_list.begin(), n_list.end());
    if (!(*lo > 0.0) || *hi / *lo < 100.0) throw DomainError("rate sweep sample sizes must span at least 2 decades");
    if (!(model.sigma_coeff > 0.0)) throw DomainError("sigma coefficient must be positive");

    RateSweepResult r;
    const double delta = delta_s(model.lr, model.alpha, quad);
    for (double n : n_list) {
        const double sigma = model.sigma_coeff * std::pow(n, -gamma);
        const double var = sigma * sigma;
        const double flat = model.flatness_coeff * var;
        const double traj =
            model.c0 * model.c1 / n * std::sqrt(static_cast<double>(model.steps) * 2.0 * delta * model.lr / var);
        r.n_values.push_back(n);
        r.flatness.push_back(flat);
        r.trajectory.push_back(traj);
        r.bound.push_back(flat + traj);
    }
    r.slope = loglog_slope(r.n_values, r.bound);
    std::vector<double> tail_n, tail_b;
    for (std::size_t i = 0; i < r.n_values.size(); ++i)
        if (r.n_values[i] >= *hi / 10.0) {
            tail_n.push_back(r.n_values[i]);
            tail_b.push_back(r.bound[i]);
        }
    r.tail_slope = tail_n.size() >= 2 ? loglog_slope(tail_n, tail_b) : r.slope;
    return r;
}

}  // namespace genbound
