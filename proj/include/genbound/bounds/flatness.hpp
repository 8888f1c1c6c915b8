#pragma once

// Flatness term: xi = 2 E[f(theta + eps) - f(theta)], eps ~ N(0, Sigma).
//
// Estimated with m antithetic draws: each draw eps_j contributes
// f(theta + eps_j) + f(theta - eps_j) - 2 f(theta), an unbiased sample of
// xi. Draw j uses substream (base.substream() << 32) | j of the caller's
// stream, so the estimate does not depend on the thread count.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "genbound/error.hpp"
#include "genbound/objective.hpp"
#include "genbound/optim.hpp"
#include "genbound/parallel.hpp"
#include "genbound/rng.hpp"

namespace genbound {

struct FlatnessEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

namespace detail {

inline RngStream draw_stream(const RngStream& base, std::size_t j) {
    return base.fork((base.substream() << 32) | static_cast<std::uint64_t>(j));
}

/// scales is either a single isotropic scale or one scale per coordinate.
template <Objective F>
FlatnessEstimate antithetic_flatness(const F& f, std::span<const double> theta, const std::vector<double>& scales,
                                     std::size_t m, const RngStream& rng) {
    if (m < 2) throw DomainError("flatness estimate needs at least 2 samples");
    if (theta.size() != f.dimension()) throw DimensionError("flatness parameter length", f.dimension(), theta.size());
    const std::size_t d = theta.size();
    const bool iso = scales.size() == 1;
    if (!iso && scales.size() != d) throw DimensionError("flatness noise length", d, scales.size());
    const double base = f.value(theta);
    const std::vector<double> draws = parallel_map(m, [&](std::size_t j) {
        RngStream local = draw_stream(rng, j);
        std::vector<double> plus(d), minus(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double e = (iso ? scales[0] : scales[i]) * local.normal();
            plus[i] = theta[i] + e;
            minus[i] = theta[i] - e;
        }
        return f.value(plus) + f.value(minus) - 2.0 * base;
    });
    double mean = 0.0;
    for (double v : draws) mean += v;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : draws) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(m - 1);
    return {mean, std::sqrt(var / static_cast<double>(m)), m};
}

}  // namespace detail

/// Flatness at step k with fresh noise eps_k ~ N(0, Sigma_k).
template <Objective F>
FlatnessEstimate flatness_estimate(const F& f, std::span<const double> theta, const NoiseSchedule& schedule,
                                   std::size_t k, std::size_t m, const RngStream& rng) {
    schedule.check_dimension(theta.size());
    std::vector<double> scales;
    if (schedule.is_isotropic()) {
        scales.push_back(schedule.sigma(k));
    } else {
        scales.resize(theta.size());
        for (std::size_t i = 0; i < scales.size(); ++i) scales[i] = std::sqrt(schedule.variance(k, i));
    }
    return detail::antithetic_flatness(f, theta, scales, m, rng);
}

/// Convenience overload for a single isotropic scale.
template <Objective F>
FlatnessEstimate flatness_estimate(const F& f, std::span<const double> theta, double sigma, std::size_t m,
                                   const RngStream& rng) {
    return flatness_estimate(f, theta, NoiseSchedule::isotropic(sigma), 1, m, rng);
}

/// Flatness with the accumulated perturbation sum_{t<=k} eps_t, whose
/// covariance is sum_{t<=k} Sigma_t.
template <Objective F>
FlatnessEstimate flatness_t1pm(const F& f, std::span<const double> theta, const NoiseSchedule& schedule, std::size_t k,
                               std::size_t m, const RngStream& rng) {
    if (k == 0) throw DomainError("flatness_t1pm needs k >= 1");
    schedule.check_dimension(theta.size());
    std::vector<double> scales;
    if (schedule.is_isotropic()) {
        scales.push_back(std::sqrt(schedule.cumulative_variance(k, 0)));
    } else {
        scales.assign(theta.size(), 0.0);
        for (std::size_t t = 1; t <= (schedule.is_constant() ? 1 : k); ++t)
            for (std::size_t i = 0; i < scales.size(); ++i) scales[i] += schedule.variance(t, i);
        const double reps = schedule.is_constant() ? static_cast<double>(k) : 1.0;
        for (double& s : scales) s = std::sqrt(reps * s);
    }
    return detail::antithetic_flatness(f, theta, scales, m, rng);
}

}  // namespace genbound
