#pragma once

// Trajectory terms of the generalization bounds.
//
//   sub-Gaussian:   sqrt(R^2 d / n * sum_s log(1 + eta_s^2 u_s / (d v_s)))
//                   u_s = tr V_s / b,  v_s = sigma_s^2 or |Sigma_s|^{1/d}
//   bounded:        c0 c1 / n * sqrt(sum_s 2 delta_s eta_s / sigma_s^2)
//                   (anisotropic: zeta_s and lambda_min in place of delta_s, sigma_s^2)
//   clipped sub-G:  sqrt(R^2 d / n * sum_s log(1 + A^2 eta_s^2 / v_s))
//   clipped bdd:    2 c0 sqrt(sum_s 2 delta_s A^2 b^2 eta_s / (n^2 sigma_s^2))

#include <cmath>
#include <map>
#include <tuple>
#include <span>
#include <utility>
#include <vector>

#include "genbound/bounds/step_integrals.hpp"
#include "genbound/error.hpp"

namespace genbound {

struct SubGaussianStep {
    double lr = 0.0;
    double noise_variance = 0.0;  // sigma_s^2, or |Sigma_s|^{1/d}
    double grad_var_trace = 0.0;  // tr V of per-sample gradients
    double batch_size = 1.0;
};

struct DiagonalSubGaussianStep {
    double lr = 0.0;
    std::vector<double> noise_diagonal;
    double grad_var_trace = 0.0;
    double batch_size = 1.0;
};

struct BoundedStep {
    double lr = 0.0;
    double noise_variance = 0.0;
    double alpha = 0.5;
};

struct AnisotropicBoundedStep {
    double lr = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double alpha = 0.5;
};

struct ClippedStep {
    double lr = 0.0;
    double noise_variance = 0.0;  // sigma_s^2, or |Sigma_s|^{1/d} for general noise
};

/// Neumaier-compensated running sum; long trajectory sums stay exact to a
/// few ulps regardless of step count.
class CompensatedSum {
   public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

   private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

namespace detail {

inline void check_variance(double v) {
    if (!(v > 0.0)) throw DomainError("noise variance must be positive");
}

inline void check_sizes(double d, double n) {
    if (!(d > 0.0) || !(n > 0.0)) throw DomainError("d and n must be positive");
}

}  // namespace detail

/// |Sigma|^{1/d} of a diagonal covariance, computed in log space.
inline double diagonal_det_root(std::span<const double> diag) {
    if (diag.empty()) throw DomainError("empty covariance diagonal");
    double log_sum = 0.0;
    for (double v : diag) {
        if (!(v > 0.0)) throw DomainError("covariance diagonal entries must be positive");
        log_sum += std::log(v);
    }
    return std::exp(log_sum / static_cast<double>(diag.size()));
}

inline double subgaussian_increment(const SubGaussianStep& s, double d) {
    detail::check_variance(s.noise_variance);
    if (!(s.grad_var_trace >= 0.0) || !(s.batch_size > 0.0)) throw DomainError("invalid trajectory step");
    return std::log1p(s.lr * s.lr * (s.grad_var_trace / s.batch_size) / (d * s.noise_variance));
}

inline double subgaussian_trajectory_from_sum(double increment_sum, double R, double d, double n) {
    detail::check_sizes(d, n);
    return std::sqrt(R * R * d / n * increment_sum);
}

inline double traj_subgaussian_bound(std::span<const SubGaussianStep> steps, double R, double d, double n) {
    detail::check_sizes(d, n);
    CompensatedSum sum;
    for (const auto& s : steps) sum.add(subgaussian_increment(s, d));
    return subgaussian_trajectory_from_sum(sum.value(), R, d, n);
}

/// General diagonal-noise version; d is the diagonal length.
inline double traj_subgaussian_general(std::span<const DiagonalSubGaussianStep> steps, double R, double n) {
    if (steps.empty()) return 0.0;
    const double d = static_cast<double>(steps.front().noise_diagonal.size());
    detail::check_sizes(d, n);
    CompensatedSum sum;
    for (const auto& s : steps) {
        if (static_cast<double>(s.noise_diagonal.size()) != d)
            throw DimensionError("noise diagonal length", static_cast<std::size_t>(d), s.noise_diagonal.size());
        sum.add(subgaussian_increment({s.lr, diagonal_det_root(s.noise_diagonal), s.grad_var_trace, s.batch_size}, d));
    }
    return subgaussian_trajectory_from_sum(sum.value(), R, d, n);
}

/// Memoized delta_s / zeta_s keyed by their arguments.
class StepIntegralCache {
   public:
    explicit StepIntegralCache(QuadratureSpec quad = {}) : quad_(quad) {}

    double delta(double eta, double alpha) { return lookup(eta, alpha, 1.0); }
    double zeta(double eta, double alpha, double lambda_min, double lambda_max) {
        if (!(lambda_min > 0.0) || !(lambda_min <= lambda_max))
            throw DomainError("zeta_s needs 0 < lambda_min <= lambda_max");
        return lookup(eta, alpha, lambda_min / lambda_max);
    }

   private:
    double lookup(double eta, double alpha, double ratio) {
        const auto key = std::make_tuple(eta, alpha, ratio);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const double v = ratio == 1.0 ? delta_s(eta, alpha, quad_) : zeta_s(eta, alpha, ratio, 1.0, quad_);
        cache_.emplace(key, v);
        return v;
    }

    QuadratureSpec quad_;
    std::map<std::tuple<double, double, double>, double> cache_;
};

inline double bounded_increment(const BoundedStep& s, StepIntegralCache& cache) {
    detail::check_variance(s.noise_variance);
    return 2.0 * cache.delta(s.lr, s.alpha) * s.lr / s.noise_variance;
}

inline double traj_bounded_bound(double c0, double c1, double n, std::span<const BoundedStep> steps,
                                 const QuadratureSpec& quad = {}) {
    if (!(n > 0.0)) throw DomainError("n must be positive");
    StepIntegralCache cache(quad);
    CompensatedSum sum;
    for (const auto& s : steps) sum.add(bounded_increment(s, cache));
    return c0 * c1 / n * std::sqrt(sum.value());
}

inline double traj_bounded_anisotropic(double c0, double c1, double n, std::span<const AnisotropicBoundedStep> steps,
                                       const QuadratureSpec& quad = {}) {
    if (!(n > 0.0)) throw DomainError("n must be positive");
    StepIntegralCache cache(quad);
    CompensatedSum sum;
    for (const auto& s : steps) sum.add(2.0 * cache.zeta(s.lr, s.alpha, s.lambda_min, s.lambda_max) * s.lr / s.lambda_min);
    return c0 * c1 / n * std::sqrt(sum.value());
}

inline double clipped_increment(double clip, const ClippedStep& s) {
    if (!(clip > 0.0)) throw DomainError("clip threshold must be positive");
    detail::check_variance(s.noise_variance);
    return std::log1p(clip * clip * s.lr * s.lr / s.noise_variance);
}

/// Clipped-SGD sub-Gaussian trajectory term; pass |Sigma_s|^{1/d} as the
/// variance for general diagonal noise.
inline double clipped_subgaussian_bound(double R, double d, double n, double clip, std::span<const ClippedStep> steps) {
    detail::check_sizes(d, n);
    CompensatedSum sum;
    for (const auto& s : steps) sum.add(clipped_increment(clip, s));
    return subgaussian_trajectory_from_sum(sum.value(), R, d, n);
}

inline double clipped_bounded_bound(double c0, double clip, double batch_size, double n,
                                    std::span<const BoundedStep> steps, const QuadratureSpec& quad = {}) {
    if (!(clip > 0.0) || !(batch_size > 0.0)) throw DomainError("clip threshold and batch size must be positive");
    if (!(n > 0.0)) throw DomainError("n must be positive");
    StepIntegralCache cache(quad);
    CompensatedSum sum;
    for (const auto& s : steps) {
        detail::check_variance(s.noise_variance);
        sum.add(2.0 * cache.delta(s.lr, s.alpha) * clip * clip * batch_size * batch_size * s.lr /
               (n * n * s.noise_variance));
    }
    return 2.0 * c0 * std::sqrt(sum.value());
}

inline double clipped_bounded_anisotropic(double c0, double clip, double batch_size, double n,
                                          std::span<const AnisotropicBoundedStep> steps,
                                          const QuadratureSpec& quad = {}) {
    if (!(clip > 0.0) || !(batch_size > 0.0)) throw DomainError("clip threshold and batch size must be positive");
    if (!(n > 0.0)) throw DomainError("n must be positive");
    StepIntegralCache cache(quad);
    CompensatedSum sum;
    for (const auto& s : steps)
        sum.add(2.0 * cache.zeta(s.lr, s.alpha, s.lambda_min, s.lambda_max) * clip * clip * batch_size * batch_size *
               s.lr / (n * n * s.lambda_min));
    return 2.0 * c0 * std::sqrt(sum.value());
}

}  // namespace genbound
