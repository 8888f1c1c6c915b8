#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "genbound/error.hpp"
#include "genbound/rng.hpp"
#include "genbound/tensor.hpp"

namespace genbound {

/// theta' = theta - lr * grad
inline ParamVector sgd_step(std::span<const double> theta, std::span<const double> grad, double lr) {
    if (theta.size() != grad.size()) throw DimensionError("sgd_step gradient length", theta.size(), grad.size());
    ParamVector out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - lr * grad[i];
    return out;
}

inline void sgd_step_inplace(std::span<double> theta, std::span<const double> grad, double lr) {
    if (theta.size() != grad.size()) throw DimensionError("sgd_step gradient length", theta.size(), grad.size());
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
}

/// min(1, A / ||g||) * g. A zero gradient stays zero.
inline ParamVector clip_gradient(std::span<const double> grad, double threshold) {
    if (!(threshold > 0.0)) throw DomainError("clip threshold must be positive");
    ParamVector out(grad.begin(), grad.end());
    const double norm = std::sqrt(squared_norm(grad));
    if (norm > threshold) {
        const double scale = threshold / norm;
        for (double& g : out) g *= scale;
    }
    return out;
}

/// Per-step perturbation covariance: isotropic sigma_k^2 I or diagonal.
/// Steps are numbered from 1. A schedule given as a list is defined for
/// k = 1..size(); a constant schedule is defined for every k >= 1.
class NoiseSchedule {
   public:
    static NoiseSchedule isotropic(double sigma) { return isotropic_steps({sigma}, true); }

    static NoiseSchedule isotropic_steps(std::vector<double> sigmas, bool constant = false) {
        if (sigmas.empty()) throw DomainError("noise schedule is empty");
        for (double s : sigmas)
            if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("noise scale must be positive and finite");
        NoiseSchedule out;
        out.sigmas_ = std::move(sigmas);
        out.constant_ = constant;
        return out;
    }

    /// Constant sigma = c * n^-gamma.
    static NoiseSchedule scaling_law(double c, double gamma, std::size_t n) {
        if (n == 0) throw DomainError("scaling law needs n > 0");
        return isotropic(c * std::pow(static_cast<double>(n), -gamma));
    }

    static NoiseSchedule diagonal(std::vector<double> variances) { return diagonal_steps({std::move(variances)}, true); }

    static NoiseSchedule diagonal_steps(std::vector<std::vector<double>> per_step, bool constant = false) {
        if (per_step.empty() || per_step.front().empty()) throw DomainError("noise schedule is empty");
        const std::size_t d = per_step.front().size();
        for (const auto& diag : per_step) {
            if (diag.size() != d) throw DimensionError("diagonal noise length", d, diag.size());
            for (double v : diag)
                if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("diagonal noise entries must be positive");
        }
        NoiseSchedule out;
        out.diagonals_ = std::move(per_step);
        out.constant_ = constant;
        return out;
    }

    bool is_isotropic() const noexcept { return diagonals_.empty(); }
    bool is_constant() const noexcept { return constant_; }

    /// Number of explicitly defined steps (1 for constant schedules).
    std::size_t defined_steps() const noexcept { return is_isotropic() ? sigmas_.size() : diagonals_.size(); }

    /// Isotropic standard deviation at step k.
    double sigma(std::size_t k) const {
        if (!is_isotropic()) throw DomainError("sigma() requested from a diagonal schedule");
        return sigmas_[index(k)];
    }

    /// Variance of coordinate i at step k.
    double variance(std::size_t k, std::size_t i) const {
        if (is_isotropic()) {
            const double s = sigmas_[index(k)];
            return s * s;
        }
        return diagonals_[index(k)].at(i);
    }

    /// |Sigma_k|^{1/d}: geometric mean of the diagonal, sigma_k^2 when isotropic.
    double det_root(std::size_t k) const {
        if (is_isotropic()) return variance(k, 0);
        const auto& diag = diagonals_[index(k)];
        double log_sum = 0.0;
        for (double v : diag) log_sum += std::log(v);
        return std::exp(log_sum / static_cast<double>(diag.size()));
    }

    double min_variance(std::size_t k) const {
        if (is_isotropic()) return variance(k, 0);
        const auto& diag = diagonals_[index(k)];
        return *std::min_element(diag.begin(), diag.end());
    }
    double max_variance(std::size_t k) const {
        if (is_isotropic()) return variance(k, 0);
        const auto& diag = diagonals_[index(k)];
        return *std::max_element(diag.begin(), diag.end());
    }

    /// sum_{t <= k} variance(t, i): covariance of the accumulated perturbation.
    double cumulative_variance(std::size_t k, std::size_t i) const {
        if (k == 0) throw DomainError("cumulative variance needs k >= 1");
        if (constant_) return static_cast<double>(k) * variance(1, i);
        double s = 0.0;
        for (std::size_t t = 1; t <= k; ++t) s += variance(t, i);
        return s;
    }

    /// Dimension fixed by a diagonal schedule, 0 when isotropic.
    std::size_t fixed_dimension() const noexcept { return is_isotropic() ? 0 : diagonals_.front().size(); }

    void check_dimension(std::size_t d) const {
        if (!is_isotropic() && diagonals_.front().size() != d)
            throw DimensionError("diagonal noise length", d, diagonals_.front().size());
    }

   private:
    std::size_t index(std::size_t k) const {
        if (k == 0) throw DomainError("noise schedule steps start at 1");
        if (constant_) return 0;
        if (k > defined_steps())
            throw DomainError("noise schedule undefined at step " + std::to_string(k));
        return k - 1;
    }

    std::vector<double> sigmas_;
    std::vector<std::vector<double>> diagonals_;
    bool constant_ = false;
};

/// eps_k ~ N(0, Sigma_k) from the given stream.
inline ParamVector sample_noise(const NoiseSchedule& schedule, std::size_t k, std::size_t d, RngStream& rng) {
    schedule.check_dimension(d);
    ParamVector eps(d);
    rng.fill_normal(eps);
    if (schedule.is_isotropic()) {
        const double s = schedule.sigma(k);
        for (double& e : eps) e *= s;
    } else {
        for (std::size_t i = 0; i < d; ++i) eps[i] *= std::sqrt(schedule.variance(k, i));
    }
    return eps;
}

/// eps_k for step k of the surrogate-noise stream of `seed`.
inline ParamVector sample_noise(const NoiseSchedule& schedule, std::size_t k, std::size_t d, std::uint64_t seed) {
    RngStream rng(seed, Stream::surrogate_noise, k);
    return sample_noise(schedule, k, d, rng);
}

/// Noise bookkeeping for the two perturbed surrogates. Used for analysis
/// only; nothing here touches the trained parameters.
class SurrogateState {
   public:
    explicit SurrogateState(std::size_t d) : cumulative_(d, 0.0), last_(d, 0.0) {}

    void record(std::span<const double> eps) {
        if (eps.size() != cumulative_.size()) throw DimensionError("surrogate noise length", cumulative_.size(), eps.size());
        for (std::size_t i = 0; i < eps.size(); ++i) cumulative_[i] += eps[i];
        last_.assign(eps.begin(), eps.end());
        ++step_;
    }

    const ParamVector& cumulative_noise() const noexcept { return cumulative_; }
    const ParamVector& last_noise() const noexcept { return last_; }
    std::size_t step() const noexcept { return step_; }

   private:
    ParamVector cumulative_;
    ParamVector last_;
    std::size_t step_ = 0;
};

/// Accumulated-noise surrogate: theta_k + sum_{t<=k} eps_t.
inline ParamVector t1pm_virtual(std::span<const double> theta, const SurrogateState& state) {
    const auto& acc = state.cumulative_noise();
    if (acc.size() != theta.size()) throw DimensionError("t1pm parameter length", acc.size(), theta.size());
    ParamVector out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] + acc[i];
    return out;
}

/// Fresh-noise surrogate: theta_k + eps_k.
inline ParamVector t2pm_virtual(std::span<const double> theta, std::span<const double> eps) {
    if (eps.size() != theta.size()) throw DimensionError("t2pm noise length", theta.size(), eps.size());
    ParamVector out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] + eps[i];
    return out;
}

}  // namespace genbound
