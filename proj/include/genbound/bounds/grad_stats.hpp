#pragma once

#include <span>
#include <vector>

#include "genbound/error.hpp"
#include "genbound/objective.hpp"
#include "genbound/parallel.hpp"
#include "genbound/tensor.hpp"

namespace genbound {

/// Mean and total variance (population convention) of per-sample gradients.
struct GradStats {
    ParamVector mean;
    double variance_trace = 0.0;
    std::size_t count = 0;
};

/// tr V = (1/m) sum_i ||g_i - mean||^2, two-pass.
inline GradStats grad_variance_trace(std::span<const ParamVector> grads) {
    if (grads.size() < 2) throw DomainError("gradient variance needs at least 2 gradients");
    const std::size_t d = grads.front().size();
    GradStats st;
    st.count = grads.size();
    st.mean.assign(d, 0.0);
    for (const auto& g : grads) {
        if (g.size() != d) throw DimensionError("per-sample gradient length", d, g.size());
        for (std::size_t j = 0; j < d; ++j) st.mean[j] += g[j];
    }
    for (double& v : st.mean) v /= static_cast<double>(st.count);
    double ss = 0.0;
    for (const auto& g : grads)
        for (std::size_t j = 0; j < d; ++j) ss += (g[j] - st.mean[j]) * (g[j] - st.mean[j]);
    st.variance_trace = ss / static_cast<double>(st.count);
    return st;
}

/// Streaming Welford accumulator with pairwise merge.
class GradStatsAccumulator {
   public:
    explicit GradStatsAccumulator(std::size_t d = 0) : mean_(d, 0.0) {}

    void add(std::span<const double> g) {
        if (count_ == 0 && mean_.empty()) mean_.assign(g.size(), 0.0);
        if (g.size() != mean_.size()) throw DimensionError("per-sample gradient length", mean_.size(), g.size());
        ++count_;
        const double inv = 1.0 / static_cast<double>(count_);
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double before = g[j] - mean_[j];
            mean_[j] += before * inv;
            m2_ += before * (g[j] - mean_[j]);
        }
    }

    void merge(const GradStatsAccumulator& other) {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        if (other.mean_.size() != mean_.size()) throw DimensionError("merge length", mean_.size(), other.mean_.size());
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(other.count_);
        const double n = na + nb;
        double shift = 0.0;
        for (std::size_t j = 0; j < mean_.size(); ++j) {
            const double delta = other.mean_[j] - mean_[j];
            shift += delta * delta;
            mean_[j] += delta * nb / n;
        }
        m2_ += other.m2_ + shift * na * nb / n;
        count_ += other.count_;
    }

    GradStats stats() const {
        if (count_ < 2) throw DomainError("gradient variance needs at least 2 gradients");
        return {mean_, std::max(0.0, m2_ / static_cast<double>(count_)), count_};
    }

   private:
    ParamVector mean_;
    double m2_ = 0.0;
    std::size_t count_ = 0;
};

/// Per-sample gradient statistics of an objective at theta. Samples are
/// processed in fixed chunks merged in index order.
template <PerSampleObjective F>
GradStats per_sample_grad_stats(const F& f, std::span<const double> theta, std::size_t chunk = 32) {
    const std::size_t m = f.sample_count();
    if (m < 2) throw DomainError("gradient variance needs at least 2 samples");
    const std::size_t chunks = (m + chunk - 1) / chunk;
    const auto partial = parallel_map(chunks, [&](std::size_t c) {
        GradStatsAccumulator acc(f.dimension());
        ParamVector g(f.dimension());
        const std::size_t end = std::min(m, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
            f.sample_gradient(theta, i, g);
            acc.add(g);
        }
        return acc;
    });
    GradStatsAccumulator total(f.dimension());
    for (const auto& p : partial) total.merge(p);
    return total.stats();
}

}  // namespace genbound
