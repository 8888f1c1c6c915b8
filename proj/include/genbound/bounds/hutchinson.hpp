#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "genbound/error.hpp"
#include "genbound/objective.hpp"
#include "genbound/parallel.hpp"
#include "genbound/rng.hpp"

namespace genbound {

struct TraceEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t probes = 0;
};

/// Hutchinson estimate of tr(Hessian) with Rademacher probes v:
/// v^T H v, where H v = (grad(theta + h v) - grad(theta - h v)) / (2 h).
/// Probe j draws from substream (rng.substream() << 32) | j.
template <DifferentiableObjective F>
TraceEstimate hutchinson_trace(const F& f, std::span<const double> theta, std::size_t num_probes,
                               const RngStream& rng, double h = 1e-4) {
    if (num_probes < 1) throw DomainError("hutchinson_trace needs at least one probe");
    if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
    const std::size_t d = theta.size();
    const auto samples = parallel_map(num_probes, [&](std::size_t j) {
        RngStream local = rng.fork((rng.substream() << 32) | j);
        std::vector<double> v(d), plus(d), minus(d), gp(d), gm(d);
        for (std::size_t i = 0; i < d; ++i) {
            v[i] = (local.next_u64() >> 63) ? 1.0 : -1.0;
            plus[i] = theta[i] + h * v[i];
            minus[i] = theta[i] - h * v[i];
        }
        f.gradient(plus, gp);
        f.gradient(minus, gm);
        double quad = 0.0;
        for (std::size_t i = 0; i < d; ++i) quad += v[i] * (gp[i] - gm[i]);
        return quad / (2.0 * h);
    });
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(num_probes);
    double se = 0.0;
    if (num_probes > 1) {
        double ss = 0.0;
        for (double s : samples) ss += (s - mean) * (s - mean);
        se = std::sqrt(ss / static_cast<double>(num_probes - 1) / static_cast<double>(num_probes));
    }
    return {mean, se, num_probes};
}

}  // namespace genbound
