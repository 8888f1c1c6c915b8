#pragma once

// Per-epoch bound trace.
//
// At the end of every epoch the observer evaluates, on a fixed probe batch:
//   flatness_t2pm  fresh-noise flatness at step k
//   flatness_t1pm  flatness at the accumulated variance sum_{t<=k} sigma_t^2
//   tr V           per-sample gradient variance trace
// and extends the trajectory sums:
//   sub-Gaussian   every step of the epoch uses the epoch's tr V / b
//   bounded        2 delta_s eta_s / sigma_s^2, per step
//   clipped        log(1 + A^2 eta_s^2 / sigma_s^2), per step
// The sub-Gaussian and bounded columns add |flatness|; the clipped column is
// the clipped trajectory term alone.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "genbound/bounds/flatness.hpp"
#include "genbound/bounds/grad_stats.hpp"
#include "genbound/bounds/trajectory.hpp"
#include "genbound/objective.hpp"
#include "genbound/optim.hpp"
#include "genbound/rng.hpp"
#include "genbound/train.hpp"

namespace genbound {

struct BoundRecord {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double train_loss = 0.0;
    std::optional<double> test_loss;
    std::optional<double> gap;
    std::optional<double> train_accuracy;
    std::optional<double> test_accuracy;
    double flatness_t2pm = 0.0;
    double flatness_t2pm_se = 0.0;
    double flatness_t1pm = 0.0;
    double flatness_t1pm_se = 0.0;
    double grad_var_trace = 0.0;
    double traj_increment = 0.0;
    double traj_subgaussian = 0.0;
    double bound_subg_t2pm = 0.0;
    double bound_subg_t1pm = 0.0;
    std::optional<double> bound_bounded;
    std::optional<double> bound_clipped;
    double sigma_k = 0.0;
};

struct BoundOptions {
    bool subgaussian = true;
    bool bounded = true;
    bool clipped = true;  // only when the training config clips
    std::size_t flatness_samples = 32;
    std::uint64_t seed = 0;
    QuadratureSpec quad{};
};

/// Training observer producing one BoundRecord per epoch.
template <PerSampleObjective Probe>
class BoundObserver : public TrainingObserver {
   public:
    BoundObserver(const Probe& probe, NoiseSchedule schedule, const TrainConfig& config, std::size_t n,
                  BoundOptions options = {})
        : probe_(probe),
          schedule_(std::move(schedule)),
          config_(config),
          n_(static_cast<double>(n)),
          d_(static_cast<double>(probe.dimension())),
          options_(options),
          integrals_(options.quad) {
        schedule_.check_dimension(probe.dimension());
        if (options_.flatness_samples < 2) throw DomainError("flatness needs at least 2 samples");
    }

    void on_step(const StepView& view) override {
        const std::size_t k = view.record.step;
        const double lr = view.record.lr;
        const double v = schedule_.det_root(k);
        pending_.push_back({lr, v});
        if (options_.bounded) {
            if (!schedule_.is_isotropic()) {
                const double lmin = schedule_.min_variance(k);
                const double lmax = schedule_.max_variance(k);
                bounded_sum_.add(2.0 * integrals_.zeta(lr, config_.alpha, lmin, lmax) * lr / lmin);
            } else {
                bounded_sum_.add(bounded_increment({lr, v, config_.alpha}, integrals_));
            }
        }
        if (options_.clipped && config_.clip) clipped_sum_.add(clipped_increment(*config_.clip, {lr, v}));
    }

    void on_epoch(const EpochView& view) override {
        const std::size_t k = view.record.step;
        const std::size_t epoch = view.record.epoch;
        BoundRecord r;
        r.epoch = epoch;
        r.step = k;
        if (view.record.metrics) {
            const EvalMetrics& m = *view.record.metrics;
            r.train_loss = m.train_loss;
            r.train_accuracy = m.train_accuracy;
            r.test_loss = m.test_loss;
            r.test_accuracy = m.test_accuracy;
            if (m.test_loss) r.gap = *m.test_loss - m.train_loss;
        }
        r.sigma_k = std::sqrt(schedule_.det_root(k));

        // Common random numbers: every epoch reuses the same m standard-normal
        // directions, rescaled to the current variance, so epoch-to-epoch
        // differences are not swamped by Monte-Carlo noise.
        const std::size_t m = options_.flatness_samples;
        const FlatnessEstimate f2 =
            flatness_estimate(probe_, view.params, schedule_, k, m, RngStream(options_.seed, Stream::flatness_t2pm, 0));
        const FlatnessEstimate f1 =
            flatness_t1pm(probe_, view.params, schedule_, k, m, RngStream(options_.seed, Stream::flatness_t1pm, 0));
        r.flatness_t2pm = f2.value;
        r.flatness_t2pm_se = f2.std_error;
        r.flatness_t1pm = f1.value;
        r.flatness_t1pm_se = f1.std_error;

        if (options_.subgaussian) {
            r.grad_var_trace = per_sample_grad_stats(probe_, view.params).variance_trace;
            const double b = static_cast<double>(config_.batch_size);
            CompensatedSum inc;
            for (const auto& [lr, v] : pending_) inc.add(subgaussian_increment({lr, v, r.grad_var_trace, b}, d_));
            r.traj_increment = inc.value();
            subg_sum_.add(r.traj_increment);
            r.traj_subgaussian = subgaussian_trajectory_from_sum(subg_sum_.value(), config_.R, d_, n_);
            r.bound_subg_t2pm = std::abs(r.flatness_t2pm) + r.traj_subgaussian;
            r.bound_subg_t1pm = std::abs(r.flatness_t1pm) + r.traj_subgaussian;
        }
        pending_.clear();
        if (options_.bounded)
            r.bound_bounded = std::abs(r.flatness_t2pm) + config_.c0 * config_.c1 / n_ * std::sqrt(bounded_sum_.value());
        if (options_.clipped && config_.clip)
            r.bound_clipped = subgaussian_trajectory_from_sum(clipped_sum_.value(), config_.R, d_, n_);
        records_.push_back(r);
    }

    const std::vector<BoundRecord>& records() const noexcept { return records_; }
    bool subgaussian_enabled() const noexcept { return options_.subgaussian; }

   private:
    struct PendingStep {
        double lr;
        double variance;
    };

    const Probe& probe_;
    NoiseSchedule schedule_;
    TrainConfig config_;
    double n_;
    double d_;
    BoundOptions options_;
    StepIntegralCache integrals_;
    std::vector<PendingStep> pending_;
    CompensatedSum subg_sum_;
    CompensatedSum bounded_sum_;
    CompensatedSum clipped_sum_;
    std::vector<BoundRecord> records_;
};

// ---------------------------------------------------------------- CSV

inline constexpr const char* kTraceHeader =
    "epoch,step,train_loss,test_loss,gap,flatness_t2pm,flatness_t1pm,traj_increment,bound_subg_t2pm,"
    "bound_subg_t1pm,bound_bounded,bound_clipped,sigma_k";

/// %.9g; empty string for an absent value.
inline std::string format_value(std::optional<double> v) {
    if (!v) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return buf;
}

/// Writes the trace. Sub-Gaussian columns are empty when sub-Gaussian
/// bounds were not computed.
inline void write_trace_csv(std::ostream& out, const std::vector<BoundRecord>& records, bool subgaussian = true) {
    out << kTraceHeader << '\n';
    auto opt = [subgaussian](double v) { return subgaussian ? std::optional<double>(v) : std::nullopt; };
    for (const auto& r : records) {
        out << r.epoch << ',' << r.step << ',' << format_value(r.train_loss) << ',' << format_value(r.test_loss) << ','
            << format_value(r.gap) << ',' << format_value(r.flatness_t2pm) << ',' << format_value(r.flatness_t1pm)
            << ',' << format_value(opt(r.traj_increment)) << ',' << format_value(opt(r.bound_subg_t2pm)) << ','
            << format_value(opt(r.bound_subg_t1pm)) << ',' << format_value(r.bound_bounded) << ','
            << format_value(r.bound_clipped) << ',' << format_value(r.sigma_k) << '\n';
    }
}

}  // namespace genbound
