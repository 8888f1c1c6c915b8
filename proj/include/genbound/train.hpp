#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genbound/data.hpp"
#include "genbound/mlp.hpp"
#include "genbound/optim.hpp"

namespace genbound {

/// Step size eta_k for k = 1, 2, ...; a per-step list repeats its last entry.
class LearningRateSchedule {
   public:
    LearningRateSchedule() = default;
    static LearningRateSchedule constant(double lr) { return LearningRateSchedule({lr}); }
    static LearningRateSchedule per_step(std::vector<double> lrs) { return LearningRateSchedule(std::move(lrs)); }

    double at(std::size_t k) const {
        if (k == 0) throw DomainError("learning-rate steps start at 1");
        return rates_[std::min(k, rates_.size()) - 1];
    }
    const std::vector<double>& rates() const noexcept { return rates_; }

   private:
    explicit LearningRateSchedule(std::vector<double> rates) : rates_(std::move(rates)) {
        if (rates_.empty()) throw DomainError("learning-rate schedule is empty");
        for (double r : rates_)
            if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("learning rates must be positive");
    }
    std::vector<double> rates_{0.01};
};

struct TrainConfig {
    LearningRateSchedule lr = LearningRateSchedule::constant(0.01);
    std::size_t batch_size = 64;
    std::size_t max_steps = 0;
    std::size_t steps_per_epoch = 0;  // 0: ceil(n / batch_size)
    std::optional<double> clip;
    SamplingMode sampling = SamplingMode::epoch_shuffle;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 0;  // 0 disables early stopping
    double early_stop_tolerance = 1e-4;

    // Bound constants.
    double R = 1.0;
    double c0 = 1.0;
    double c1 = 1.0;
    double alpha = 0.5;

    void validate() const {
        if (batch_size == 0) throw DomainError("batch size must be positive");
        if (clip && !(*clip > 0.0)) throw DomainError("clip threshold must be positive");
        if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
        if (!(R > 0.0) || !(c0 > 0.0) || !(c1 > 0.0)) throw DomainError("R, c0, c1 must be positive");
        if (!(early_stop_tolerance >= 0.0)) throw DomainError("early-stop tolerance must be non-negative");
    }
};

struct EvalMetrics {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    std::optional<double> test_loss;
    std::optional<double> test_accuracy;
};

struct StepRecord {
    std::size_t step = 0;
    std::size_t epoch = 0;  // 1-based epoch the step belongs to
    double lr = 0.0;
    double batch_loss = 0.0;
    double grad_norm = 0.0;  // before clipping
    bool clipped = false;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t step = 0;
    std::optional<EvalMetrics> metrics;
};

struct StepView {
    const StepRecord& record;
    std::span<const double> params;  // after the update
    std::span<const double> update_direction;  // (clipped) gradient applied
};

struct EpochView {
    const EpochRecord& record;
    std::span<const double> params;
};

/// Read-only hooks into the training loop.
class TrainingObserver {
   public:
    virtual ~TrainingObserver() = default;
    virtual void on_step(const StepView&) {}
    virtual void on_epoch(const EpochView&) {}
};

/// Something SGD can train: n samples, a mini-batch gradient, and
/// optionally whole-dataset evaluation (required for early stopping).
template <class P>
concept TrainingProblem = requires(const P& p, std::span<const double> theta, std::span<const std::size_t> idx,
                                   std::span<double> grad) {
    { p.sample_count() } -> std::convertible_to<std::size_t>;
    { p.batch_gradient(theta, idx, grad) } -> std::convertible_to<double>;
};

template <class P>
concept EvaluableProblem = TrainingProblem<P> && requires(const P& p, std::span<const double> theta) {
    { p.evaluate(theta) } -> std::convertible_to<EvalMetrics>;
};

enum class StopReason { completed, early_stopped, non_finite };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::completed: return "completed";
        case StopReason::early_stopped: return "early_stopped";
        case StopReason::non_finite: return "non_finite";
    }
    return "unknown";
}

struct NonFiniteDiagnostic {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double batch_loss = 0.0;
    double grad_norm = 0.0;
};

struct TrainResult {
    ParamVector params;
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
    StopReason stop_reason = StopReason::completed;
    std::optional<NonFiniteDiagnostic> diagnostic;
};

/// Mini-batch SGD (clipped when config.clip is set) for config.max_steps steps.
template <TrainingProblem P>
TrainResult run_training(const TrainConfig& config, ParamVector theta, const P& problem,
                         std::span<TrainingObserver* const> observers = {}) {
    config.validate();
    TrainResult result;
    const std::size_t n = problem.sample_count();
    if (config.max_steps == 0) {
        result.params = std::move(theta);
        return result;
    }
    BatchSampler sampler(config.seed, config.batch_size, n, config.sampling);
    const std::size_t per_epoch =
        config.steps_per_epoch > 0 ? config.steps_per_epoch : (n + config.batch_size - 1) / config.batch_size;

    ParamVector grad(theta.size());
    std::optional<double> best_test;
    std::size_t stale_epochs = 0;
    result.steps.reserve(config.max_steps);

    for (std::size_t k = 1; k <= config.max_steps; ++k) {
        StepRecord rec;
        rec.step = k;
        rec.epoch = (k - 1) / per_epoch + 1;
        rec.lr = config.lr.at(k);
        const auto idx = sampler.next_indices();
        rec.batch_loss = problem.batch_gradient(theta, idx, grad);
        rec.grad_norm = std::sqrt(squared_norm(grad));
        if (!std::isfinite(rec.batch_loss) || !std::isfinite(rec.grad_norm)) {
            result.stop_reason = StopReason::non_finite;
            result.diagnostic = NonFiniteDiagnostic{k, rec.epoch, rec.batch_loss, rec.grad_norm};
            break;
        }
        if (config.clip && rec.grad_norm > *config.clip) {
            grad = clip_gradient(grad, *config.clip);
            rec.clipped = true;
        }
        sgd_step_inplace(theta, grad, rec.lr);
        result.steps.push_back(rec);
        for (TrainingObserver* obs : observers) obs->on_step(StepView{result.steps.back(), theta, grad});

        if (k % per_epoch != 0) continue;
        EpochRecord ep;
        ep.epoch = rec.epoch;
        ep.step = k;
        if constexpr (EvaluableProblem<P>) ep.metrics = problem.evaluate(theta);
        result.epochs.push_back(ep);
        for (TrainingObserver* obs : observers) obs->on_epoch(EpochView{result.epochs.back(), theta});

        if (config.early_stop_patience > 0 && ep.metrics && ep.metrics->test_loss) {
            const double loss = *ep.metrics->test_loss;
            if (!best_test || loss < *best_test - config.early_stop_tolerance) {
                best_test = loss;
                stale_epochs = 0;
            } else if (++stale_epochs >= config.early_stop_patience) {
                result.stop_reason = StopReason::early_stopped;
                break;
            }
        }
    }
    result.params = std::move(theta);
    return result;
}

/// MLP classification on a training set, with an optional test set.
class MlpProblem {
   public:
    MlpProblem(MlpLayout layout, const Dataset& train, const Dataset* test = nullptr,
               LossKind kind = LossKind::cross_entropy())
        : layout_(std::move(layout)), train_(train), test_(test), kind_(kind) {
        train.validate();
        if (train.dims() != layout_.input_dim())
            throw DimensionError("training feature dims", layout_.input_dim(), train.dims());
    }

    const MlpLayout& layout() const noexcept { return layout_; }
    std::size_t sample_count() const noexcept { return train_.size(); }

    double batch_gradient(std::span<const double> theta, std::span<const std::size_t> idx,
                          std::span<double> grad) const {
        const Tensor2 x = gather_rows(train_.features.view(), idx);
        std::vector<int> y;
        y.reserve(idx.size());
        for (std::size_t i : idx) y.push_back(train_.labels[i]);
        ForwardCache cache;
        const Tensor2 logits = mlp_forward(layout_, theta, x.view(), cache);
        const ParamVector g = mlp_backward(layout_, theta, cache, y, kind_);
        std::copy(g.begin(), g.end(), grad.begin());
        if (kind_.type == LossKind::Type::pure_quadratic) return 0.5 * squared_norm(theta);
        double loss = 0.0;
        for (std::size_t i = 0; i < logits.rows(); ++i)
            loss += sample_loss(kind_, logits.row(i), static_cast<std::size_t>(y[i]));
        return loss / static_cast<double>(logits.rows());
    }

    EvalMetrics evaluate(std::span<const double> theta) const {
        EvalMetrics m;
        const BatchMetrics tr = evaluate_mlp(kind_, layout_, theta, train_.features.view(), train_.labels);
        m.train_loss = tr.mean_loss;
        m.train_accuracy = tr.accuracy;
        if (test_ != nullptr) {
            const BatchMetrics te = evaluate_mlp(kind_, layout_, theta, test_->features.view(), test_->labels);
            m.test_loss = te.mean_loss;
            m.test_accuracy = te.accuracy;
        }
        return m;
    }

   private:
    MlpLayout layout_;
    const Dataset& train_;
    const Dataset* test_;
    LossKind kind_;
};

/// 0.5 ||theta||^2 over n data-independent samples.
struct QuadraticProblem {
    std::size_t dims;
    std::size_t n;

    std::size_t sample_count() const noexcept { return n; }
    double batch_gradient(std::span<const double> theta, std::span<const std::size_t>, std::span<double> grad) const {
        std::copy(theta.begin(), theta.end(), grad.begin());
        return 0.5 * squared_norm(theta);
    }
    EvalMetrics evaluate(std::span<const double> theta) const {
        EvalMetrics m;
        m.train_loss = 0.5 * squared_norm(theta);
        return m;
    }
};

/// Samples eps_k at every step and keeps the surrogate noise bookkeeping.
class SurrogateTracker : public TrainingObserver {
   public:
    SurrogateTracker(NoiseSchedule schedule, std::size_t d, std::uint64_t noise_seed)
        : schedule_(std::move(schedule)), state_(d), seed_(noise_seed) {}

    void on_step(const StepView& view) override {
        const ParamVector eps = sample_noise(schedule_, view.record.step, view.params.size(), seed_);
        state_.record(eps);
        theta_.assign(view.params.begin(), view.params.end());
    }

    const SurrogateState& state() const noexcept { return state_; }
    ParamVector t1pm() const { return t1pm_virtual(theta_, state_); }
    ParamVector t2pm() const { return t2pm_virtual(theta_, state_.last_noise()); }

   private:
    NoiseSchedule schedule_;
    SurrogateState state_;
    std::uint64_t seed_;
    ParamVector theta_;
};

}  // namespace genbound
