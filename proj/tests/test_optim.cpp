#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "genbound/optim.hpp"
#include "genbound/train.hpp"

using namespace genbound;

TEST(Sgd, Arithmetic) {
    const ParamVector t{1, 1}, g{1, -1}, z{0, 0};
    const ParamVector a = sgd_step(t, g, 0.1);
    EXPECT_DOUBLE_EQ(a[0], 0.9);
    EXPECT_DOUBLE_EQ(a[1], 1.1);
    EXPECT_EQ(sgd_step(t, z, 0.1), t);
    const ParamVector two = sgd_step(sgd_step(t, g, 0.1), g, 0.1);
    EXPECT_NEAR(two[0], 0.8, 1e-15);
    EXPECT_NEAR(two[1], 1.2, 1e-15);
    EXPECT_THROW(sgd_step(t, ParamVector{1}, 0.1), DimensionError);
}

TEST(Clip, Cases) {
    EXPECT_EQ(clip_gradient(ParamVector{3, 4}, 5), (ParamVector{3, 4}));
    const ParamVector c = clip_gradient(ParamVector{6, 8}, 5);
    EXPECT_DOUBLE_EQ(c[0], 3);
    EXPECT_DOUBLE_EQ(c[1], 4);
    EXPECT_EQ(clip_gradient(ParamVector{0, 0}, 5), (ParamVector{0, 0}));
    EXPECT_EQ(clip_gradient(c, 5), c);
    EXPECT_THROW(clip_gradient(c, 0.0), DomainError);
}

TEST(Noise, DegenerateScale) {
    const ParamVector e = sample_noise(NoiseSchedule::isotropic(1e-12), 1, 100, 3);
    EXPECT_LT(std::sqrt(squared_norm(e)), 1e-6 * 10);
}

TEST(Noise, EmpiricalVariance) {
    const NoiseSchedule s = NoiseSchedule::isotropic(0.005);
    RngStream r(8, Stream::surrogate_noise, 1);
    const ParamVector e = sample_noise(s, 1, 100000, r);
    double ss = 0;
    for (double v : e) ss += v * v;
    EXPECT_NEAR(ss / 1e5, 2.5e-5, 0.05 * 2.5e-5);
}

TEST(Noise, DiagonalMatchesIsotropicKs) {
    const double sigma = 0.3;
    const NoiseSchedule iso = NoiseSchedule::isotropic(sigma);
    const NoiseSchedule diag = NoiseSchedule::diagonal(std::vector<double>(100, sigma * sigma));
    std::vector<double> a, b;
    for (std::size_t k = 1; k <= 100; ++k) {
        RngStream ra(1, Stream::test_support, k), rb(2, Stream::test_support, k);
        const auto ea = sample_noise(iso, k, 100, ra), eb = sample_noise(diag, k, 100, rb);
        a.insert(a.end(), ea.begin(), ea.end());
        b.insert(b.end(), eb.begin(), eb.end());
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double dmax = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i; else ++j;
        dmax = std::max(dmax, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    const double n = double(a.size());
    EXPECT_LT(dmax, 1.628 * std::sqrt(2.0 / n));  // two-sample KS critical value at 0.01
}

TEST(Noise, ScheduleRules) {
    EXPECT_THROW(NoiseSchedule::isotropic(0.0), DomainError);
    EXPECT_THROW(NoiseSchedule::diagonal({1.0, -1.0}), DomainError);
    const NoiseSchedule s = NoiseSchedule::isotropic_steps({0.1, 0.2});
    EXPECT_DOUBLE_EQ(s.sigma(2), 0.2);
    EXPECT_THROW(s.sigma(3), DomainError);
    EXPECT_NEAR(s.cumulative_variance(2, 0), 0.05, 1e-15);
    EXPECT_NEAR(NoiseSchedule::scaling_law(2.0, 0.5, 100).sigma(1), 0.2, 1e-15);
    EXPECT_NEAR(NoiseSchedule::diagonal({1e-4, 1e-6}).det_root(1), 1e-5, 1e-18);
}

TEST(Surrogates, ClosedForms) {
    SurrogateState st(2);
    st.record(ParamVector{0.1, -0.1});
    const ParamVector th{1, 2};
    const ParamVector t1 = t1pm_virtual(th, st), t2 = t2pm_virtual(th, st.last_noise());
    EXPECT_DOUBLE_EQ(t1[0], 1.1);
    EXPECT_DOUBLE_EQ(t1[1], 1.9);
    EXPECT_EQ(t1, t2);
    EXPECT_EQ(t2pm_virtual(th, ParamVector{0, 0}), th);
    EXPECT_EQ(t1pm_virtual(th, SurrogateState(2)), th);
}

TEST(Surrogates, RecursionMatchesClosedForm) {
    const std::size_t d = 5;
    RngStream r(4, Stream::test_support);
    const NoiseSchedule s = NoiseSchedule::isotropic(0.01);
    ParamVector theta(d), rec(d);
    r.fill_normal(theta);
    rec = theta;
    SurrogateState st(d);
    for (std::size_t k = 1; k <= 50; ++k) {
        ParamVector g(d);
        r.fill_normal(g);
        const ParamVector eps = sample_noise(s, k, d, 9);
        sgd_step_inplace(theta, g, 0.05);
        for (std::size_t i = 0; i < d; ++i) rec[i] = rec[i] - 0.05 * g[i] + eps[i];
        st.record(eps);
    }
    const ParamVector closed = t1pm_virtual(theta, st);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(closed[i], rec[i], 1e-12);
}

TEST(Surrogates, SecondMomentGrowsWithK) {
    const std::size_t d = 20, k = 25, trials = 400;
    const NoiseSchedule s = NoiseSchedule::isotropic(0.1);
    double last = 0, cum = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        SurrogateState st(d);
        for (std::size_t j = 1; j <= k; ++j) {
            RngStream r(t, Stream::surrogate_noise, j);
            st.record(sample_noise(s, j, d, r));
        }
        last += squared_norm(st.last_noise());
        cum += squared_norm(st.cumulative_noise());
    }
    EXPECT_NEAR(last / trials, d * 0.01, 0.1 * d * 0.01);
    EXPECT_NEAR(cum / trials, k * d * 0.01, 0.1 * k * d * 0.01);
    EXPECT_GE(cum, last);
}

TEST(Training, ZeroStepsReturnsInitial) {
    TrainConfig c;
    c.max_steps = 0;
    const ParamVector th{1, 2};
    const TrainResult r = run_training(c, th, QuadraticProblem{2, 4});
    EXPECT_EQ(r.params, th);
    EXPECT_TRUE(r.steps.empty());
}

TEST(Training, QuadraticLinearDynamics) {
    TrainConfig c;
    c.lr = LearningRateSchedule::constant(0.1);
    c.batch_size = 4;
    c.max_steps = 30;
    const ParamVector th{1.5, -2.0};
    const TrainResult r = run_training(c, th, QuadraticProblem{2, 4});
    for (std::size_t i = 0; i < 2; ++i) {
        double want = th[i];
        for (int k = 0; k < 30; ++k) want -= 0.1 * want;
        EXPECT_DOUBLE_EQ(r.params[i], want);
    }
}

TEST(Training, DeterministicReplayAndNoiseIsolation) {
    const Dataset ds = synth_gaussian_mixture(64, 5, 3, 2);
    const MlpModel m = MlpModel::he_uniform({5, 8, 3}, 1);
    const MlpProblem p(m.layout(), ds);
    TrainConfig c;
    c.batch_size = 8;
    c.max_steps = 40;
    c.seed = 5;
    auto run = [&](std::uint64_t noise_seed) {
        SurrogateTracker tr(NoiseSchedule::isotropic(0.1), m.param_count(), noise_seed);
        TrainingObserver* obs[] = {&tr};
        return run_training(c, m.params(), p, obs);
    };
    const TrainResult a = run(1), b = run(2);
    EXPECT_EQ(a.params, b.params);
    for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].batch_loss, b.steps[i].batch_loss);
}

TEST(Training, HugeClipEqualsPlainSgd) {
    const Dataset ds = synth_gaussian_mixture(64, 5, 3, 2);
    const MlpModel m = MlpModel::he_uniform({5, 8, 3}, 1);
    const MlpProblem p(m.layout(), ds);
    TrainConfig c;
    c.batch_size = 8;
    c.max_steps = 40;
    const TrainResult plain = run_training(c, m.params(), p);
    c.clip = 1e300;
    EXPECT_EQ(run_training(c, m.params(), p).params, plain.params);
    c.clip = 0.01;
    const TrainResult clipped = run_training(c, m.params(), p);
    EXPECT_NE(clipped.params, plain.params);
    for (std::size_t k = 1; k < clipped.steps.size(); ++k) EXPECT_TRUE(clipped.steps[k].clipped);
}

TEST(Training, NonFiniteAborts) {
    const Dataset ds = synth_gaussian_mixture(32, 5, 3, 2);
    const MlpModel m = MlpModel::he_uniform({5, 8, 3}, 1);
    const MlpProblem p(m.layout(), ds);
    TrainConfig c;
    c.lr = LearningRateSchedule::constant(1e200);
    c.batch_size = 8;
    c.max_steps = 50;
    const TrainResult r = run_training(c, m.params(), p);
    EXPECT_EQ(r.stop_reason, StopReason::non_finite);
    ASSERT_TRUE(r.diagnostic.has_value());
    EXPECT_GT(r.diagnostic->step, 1u);
}

TEST(Training, EarlyStopping) {
    // Zero test gain after the first epoch triggers a stop after P epochs.
    struct Flat : QuadraticProblem {
        EvalMetrics evaluate(std::span<const double>) const {
            EvalMetrics m;
            m.test_loss = 1.0;
            return m;
        }
    };
    TrainConfig c;
    c.batch_size = 2;
    c.max_steps = 100;
    c.early_stop_patience = 3;
    const TrainResult r = run_training(c, ParamVector{1.0}, Flat{{1, 4}});
    EXPECT_EQ(r.stop_reason, StopReason::early_stopped);
    EXPECT_EQ(r.epochs.size(), 4u);
}

TEST(Config, Validation) {
    TrainConfig c;
    c.alpha = 1.0;
    EXPECT_THROW(c.validate(), DomainError);
    c.alpha = 0.5;
    c.clip = -1.0;
    EXPECT_THROW(c.validate(), DomainError);
    EXPECT_THROW(LearningRateSchedule::constant(0.0), DomainError);
}
