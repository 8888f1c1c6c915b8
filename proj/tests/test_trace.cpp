#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "genbound/genbound.hpp"

using namespace genbound;

namespace {

struct TraceRun {
    std::vector<BoundRecord> records;
    std::size_t d = 0;
    std::size_t n = 0;
    TrainConfig config;
};

TraceRun small_run(std::optional<double> clip, bool subgaussian = true) {
    const Dataset all = synth_gaussian_mixture(300, 6, 3, 4);
    const Dataset train = all.shuffled_slice(0, 200, 1), test = all.shuffled_slice(200, 60, 1),
                  probe = all.shuffled_slice(260, 40, 1);
    const MlpModel m = MlpModel::he_uniform({6, 12, 3}, 3);
    const MlpProblem p(m.layout(), train, &test);
    const MlpObjective f(m.layout(), probe.features.view(), probe.labels);
    TraceRun r;
    r.config.batch_size = 16;
    r.config.max_steps = 13 * 4;
    r.config.clip = clip;
    BoundOptions o;
    o.flatness_samples = 8;
    o.subgaussian = subgaussian;
    BoundObserver<MlpObjective> obs(f, NoiseSchedule::isotropic(0.005), r.config, train.size(), o);
    TrainingObserver* list[] = {&obs};
    run_training(r.config, m.params(), p, list);
    r.records = obs.records();
    r.d = m.param_count();
    r.n = train.size();
    return r;
}

}  // namespace

TEST(Trace, AdditiveDecompositionAndMonotoneSums) {
    const TraceRun r = small_run(std::nullopt);
    ASSERT_EQ(r.records.size(), 4u);
    double prev_traj = 0.0, prev_bdd = 0.0;
    for (const auto& rec : r.records) {
        EXPECT_GE(rec.traj_increment, 0.0);
        EXPECT_GE(rec.traj_subgaussian, prev_traj);
        EXPECT_DOUBLE_EQ(rec.bound_subg_t2pm, std::abs(rec.flatness_t2pm) + rec.traj_subgaussian);
        EXPECT_DOUBLE_EQ(rec.bound_subg_t1pm, std::abs(rec.flatness_t1pm) + rec.traj_subgaussian);
        ASSERT_TRUE(rec.bound_bounded);
        const double bdd = *rec.bound_bounded - std::abs(rec.flatness_t2pm);
        EXPECT_GE(bdd, prev_bdd - 1e-15);
        EXPECT_FALSE(rec.bound_clipped);
        ASSERT_TRUE(rec.gap && rec.test_loss);
        EXPECT_DOUBLE_EQ(*rec.gap, *rec.test_loss - rec.train_loss);
        EXPECT_EQ(rec.sigma_k, 0.005);
        prev_traj = rec.traj_subgaussian;
        prev_bdd = bdd;
    }
    // Bounded trajectory after k steps equals the closed-form chain.
    const std::vector<BoundedStep> steps(r.records.back().step, {0.01, 2.5e-5, 0.5});
    EXPECT_NEAR(*r.records.back().bound_bounded - std::abs(r.records.back().flatness_t2pm),
                traj_bounded_bound(1, 1, static_cast<double>(r.n), steps), 1e-12);
}

TEST(Trace, ClippedColumnMatchesClosedForm) {
    const TraceRun r = small_run(0.05);
    double prev = 0.0;
    for (const auto& rec : r.records) {
        ASSERT_TRUE(rec.bound_clipped);
        const double closed = std::sqrt(static_cast<double>(r.d) * static_cast<double>(rec.step) *
                                        std::log1p(25e-4 * 1e-4 / 2.5e-5) / static_cast<double>(r.n));
        EXPECT_NEAR(*rec.bound_clipped, closed, 1e-12);
        EXPECT_GE(*rec.bound_clipped, prev);
        prev = *rec.bound_clipped;
    }
}

TEST(Trace, CsvSchemaAndEmptyCells) {
    const TraceRun r = small_run(std::nullopt, false);
    std::ostringstream out;
    write_trace_csv(out, r.records, false);
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    EXPECT_EQ(header,
              "epoch,step,train_loss,test_loss,gap,flatness_t2pm,flatness_t1pm,traj_increment,bound_subg_t2pm,"
              "bound_subg_t1pm,bound_bounded,bound_clipped,sigma_k");
    std::getline(in, row);
    const auto cells = split_csv_line(row);
    ASSERT_EQ(cells.size(), 13u);
    EXPECT_EQ(cells[0], "1");
    EXPECT_TRUE(cells[7].empty());
    EXPECT_TRUE(cells[8].empty());
    EXPECT_TRUE(cells[11].empty());
    EXPECT_FALSE(cells[10].empty());
    EXPECT_EQ(format_value(1.0 / 3.0), "0.333333333");
}
