#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "genbound/check.hpp"
#include "genbound/data.hpp"
#include "genbound/mlp.hpp"

using namespace genbound;

namespace {

// Straight-line re-implementation: nested loops over the canonical layout.
std::vector<double> naive_logits(const std::vector<std::size_t>& dims, const ParamVector& p,
                                 const std::vector<double>& x) {
    std::vector<double> a = x;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t in = dims[l], out = dims[l + 1];
        std::vector<double> z(out, 0.0);
        for (std::size_t j = 0; j < out; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < in; ++i) s += a[i] * p[off + i * out + j];
            z[j] = s + p[off + in * out + j];
            if (l + 2 < dims.size()) z[j] = std::max(0.0, z[j]);
        }
        off += in * out + out;
        a = z;
    }
    return a;
}

}  // namespace

TEST(Forward, ZeroModelGivesLogTen) {
    const MlpModel m({5, 7, 10});
    Tensor2 x(3, 5);
    for (std::size_t i = 0; i < 15; ++i) x.values()[i] = 0.1 * static_cast<double>(i);
    ForwardCache cache;
    const Tensor2 logits = mlp_forward(m, x.view(), cache);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(cross_entropy(logits.row(i), i % 10), std::log(10.0), 1e-12);
}

TEST(Forward, IdentityLayerPassesInput) {
    ParamVector p(4 * 4 + 4, 0.0);
    for (std::size_t i = 0; i < 4; ++i) p[i * 4 + i] = 1.0;
    const MlpModel m = MlpModel::unflatten({4, 4}, p);
    const Tensor2 x(2, 4, {1, -2, 3, 0.5, 0, 7, -1, 2});
    ForwardCache cache;
    EXPECT_EQ(mlp_forward(m, x.view(), cache), x);
}

TEST(Forward, MatchesStraightLineOracle) {
    const std::vector<std::size_t> dims{6, 9, 8, 4};
    const MlpModel m = MlpModel::he_uniform(dims, 17);
    const Dataset ds = synth_gaussian_mixture(5, 6, 4, 3);
    const Tensor2 logits = mlp_logits(m.layout(), m.params(), ds.features.view());
    for (std::size_t r = 0; r < 5; ++r) {
        const auto row = ds.features.row(r);
        const auto want = naive_logits(dims, m.params(), std::vector<double>(row.begin(), row.end()));
        for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(logits(r, c), want[c], 1e-12);
    }
}

TEST(Forward, DeterministicAndDimensionChecked) {
    const MlpModel m = MlpModel::he_uniform({6, 5, 3}, 2);
    const Dataset ds = synth_gaussian_mixture(4, 6, 3, 3);
    EXPECT_EQ(mlp_logits(m.layout(), m.params(), ds.features.view()),
              mlp_logits(m.layout(), m.params(), ds.features.view()));
    const Tensor2 wrong(2, 5);
    ForwardCache cache;
    EXPECT_THROW(mlp_forward(m, wrong.view(), cache), DimensionError);
}

TEST(Backward, FiniteDifferencesAcrossWidths) {
    for (std::size_t w : {4, 16, 64}) {
        const auto r = gradient_check(w, 200, 100 + w);
        EXPECT_LT(r.max_rel_error, 1e-4) << "width " << w;
    }
}

TEST(Backward, ZeroInputGivesZeroFirstLayerWeightGradient) {
    MlpModel m = MlpModel::he_uniform({5, 6, 3}, 4);
    const Tensor2 x(2, 5);
    ForwardCache cache;
    mlp_forward(m, x.view(), cache);
    const std::vector<int> y{0, 2};
    const ParamVector g = mlp_backward(m, cache, y);
    for (std::size_t i = 0; i < 5 * 6; ++i) EXPECT_EQ(g[i], 0.0);
}

TEST(Backward, DuplicatedSampleEqualsSingle) {
    const MlpModel m = MlpModel::he_uniform({4, 6, 3}, 5);
    const Tensor2 one(1, 4, {0.2, -0.4, 1.0, 0.3});
    const Tensor2 two(2, 4, {0.2, -0.4, 1.0, 0.3, 0.2, -0.4, 1.0, 0.3});
    ForwardCache c1, c2;
    mlp_forward(m, one.view(), c1);
    mlp_forward(m, two.view(), c2);
    const std::vector<int> y1{1}, y2{1, 1};
    const ParamVector g1 = mlp_backward(m, c1, y1), g2 = mlp_backward(m, c2, y2);
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g1[i], g2[i], 1e-15);
}

TEST(Backward, StaleCacheRejected) {
    MlpModel m = MlpModel::he_uniform({4, 6, 3}, 5);
    const Tensor2 x(1, 4, {0.2, -0.4, 1.0, 0.3});
    ForwardCache cache;
    mlp_forward(m, x.view(), cache);
    m.params()[0] += 1.0;
    const std::vector<int> y{0};
    EXPECT_THROW(mlp_backward(m, cache, y), StaleCacheError);
}

TEST(Loss, TruncatedQuadraticAndLimit) {
    std::vector<double> z(10, 0.0);
    EXPECT_NEAR(cross_entropy(z, 3), 2.302585093, 1e-9);
    const LossKind t = LossKind::truncated_cross_entropy(0.5);
    EXPECT_EQ(sample_loss(t, z, 3), 0.5);
    const MlpModel q = MlpModel::unflatten({1, 1}, {3.0, 4.0});
    const Tensor2 x(1, 1, {1.0});
    const std::vector<int> y{0};
    EXPECT_EQ(loss_eval(LossKind::pure_quadratic(), q, x.view(), y), 12.5);
    double prev = 1e9;
    for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
        std::vector<double> logits{scale, 0.0, 0.0};
        const double ce = cross_entropy(logits, 0);
        EXPECT_LT(ce, prev);
        prev = ce;
    }
    EXPECT_LT(prev, 1e-12);
}

TEST(Loss, TruncatedBoundedByC0AndCrossEntropy) {
    RngStream r(1, Stream::test_support);
    const LossKind t = LossKind::truncated_cross_entropy(1.3);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> z(5);
        for (double& v : z) v = 4.0 * r.normal();
        const std::size_t y = r.uniform_index(5);
        const double tl = sample_loss(t, z, y);
        EXPECT_LE(tl, 1.3);
        EXPECT_LE(tl, cross_entropy(z, y));
        EXPECT_GE(tl, 0.0);
    }
}

TEST(Layout, ParamCountAndRoundTrip) {
    const MlpLayout l({784, 512, 10});
    EXPECT_EQ(l.param_count(), 784u * 512 + 512 + 512 * 10 + 10);
    RngStream r(2, Stream::test_support);
    ParamVector v(MlpLayout({7, 5, 3}).param_count());
    r.fill_normal(v);
    const MlpModel m = MlpModel::unflatten({7, 5, 3}, v);
    EXPECT_EQ(m.flatten(), v);
}

TEST(Tensor, RejectsNonFiniteAndBadLength) {
    EXPECT_THROW(Tensor2(2, 2, {1, 2, 3}), DimensionError);
    EXPECT_THROW(Tensor2(1, 2, {1, std::nan("")}), DomainError);
}
