#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "genbound/data.hpp"
#include "genbound/parallel.hpp"
#include "genbound/rng.hpp"

using namespace genbound;

// Frozen from tests/oracles/philox_reference.py (independent Python Philox).
TEST(Philox, KnownAnswerSeedZero) {
    RngStream r(0, std::uint64_t{0}, 0);
    const std::uint64_t want[] = {0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL,
                                  0x7e68b68aec7ba23bULL, 0x2f4ba6408e4d89bULL,  0x3dd62b0b9ca8c5b2ULL};
    for (std::uint64_t w : want) EXPECT_EQ(r.next_u64(), w);
}

TEST(Philox, KnownAnswerKeyedStreams) {
    RngStream a(42, std::uint64_t{7}, 3);
    const std::uint64_t wa[] = {0x6686de13f4e76e49ULL, 0xc7cc266a1822d8b4ULL, 0x8e290484baa94d48ULL,
                                0x8c8f8ab136e96823ULL, 0x4683443810ae7c87ULL, 0x2bb645ee4a52c9a4ULL};
    for (std::uint64_t w : wa) EXPECT_EQ(a.next_u64(), w);
    RngStream b(20240611, std::uint64_t{2}, 5);
    const std::uint64_t wb[] = {0x5658c24a4c6f4601ULL, 0xb6c71caeda63d3b8ULL, 0x2baa3401703bf7a8ULL,
                                0xaafa1d40e510511eULL, 0xcfbbc577ac6c3029ULL, 0x5b362692da25b415ULL};
    for (std::uint64_t w : wb) EXPECT_EQ(b.next_u64(), w);
}

TEST(Philox, WithReplacementSamplerTraces) {
    BatchSampler s2(99, 4, 2, SamplingMode::with_replacement);
    EXPECT_EQ(s2.next_indices(), (std::vector<std::size_t>{0, 0, 1, 0}));
    BatchSampler s7(99, 12, 7, SamplingMode::with_replacement);
    EXPECT_EQ(s7.next_indices(), (std::vector<std::size_t>{6, 6, 3, 5, 1, 4, 6, 3, 3, 5, 3, 4}));
}

TEST(Rng, UniformInUnitInterval) {
    RngStream r(5, Stream::test_support);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform01();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, NormalMoments) {
    RngStream r(6, Stream::test_support);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Rng, ForkIsIndependentOfPosition) {
    RngStream a(1, Stream::probe, 0);
    a.next_u64();
    RngStream f1 = a.fork(9), f2 = RngStream(1, Stream::probe, 9);
    for (int i = 0; i < 8; ++i) EXPECT_EQ(f1.next_u64(), f2.next_u64());
}

TEST(Rng, UniformIndexRejectsZero) {
    RngStream r(1, Stream::test_support);
    EXPECT_THROW(r.uniform_index(0), DomainError);
}

TEST(Parallel, OrderIndependentOfThreadCount) {
    auto run = [] {
        return parallel_map(37, [](std::size_t i) {
            RngStream r(3, Stream::test_support, i);
            return r.normal();
        });
    };
    setenv("GENBOUND_THREADS", "1", 1);
    const auto one = run();
    setenv("GENBOUND_THREADS", "4", 1);
    const auto four = run();
    unsetenv("GENBOUND_THREADS");
    EXPECT_EQ(one, four);
}
