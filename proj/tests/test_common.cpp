#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "hrvbench/common.hpp"

using namespace hrvbench;

TEST(Rng, SameSeedSameStream) {
    Rng a(7), b(7), c(8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        differs = differs || x != c.next();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformInUnitInterval) {
    Rng r(1);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
    Rng r(2);
    std::vector<double> x(200000);
    for (auto& v : x) v = r.normal(3.0, 2.0);
    EXPECT_NEAR(mean(x), 3.0, 0.02);
    EXPECT_NEAR(std::sqrt(variance(x, 1)), 2.0, 0.02);
}

TEST(Rng, BelowIsUnbiasedAndBounded) {
    Rng r(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto k = r.below(7);
        ASSERT_LT(k, 7u);
        ++counts[k];
    }
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, ShuffleIsPermutation) {
    Rng r(4);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    r.shuffle(v);
    EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 50u);
    EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}

TEST(DeriveSeed, DependsOnEveryTag) {
    const auto base = derive_seed(42, {1, 2});
    EXPECT_EQ(base, derive_seed(42, {1, 2}));
    EXPECT_NE(base, derive_seed(42, {2, 1}));
    EXPECT_NE(base, derive_seed(43, {1, 2}));
    EXPECT_NE(base, derive_seed(42, {1}));
}

TEST(FormatG6, SixSignificantDigits) {
    EXPECT_EQ(format_g6(0.123456789), "0.123457");
    EXPECT_EQ(format_g6(157.78), "157.78");
    EXPECT_EQ(format_g6(1112237.03), "1.11224e+06");
    EXPECT_EQ(format_g6(std::optional<double>{}), "");
    EXPECT_EQ(format_g6(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_g6(std::nan("")), "");
}

TEST(ParallelFor, ResultsIndependentOfJobs) {
    std::vector<std::uint64_t> one(100), four(100);
    parallel_for(100, 1, [&](std::size_t i) { one[i] = derive_seed(i, {}); });
    parallel_for(100, 4, [&](std::size_t i) { four[i] = derive_seed(i, {}); });
    EXPECT_EQ(one, four);
}

TEST(ParallelFor, RethrowsFirstFailure) {
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 5) throw Error(ErrorCode::Io, "boom");
                              }),
                 Error);
}
