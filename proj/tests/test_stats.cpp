#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "flatlyap/rng.hpp"
#include "flatlyap/stats.hpp"

using namespace flatlyap;

TEST(Stats, StudentQuantileReferenceValues) {
    EXPECT_NEAR(student_quantile_975(1), 12.7062, 1e-4);
    EXPECT_NEAR(student_quantile_975(19), 2.0930, 1e-4);
    EXPECT_NEAR(student_quantile_975(1000000), 1.95996, 1e-4);
}

TEST(Stats, BatchMeansOnKnownValues) {
    // four batches with means 1, 2, 3, 4
    const std::vector<double> v{1, 1, 2, 2, 3, 3, 4, 4};
    const BatchEstimate e = batch_means(v, 4);
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    const double sd = std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0);
    EXPECT_NEAR(e.ci, student_quantile_975(3) * sd / 2.0, 1e-12);
    EXPECT_EQ(e.n_batches, 4u);
}

TEST(Stats, BatchMeansSingleBatchHasInfiniteWidth) {
    const std::vector<double> v{1.0, 2.0};
    EXPECT_TRUE(std::isinf(batch_means(v, 1).ci));
}

TEST(Stats, BatchMeansCoverageOnGaussianData) {
    int covered = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        RandomStream rng(5, "coverage", static_cast<std::uint64_t>(r));
        std::vector<double> v(200);
        for (auto& x : v) x = rng.normal();
        const BatchEstimate e = batch_means(v, 20);
        covered += std::abs(e.mean) <= e.ci;
    }
    // binomial(400, 0.95): sd ~ 4.4
    EXPECT_GT(covered, 365);
}

TEST(Stats, MeanStderr) {
    const std::vector<double> v{1, 2, 3, 4};
    const MeanStderr m = mean_stderr(v);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(Stats, KsStatistic) {
    EXPECT_DOUBLE_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
    EXPECT_DOUBLE_EQ(ks_statistic({1, 2}, {3, 4}), 1.0);
    EXPECT_NEAR(ks_critical(100, 100, 0.05), 1.358 * std::sqrt(0.02), 1e-3);
}
