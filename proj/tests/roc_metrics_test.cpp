#include "oracles.hpp"

#include <wsauroc/roc_metrics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

using namespace wsauroc;

namespace {

using Groups = std::vector<std::vector<double>>;

auto physics(std::vector<double> w) -> PenaltyScheme { return PhysicsPenalty{PhysicalQuantityMap{std::move(w), "mm"}}; }

auto random_set(std::mt19937_64& rng, std::size_t max_index) -> SeverityScoreSet
{
    Groups groups(max_index + 1);
    for (auto& g : groups) g = oracle::duplicate_heavy(rng, oracle::random_length(rng, 1, 8));
    return SeverityScoreSet::from_groups(std::move(groups));
}

} // namespace

// --------------------------------------------------------------------------------------------------------------------

TEST(Auroc, CompleteSeparation)
{
    EXPECT_EQ(auroc(std::vector{0.1, 0.2, 0.3}, std::vector{0.4, 0.5, 0.6}), 1.0);
}

TEST(Auroc, AllTies)
{
    EXPECT_EQ(auroc(std::vector{5.0, 5.0}, std::vector{5.0, 5.0}), 0.5);
}

TEST(Auroc, PartialOverlapMatchesHandCount)
{
    // pos 2: one win, one tie; pos 3: two wins, one tie; pos 4: three wins -> 7 of 9
    std::vector neg{1.0, 2.0, 3.0}, pos{2.0, 3.0, 4.0};
    EXPECT_EQ(oracle::brute_force_auroc(neg, pos), 7.0 / 9.0);
    EXPECT_EQ(auroc(neg, pos), 7.0 / 9.0);
}

TEST(Auroc, Errors)
{
    std::vector<double> empty;
    EXPECT_THROW(auroc(empty, std::vector{1.0}), Error);
    EXPECT_THROW(auroc(std::vector{1.0}, empty), Error);
    EXPECT_THROW(auroc(std::vector<double>{NAN}, std::vector{1.0}), Error);
    EXPECT_THROW(auroc(std::vector{1.0}, std::vector<double>{INFINITY}), Error);
}

TEST(Auroc, OneIffPositivesAllAboveNegatives)
{
    std::mt19937_64 rng{11};
    for (int trial = 0; trial < 500; ++trial)
    {
        auto neg = oracle::duplicate_heavy(rng, oracle::random_length(rng, 1, 6));
        auto pos = oracle::duplicate_heavy(rng, oracle::random_length(rng, 1, 6));
        bool const separated = *std::min_element(pos.begin(), pos.end()) > *std::max_element(neg.begin(), neg.end());
        EXPECT_EQ(auroc(neg, pos) == 1.0, separated);
    }
}

TEST(AurocProperty, MatchesBruteForceBitwise)
{
    std::mt19937_64 rng{2024};
    for (int trial = 0; trial < 2000; ++trial)
    {
        auto neg = oracle::duplicate_heavy(rng, oracle::random_length(rng, 1, 12));
        auto pos = oracle::duplicate_heavy(rng, oracle::random_length(rng, 1, 12));
        ASSERT_EQ(auroc(neg, pos), oracle::brute_force_auroc(neg, pos));
    }
}

TEST(AurocProperty, ComplementSymmetry)
{
    std::mt19937_64 rng{5};
    for (int trial = 0; trial < 1000; ++trial)
    {
        auto a = oracle::duplicate_heavy(rng, oracle::random_length(rng, 1, 12));
        auto b = oracle::duplicate_heavy(rng, oracle::random_length(rng, 1, 12));
        EXPECT_NEAR(auroc(a, b) + auroc(b, a), 1.0, 1e-15);
    }
}

// --------------------------------------------------------------------------------------------------------------------

TEST(PairwiseAuroc, TwoLevels)
{
    auto const m = pairwise_auroc(SeverityScoreSet::from_groups({{0}, {1}}));
    EXPECT_EQ(m.at(0, 1), 1.0);
}

TEST(PairwiseAuroc, ReversedAnomalyLevels)
{
    auto const m = pairwise_auroc(SeverityScoreSet::from_groups({{0}, {2}, {1}}));
    EXPECT_EQ(m.at(0, 1), 1.0);
    EXPECT_EQ(m.at(0, 2), 1.0);
    EXPECT_EQ(m.at(1, 2), 0.0);
}

TEST(PairwiseAuroc, IdenticalDistributions)
{
    auto const m = pairwise_auroc(SeverityScoreSet::from_groups({{0, 1}, {0, 1}, {0, 1}}));
    for (double v : m.values()) EXPECT_EQ(v, 0.5);
}

TEST(PairwiseAuroc, LowerLevelIsNegativeClass)
{
    std::mt19937_64 rng{3};
    auto const set = random_set(rng, 4);
    auto const m = pairwise_auroc(set);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j <= 4; ++j)
            EXPECT_EQ(m.at(i, j), oracle::brute_force_auroc(set.group(i), set.group(j)));
    EXPECT_THROW(m.at(2, 2), Error);
    EXPECT_THROW(m.at(3, 5), Error);
}

// --------------------------------------------------------------------------------------------------------------------

TEST(PenaltyWeights, UniformThreeLevels)
{
    auto const p = penalty_weights(UniformPenalty{}, 2);
    ASSERT_EQ(p.size(), 3u);
    for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(PenaltyWeights, IndexThreeLevels)
{
    auto const p = penalty_weights(IndexPenalty{}, 2);
    EXPECT_DOUBLE_EQ(p.at(0, 1), 0.25);
    EXPECT_DOUBLE_EQ(p.at(1, 2), 0.25);
    EXPECT_DOUBLE_EQ(p.at(0, 2), 0.5);
}

TEST(PenaltyWeights, PhysicsBearingLadder)
{
    std::vector w{0.0, 0.3, 1.0, 3.0};
    double const denominator = oracle::physics_denominator(w);
    EXPECT_NEAR(denominator, 9.7, 1e-12);

    auto const p = penalty_weights(physics(w), 3);
    EXPECT_NEAR(p.at(0, 1), 0.3 / 9.7, 1e-15);
    EXPECT_NEAR(p.at(0, 1), 0.0309278, 1e-7);
    EXPECT_NEAR(p.at(2, 3), 0.2061856, 1e-7);
    EXPECT_NEAR(p.at(0, 3), 0.3092784, 1e-7);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j <= 3; ++j) EXPECT_NEAR(p.at(i, j), (w[j] - w[i]) / denominator, 1e-15);
}

TEST(PenaltyWeights, SinglePairIsOne)
{
    EXPECT_EQ(penalty_weights(UniformPenalty{}, 1).at(0, 1), 1.0);
    EXPECT_EQ(penalty_weights(IndexPenalty{}, 1).at(0, 1), 1.0);
    EXPECT_EQ(penalty_weights(physics({583.0, 1169.0}), 1).at(0, 1), 1.0);
}

TEST(PenaltyWeights, Errors)
{
    EXPECT_THROW(penalty_weights(UniformPenalty{}, 0), Error);
    EXPECT_THROW(penalty_weights(physics({0.0, 1.0}), 2), Error);
    EXPECT_THROW(penalty_weights(physics({0.0, 1.0, 1.0}), 2), Error);
    EXPECT_THROW(penalty_weights(physics({0.0, 2.0, 1.0}), 2), Error);
}

TEST(PenaltyWeightsProperty, NormalizedAndNonNegative)
{
    std::mt19937_64 rng{99};
    for (std::size_t n = 1; n <= 12; ++n)
    {
        std::vector<PenaltyScheme> schemes{UniformPenalty{}, IndexPenalty{}};
        for (int k = 0; k < 20; ++k) schemes.push_back(physics(oracle::increasing_quantities(rng, n + 1)));
        for (auto const& scheme : schemes)
        {
            auto const p = penalty_weights(scheme, n);
            double sum = 0.0;
            for (double v : p.values())
            {
                EXPECT_GE(v, 0.0);
                sum += v;
            }
            EXPECT_NEAR(sum, 1.0, 1e-12) << scheme_name(scheme) << " n=" << n;
        }
    }
}

// --------------------------------------------------------------------------------------------------------------------

TEST(WsAuroc, PerfectSeparationIsOne)
{
    auto const set = SeverityScoreSet::from_groups({{0, 0.1}, {1, 1.1}, {2}, {3, 3.5}});
    EXPECT_EQ(ws_auroc(set, UniformPenalty{}), 1.0);
    EXPECT_EQ(ws_auroc(set, IndexPenalty{}), 1.0);
    EXPECT_EQ(ws_auroc(set, physics({0.0, 0.3, 1.0, 3.0})), 1.0);
}

TEST(WsAuroc, ReversedAnomalyOrderFourLevels)
{
    // normal lowest, anomaly levels in reverse severity order
    auto const set = SeverityScoreSet::from_groups({{0.0}, {3.0}, {2.0}, {1.0}});
    EXPECT_NEAR(ws_auroc(set, UniformPenalty{}), 0.5, 1e-15);
    EXPECT_NEAR(ws_auroc(set, IndexPenalty{}), 0.6, 1e-15);
    EXPECT_NEAR(ws_auroc(set, physics({0.0, 0.3, 1.0, 3.0})), 4.3 / 9.7, 1e-15);
}

TEST(WsAuroc, IdenticalGroupsAreHalf)
{
    auto const set = SeverityScoreSet::from_groups({{1, 2}, {1, 2}, {1, 2}});
    EXPECT_EQ(ws_auroc(set, UniformPenalty{}), 0.5);
    EXPECT_EQ(ws_auroc(set, IndexPenalty{}), 0.5);
    EXPECT_EQ(ws_auroc(set, physics({0.0, 0.1, 0.5})), 0.5);
}

TEST(WsAuroc, RejectsMismatchedQuantities)
{
    auto const set = SeverityScoreSet::from_groups({{0}, {1}, {2}});
    EXPECT_THROW(ws_auroc(set, physics({0.0, 0.3, 1.0, 3.0})), Error);
}

TEST(WsAurocProperty, TwoLevelsReduceToAuroc)
{
    std::mt19937_64 rng{17};
    for (int trial = 0; trial < 300; ++trial)
    {
        auto const set = random_set(rng, 1);
        double const a = auroc(set.group(0), set.group(1));
        EXPECT_EQ(ws_auroc(set, UniformPenalty{}), a);
        EXPECT_EQ(ws_auroc(set, IndexPenalty{}), a);
        EXPECT_EQ(ws_auroc(set, physics(oracle::increasing_quantities(rng, 2))), a);
    }
}

TEST(WsAurocProperty, WithinUnitIntervalAndMatchesWeightedSum)
{
    std::mt19937_64 rng{23};
    for (int trial = 0; trial < 300; ++trial)
    {
        std::size_t const n = oracle::random_length(rng, 1, 6);
        auto const set = random_set(rng, n);
        auto const w = oracle::increasing_quantities(rng, n + 1);
        double const denominator = oracle::physics_denominator(w);

        // independent route: weights from the closed-form denominator, pair AUROCs by brute force
        double expected = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j <= n; ++j)
                expected += (w[j] - w[i]) / denominator * oracle::brute_force_auroc(set.group(i), set.group(j));

        double const a = ws_auroc(set, physics(w));
        EXPECT_NEAR(a, expected, 1e-12);
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
    }
}

TEST(WsAurocProperty, InvariantUnderIncreasingTransforms)
{
    std::mt19937_64 rng{31};
    std::vector<std::function<double(double)>> transforms{
        [](double x) { return 3.0 * x - 7.0; }, [](double x) { return std::exp(x); },
        [](double x) { return x * x * x; }, [](double x) { return std::atan(x); }};
    for (int trial = 0; trial < 100; ++trial)
    {
        std::size_t const n = oracle::random_length(rng, 1, 5);
        auto const set = random_set(rng, n);
        for (auto const& f : transforms)
        {
            auto groups = set.groups();
            for (auto& g : groups)
                for (auto& v : g) v = f(v);
            auto const moved = SeverityScoreSet::from_groups(groups);
            EXPECT_EQ(ws_auroc(moved, UniformPenalty{}), ws_auroc(set, UniformPenalty{}));
            EXPECT_EQ(ws_auroc(moved, IndexPenalty{}), ws_auroc(set, IndexPenalty{}));
            EXPECT_EQ(normal_vs_pooled_auroc(moved), normal_vs_pooled_auroc(set));
        }
    }
}

// --------------------------------------------------------------------------------------------------------------------

TEST(NormalVsPooled, Examples)
{
    EXPECT_EQ(normal_vs_pooled_auroc(SeverityScoreSet::from_groups({{0}, {1}, {2}})), 1.0);
    EXPECT_EQ(normal_vs_pooled_auroc(SeverityScoreSet::from_groups({{1}, {0}, {2}})), 0.5);
    EXPECT_EQ(normal_vs_pooled_auroc(SeverityScoreSet::from_groups({{0, 1}, {0, 1}})), 0.5);
}

TEST(NormalVsPooled, HighAurocDoesNotImplyHighWsAuroc)
{
    auto const set = SeverityScoreSet::from_groups({{0.0}, {3.0}, {2.0}, {1.0}});
    EXPECT_EQ(normal_vs_pooled_auroc(set), 1.0);
    EXPECT_LT(ws_auroc(set, UniformPenalty{}), 0.75);
}

TEST(MetricBias, Examples)
{
    EXPECT_DOUBLE_EQ(metric_bias(std::vector{1.0, 1.0}, std::vector{0.9, 0.8}), -0.15);
    EXPECT_EQ(metric_bias(std::vector{0.3, 0.7}, std::vector{0.3, 0.7}), 0.0);
    EXPECT_EQ(metric_bias(std::vector{0.5}, std::vector{1.0}), 0.5);
}

TEST(MetricBias, Errors)
{
    EXPECT_THROW(metric_bias(std::vector{1.0}, std::vector{1.0, 2.0}), Error);
    EXPECT_THROW(metric_bias(std::vector<double>{}, std::vector<double>{}), Error);
}
