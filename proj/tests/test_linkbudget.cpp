#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "molcomm/linkbudget.hpp"
#include "molcomm/montecarlo.hpp"

using namespace molcomm;

namespace {

// 0.01 molecules per mm^2, t = 100 s, D = 1e-9 m^2/s
const ReceptionRule kRule{1e4, 0.9};
const auto kChannel = ChannelParams::free_diffusion(1.0, 1e-9, 100.0);
const DiskRegion kRegion(1.2e-3);

double success_at(double molecules, double threshold, double radius)
{
    return success_probability({threshold, 0.9},
                               SignalDistribution(kChannel.with_molecules(molecules), DiskRegion(radius)));
}

} // namespace

TEST(ReceptionRule, Validation)
{
    EXPECT_THROW((ReceptionRule{0.0, 0.9}.validate()), std::invalid_argument);
    EXPECT_THROW((ReceptionRule{1.0, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((ReceptionRule{1.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((ReceptionRule{1.0, 0.5}.validate()));
}

TEST(SuccessProbability, Limits)
{
    const SignalDistribution dist(kChannel.with_molecules(50.0), kRegion);
    EXPECT_EQ(success_probability({dist.y_max() * 1.01, 0.9}, dist), 0.0);
    EXPECT_NEAR(success_probability({dist.y_min() * 0.99, 0.9}, dist), 1.0, 1e-10);
    EXPECT_THROW(success_probability({0.0, 0.9}, dist), std::invalid_argument);
}

TEST(SuccessProbability, MonotoneOnGrid)
{
    const std::vector<double> molecules{5, 20, 60, 150, 400};
    const std::vector<double> thresholds{3e3, 6e3, 1e4, 2e4, 4e4};
    const std::vector<double> radii{0.9e-3, 1.0e-3, 1.2e-3, 1.4e-3, 1.6e-3};
    const double slack = 1e-12;
    for (std::size_t i = 0; i < molecules.size(); ++i)
        for (std::size_t j = 0; j < thresholds.size(); ++j)
            for (std::size_t k = 0; k < radii.size(); ++k)
            {
                const double p = success_at(molecules[i], thresholds[j], radii[k]);
                if (i + 1 < molecules.size())
                    EXPECT_GE(success_at(molecules[i + 1], thresholds[j], radii[k]), p - slack);
                if (j + 1 < thresholds.size())
                    EXPECT_LE(success_at(molecules[i], thresholds[j + 1], radii[k]), p + slack);
                if (k + 1 < radii.size())
                    EXPECT_LE(success_at(molecules[i], thresholds[j], radii[k + 1]), p + slack);
            }
}

TEST(SuccessProbability, DependsOnlyOnRatioOfMoleculesToThreshold)
{
    for (double m : {10.0, 37.0, 120.0})
        EXPECT_NEAR(success_at(m, 1e4, 1.2e-3), success_at(10.0 * m, 1e5, 1.2e-3), 1e-12);
}

TEST(SuccessProbability, DriftUsesBothBranches)
{
    const auto drift = ChannelParams::drift_diffusion(1.0, 1e-9, 1e9, 2e-9);
    const SignalDistribution single(drift, DiskRegion(2.0), DriftBranches::PaperSingleBranch);
    const SignalDistribution both(drift, DiskRegion(2.0));
    const ReceptionRule rule{both.y_min() * 0.5, 0.9};
    EXPECT_NEAR(success_probability(rule, single), 1.0, 1e-9);
    EXPECT_EQ(success_probability(rule, single), success_probability(rule, both));
}

TEST(ThresholdMolecules, BracketsTheTarget)
{
    const double m_star = threshold_molecules(kRule, kChannel, kRegion);
    const double p = success_probability(kRule, SignalDistribution(kChannel.with_molecules(m_star), kRegion));
    EXPECT_GE(p, 0.9);
    EXPECT_LE(p, 0.901);
    const double below = success_probability(
        kRule, SignalDistribution(kChannel.with_molecules(0.99 * m_star), kRegion));
    EXPECT_LT(below, 0.9);
}

TEST(ThresholdMolecules, IgnoresCarriedMoleculeCount)
{
    EXPECT_EQ(threshold_molecules(kRule, kChannel, kRegion),
              threshold_molecules(kRule, kChannel.with_molecules(500.0), kRegion));
}

TEST(ThresholdMolecules, DoublingThresholdDoublesMolecules)
{
    const double base = threshold_molecules(kRule, kChannel, kRegion);
    const double doubled = threshold_molecules({2.0 * kRule.threshold, 0.9}, kChannel, kRegion);
    EXPECT_EQ(doubled, 2.0 * base);
}

TEST(ThresholdMolecules, SolverConsistencyAcrossTargets)
{
    for (double target : {0.1, 0.5, 0.75, 0.95})
    {
        const ReceptionRule rule{kRule.threshold, target};
        const double m = threshold_molecules(rule, kChannel, kRegion);
        const double p = success_probability(rule, SignalDistribution(kChannel.with_molecules(m), kRegion));
        EXPECT_GE(p, target);
        EXPECT_LE(p, target + 1e-3);
    }
}

TEST(ThresholdMolecules, UnachievableTarget)
{
    EXPECT_THROW(threshold_molecules({1e4, 0.999}, kChannel, DiskRegion(3e-3)), UnachievableTarget);
    EXPECT_THROW(threshold_molecules({1e4, 0.9}, kChannel, kRegion, {1e-4, 10.0}), UnachievableTarget);
}

TEST(RadiusSweep, IncreasingAndDeterministic)
{
    const auto sweep = radius_sweep(kRule, kChannel, {1.1e-3, 1.2e-3, 1.2e-3, 1.3e-3});
    ASSERT_EQ(sweep.size(), 4u);
    for (const auto& entry : sweep)
        ASSERT_TRUE(entry.molecules.has_value()) << entry.error;
    EXPECT_LT(*sweep[0].molecules, *sweep[1].molecules);
    EXPECT_EQ(*sweep[1].molecules, *sweep[2].molecules);
    EXPECT_LT(*sweep[2].molecules, *sweep[3].molecules);
    EXPECT_THROW(radius_sweep(kRule, kChannel, {1.3e-3, 1.2e-3}), std::invalid_argument);
}

TEST(RadiusSweep, RecordsFailuresAndContinues)
{
    const auto sweep = radius_sweep({1e4, 0.999}, kChannel, {1.2e-3, 3e-3});
    ASSERT_TRUE(sweep[0].molecules.has_value());
    EXPECT_FALSE(sweep[1].molecules.has_value());
    EXPECT_FALSE(sweep[1].error.empty());
}

TEST(SuccessProbability, MonteCarloCrossCheck)
{
    const std::uint64_t n = 100000;
    for (double m : {20.0, 40.0, 80.0})
    {
        const auto params = kChannel.with_molecules(m);
        const double p = success_probability(kRule, SignalDistribution(params, kRegion));
        const auto emp = simulate(params, kRegion, n, 31);
        EXPECT_NEAR(exceedance_fraction(emp, kRule.threshold), p,
                    3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)) + 1e-12)
            << "M = " << m;
    }
}
