#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "molcomm/geometry.hpp"

using namespace molcomm;

namespace {

// 40-digit reference values (mpmath) for the unit disk.
constexpr double kPdfAtOne = 0.782004437911541283822;
constexpr double kMeanUnitDisk = 0.905414787367226799; // 128 / (45 pi)
constexpr double kSquaredPdfAtOne = 0.391002218955770642;

struct CdfReference
{
    double x;
    double value;
};
constexpr CdfReference kCdfUnitDisk[] = {
    {0.2, 0.0366080935007982595},
    {1.0, 0.586503328433655963},
    {1.8, 0.988841129709649686},
    {1.998, 0.999999878625632367},
};

double boost_distance_cdf(double x, const DiskRegion& region)
{
    if (x <= 0.0)
        return 0.0;
    if (x >= region.diameter())
        return 1.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return distance_pdf(t, region); }, 0.0, x, 15, 1e-14);
}

template<class Cdf>
double ks(std::vector<double> samples, Cdf&& cdf)
{
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const double f = cdf(samples[i]);
        worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - f),
                          std::abs(static_cast<double>(i) / n - f)});
    }
    return worst;
}

} // namespace

TEST(DiskRegion, RejectsNonPositiveRadius)
{
    EXPECT_THROW(DiskRegion(0.0), std::invalid_argument);
    EXPECT_THROW(DiskRegion(-1.0), std::invalid_argument);
    EXPECT_THROW(DiskRegion(std::numeric_limits<double>::infinity()), std::invalid_argument);
    EXPECT_THROW(DiskRegion(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    EXPECT_EQ(DiskRegion(2.5).diameter(), 5.0);
}

TEST(Sampling, PointsStayInDiskAndAreDeterministic)
{
    const DiskRegion region(3e-3);
    auto a = make_stream(42);
    auto b = make_stream(42);
    for (int i = 0; i < 10000; ++i)
    {
        const auto p = sample_uniform_point(region, a);
        const auto q = sample_uniform_point(region, b);
        EXPECT_LE(std::hypot(p.x, p.y), region.radius() * (1 + 1e-15));
        ASSERT_EQ(p.x, q.x);
        ASSERT_EQ(p.y, q.y);
    }
}

TEST(Sampling, RadialDistributionIsAreaUniform)
{
    const DiskRegion region(2.0);
    auto rng = make_stream(7);
    std::vector<double> rho(100000);
    for (auto& v : rho)
    {
        const auto p = sample_uniform_point(region, rng);
        v = std::hypot(p.x, p.y);
    }
    EXPECT_LT(ks(rho, [](double r) { return r * r / 4.0; }), 0.01);
}

TEST(Sampling, DistinctStreamsDiffer)
{
    auto a = make_stream(1, 0);
    auto b = make_stream(1, 1);
    auto c = make_stream(2, 0);
    const auto x = a();
    EXPECT_NE(x, b());
    EXPECT_NE(x, c());
}

TEST(Sampling, PairDistanceWithinDiameterWithCorrectMean)
{
    const DiskRegion region(1.0);
    auto rng = make_stream(2024);
    std::vector<double> d(100000);
    double sum = 0.0;
    for (auto& v : d)
    {
        v = sample_pair_distance(region, rng).value;
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 2.0);
        sum += v;
    }
    EXPECT_NEAR(sum / static_cast<double>(d.size()), kMeanUnitDisk, 0.01 * kMeanUnitDisk);
    EXPECT_LT(ks(d, [&](double x) { return boost_distance_cdf(x, region); }), 0.01);
}

TEST(DistancePdf, ReferenceValues)
{
    const DiskRegion unit(1.0);
    EXPECT_EQ(distance_pdf(0.0, unit), 0.0);
    EXPECT_EQ(distance_pdf(2.0, unit), 0.0);
    EXPECT_EQ(distance_pdf(-0.5, unit), 0.0);
    EXPECT_EQ(distance_pdf(2.5, unit), 0.0);
    EXPECT_NEAR(distance_pdf(1.0, unit), kPdfAtOne, 1e-15);

    // scaling: f(x; r) = f(x / r; 1) / r
    const DiskRegion scaled(3e-3);
    EXPECT_NEAR(distance_pdf(3e-3, scaled), kPdfAtOne / 3e-3, 1e-12 * kPdfAtOne / 3e-3);
}

TEST(DistancePdf, CdfMatchesReference)
{
    const DiskRegion unit(1.0);
    for (const auto& ref : kCdfUnitDisk)
        EXPECT_NEAR(boost_distance_cdf(ref.x, unit), ref.value, 1e-12) << "x = " << ref.x;
}

TEST(DistancePdf, MeanMatchesClosedForm)
{
    for (double r : {1e-3, 1.0, 7.5})
    {
        const DiskRegion region(r);
        const double mean = boost::math::quadrature::tanh_sinh<double>().integrate(
            [&](double x) { return x * distance_pdf(x, region); }, 0.0, 2.0 * r);
        EXPECT_NEAR(mean / r, 128.0 / (45.0 * std::numbers::pi), 1e-10);
    }
}

TEST(SquaredDistancePdf, ClosedFormAgreesWithTransform)
{
    const DiskRegion unit(1.0);
    EXPECT_NEAR(squared_distance_pdf(1.0, unit), kSquaredPdfAtOne, 1e-15);
    EXPECT_DOUBLE_EQ(squared_distance_pdf(0.0, unit), 1.0);
    EXPECT_EQ(squared_distance_pdf(4.0, unit), 0.0);
    EXPECT_EQ(squared_distance_pdf(5.0, unit), 0.0);
    // both forms cancel as z -> 4r^2, where f_Z vanishes like (1 - c)^(3/2)
    for (double z : {0.01, 0.3, 1.0, 2.5, 3.99})
        EXPECT_NEAR(distance_power_pdf(z, 2.0, unit), squared_distance_pdf(z, unit),
                    1e-11 * squared_distance_pdf(z, unit));
}

TEST(DistancePowerPdf, BetaOneIsDistancePdf)
{
    const DiskRegion region(0.4);
    for (double x : {0.01, 0.2, 0.5, 0.79})
        EXPECT_DOUBLE_EQ(distance_power_pdf(x, 1.0, region), distance_pdf(x, region));
}

TEST(DistancePowerPdf, EndpointLimitsAndErrors)
{
    const DiskRegion unit(1.0);
    EXPECT_EQ(distance_power_pdf(0.0, 1.0, unit), 0.0);
    EXPECT_DOUBLE_EQ(distance_power_pdf(0.0, 2.0, unit), 1.0);
    EXPECT_TRUE(std::isinf(distance_power_pdf(0.0, 3.0, unit)));
    EXPECT_THROW(distance_power_pdf(-1.0, 2.0, unit), std::domain_error);
    EXPECT_THROW(distance_power_pdf(1.0, 0.0, unit), std::domain_error);
    EXPECT_THROW(power_transform_pdf([](double) { return 1.0; }, -0.1, 1.0), std::domain_error);
}

TEST(DistancePowerPdf, NormalisedAcrossRadiiAndPowers)
{
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (double r : {1e-3, 1.0, 10.0})
    {
        const DiskRegion region(r);
        for (double beta : {0.5, 1.0, 2.0, 3.0})
        {
            const double upper = std::pow(2.0 * r, beta);
            const double mass = integrator.integrate(
                [&](double z) { return distance_power_pdf(z, beta, region); }, 0.0, upper);
            EXPECT_NEAR(mass, 1.0, 1e-9) << "r = " << r << " beta = " << beta;
        }
    }
}
