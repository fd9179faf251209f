#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace molcomm {

/// Circular deployment area centred at the origin. Radius in metres.
class DiskRegion
{
  public:
    explicit DiskRegion(double radius) : radius_(radius)
    {
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw std::invalid_argument("DiskRegion: radius must be positive and finite");
    }

    double radius() const noexcept { return radius_; }
    double diameter() const noexcept { return 2.0 * radius_; }

    friend bool operator==(const DiskRegion&, const DiskRegion&) = default;

  private:
    double radius_;
};

struct PlanarPoint
{
    double x = 0.0;
    double y = 0.0;
};

/// Separation between two nodes; always within [0, diameter] of its region.
struct DistanceSample
{
    double value = 0.0;
};

//---------------------------------------------------------------------------//
// Random streams
//---------------------------------------------------------------------------//

using RandomStream = std::mt19937_64;

/// Stream for (seed, stream_index). Streams with distinct indices are
/// decorrelated by seed_seq mixing, and the construction is portable.
inline RandomStream make_stream(std::uint64_t seed, std::uint64_t stream_index = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_index),
                      static_cast<std::uint32_t>(stream_index >> 32)};
    return RandomStream(seq);
}

/// Uniform double on [0, 1) from the top 53 bits of a 64-bit engine.
/// std::uniform_real_distribution is implementation-defined, this is not.
template<class Engine>
double canonical(Engine& rng)
{
    static_assert(Engine::min() == 0 && Engine::max() == std::numeric_limits<std::uint64_t>::max(),
                  "canonical() needs a full-range 64-bit engine");
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

//---------------------------------------------------------------------------//
// Sampling
//---------------------------------------------------------------------------//

/// Uniform point in the disk: radius r*sqrt(U), angle uniform on [0, 2 pi).
template<class Engine>
PlanarPoint sample_uniform_point(const DiskRegion& region, Engine& rng)
{
    const double rho = region.radius() * std::sqrt(canonical(rng));
    const double theta = 2.0 * std::numbers::pi * canonical(rng);
    return {rho * std::cos(theta), rho * std::sin(theta)};
}

/// Distance between two independent uniform points of the disk.
template<class Engine>
DistanceSample sample_pair_distance(const DiskRegion& region, Engine& rng)
{
    const PlanarPoint a = sample_uniform_point(region, rng);
    const PlanarPoint b = sample_uniform_point(region, rng);
    // Rounding in cos/sin can overshoot the diameter by an ulp or two.
    const double d = std::hypot(a.x - b.x, a.y - b.y);
    return {std::min(d, region.diameter())};
}

//---------------------------------------------------------------------------//
// Densities
//---------------------------------------------------------------------------//

/// Density of the distance between two uniform points in the disk
/// (disk line picking). Zero outside [0, 2r].
inline double distance_pdf(double x, const DiskRegion& region)
{
    const double r = region.radius();
    if (!(x > 0.0) || !(x < 2.0 * r))
        return 0.0;
    const double c = x / (2.0 * r);
    return 2.0 * x / (r * r)
           * (2.0 / std::numbers::pi * std::acos(c)
              - x / (std::numbers::pi * r) * std::sqrt(1.0 - c * c));
}

/// Density of Z = X^2 in closed form. Zero outside [0, 4r^2]; the z = 0
/// endpoint returns the limit 1/r^2.
inline double squared_distance_pdf(double z, const DiskRegion& region)
{
    const double r = region.radius();
    if (z < 0.0 || z > 4.0 * r * r)
        return 0.0;
    const double c = std::sqrt(z) / (2.0 * r);
    return (2.0 * std::acos(c) - 2.0 * c * std::sqrt(1.0 - c * c)) / (std::numbers::pi * r * r);
}

/// Density of g(X) = X^beta for any density f_X supported on x >= 0:
/// (1/beta) z^(1/beta - 1) f_X(z^(1/beta)).
template<class Density>
double power_transform_pdf(const Density& f_x, double z, double beta)
{
    if (!(beta > 0.0))
        throw std::domain_error("power_transform_pdf: beta must be positive");
    if (z < 0.0)
        throw std::domain_error("power_transform_pdf: z must be nonnegative");
    if (z == 0.0)
        return 0.0;
    const double x = std::pow(z, 1.0 / beta);
    return std::pow(z, 1.0 / beta - 1.0) * f_x(x) / beta;
}

/// Density of X^beta where X is the disk pair distance. Zero outside
/// [0, (2r)^beta]; at z = 0 the analytic limit is returned (0 for beta < 2,
/// 1/r^2 for beta = 2, +inf for beta > 2).
inline double distance_power_pdf(double z, double beta, const DiskRegion& region)
{
    if (!(beta > 0.0))
        throw std::domain_error("distance_power_pdf: beta must be positive");
    if (z < 0.0)
        throw std::domain_error("distance_power_pdf: z must be nonnegative");
    if (z == 0.0)
    {
        // f_X(x) ~ 2x/r^2 near 0, so the density behaves like (2/(beta r^2)) z^(2/beta - 1).
        const double r2 = region.radius() * region.radius();
        if (beta < 2.0)
            return 0.0;
        if (beta == 2.0)
            return 1.0 / r2;
        return std::numeric_limits<double>::infinity();
    }
    return power_transform_pdf([&](double x) { return distance_pdf(x, region); }, z, beta);
}

} // namespace molcomm
