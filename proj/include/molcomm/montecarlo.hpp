#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "molcomm/analytic.hpp"
#include "molcomm/channel.hpp"
#include "molcomm/errors.hpp"
#include "molcomm/geometry.hpp"
#include "molcomm/quadrature.hpp"

namespace molcomm {

struct EcdfPoint
{
    double y;
    double cumulative;
};

/*!
 * Seeded Monte Carlo estimate of the received-signal distribution.
 *
 * Histogram over the analytic support with equal-width bins, plus the ECDF
 * over distinct sampled values. The sorted samples are kept so exceedance
 * fractions can be read off exactly.
 */
struct EmpiricalDistribution
{
    std::vector<double> bin_edges;
    std::vector<double> bin_probabilities;
    std::vector<EcdfPoint> ecdf_points;
    std::vector<double> sorted_samples;
    std::uint64_t sample_count = 0;
    std::uint64_t seed = 0;

    std::size_t bin_count() const noexcept { return bin_probabilities.size(); }
    double bin_width(std::size_t i) const { return bin_edges[i + 1] - bin_edges[i]; }

    //! Histogram density (probability / width) of the bin holding y; 0 outside.
    double density_at(double y) const
    {
        if (bin_edges.empty() || y < bin_edges.front() || y > bin_edges.back())
            return 0.0;
        auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), y);
        std::size_t i = static_cast<std::size_t>(std::distance(bin_edges.begin(), it));
        i = std::min(i == 0 ? 0 : i - 1, bin_count() - 1);
        return bin_probabilities[i] / bin_width(i);
    }

    //! Right-continuous ECDF.
    double ecdf(double y) const
    {
        auto it = std::upper_bound(sorted_samples.begin(), sorted_samples.end(), y);
        return static_cast<double>(std::distance(sorted_samples.begin(), it))
               / static_cast<double>(sample_count);
    }

    friend bool operator==(const EmpiricalDistribution& a, const EmpiricalDistribution& b)
    {
        auto same_points = std::equal(a.ecdf_points.begin(), a.ecdf_points.end(),
                                      b.ecdf_points.begin(), b.ecdf_points.end(),
                                      [](const EcdfPoint& p, const EcdfPoint& q) {
                                          return p.y == q.y && p.cumulative == q.cumulative;
                                      });
        return same_points && a.bin_edges == b.bin_edges
               && a.bin_probabilities == b.bin_probabilities
               && a.sorted_samples == b.sorted_samples && a.sample_count == b.sample_count
               && a.seed == b.seed;
    }
};

struct SimulationOptions
{
    std::size_t bins = 100;
    //! Worker threads; 0 picks hardware concurrency. Never affects results.
    unsigned workers = 0;
};

/// Default trial count per experiment.
inline constexpr std::uint64_t default_sample_count = 100'000;

/// Samples per random stream. Chunk i always draws from make_stream(seed, i).
inline constexpr std::uint64_t samples_per_chunk = 4096;

/// Largest supported sample count. Counts are turned into probabilities as
/// count / n, which is exact only while n fits the double mantissa.
inline constexpr std::uint64_t max_sample_count = std::uint64_t{1} << 53;

/// Received concentrations for n_samples independent node pairs.
/// Output order is by sample index regardless of worker count.
inline std::vector<double> sample_signals(const ChannelParams& params, const DiskRegion& region,
                                          std::uint64_t n_samples, std::uint64_t seed,
                                          unsigned workers = 0)
{
    if (n_samples > max_sample_count)
        throw CapacityError("simulate: sample count exceeds accumulator capacity");

    std::vector<double> values(static_cast<std::size_t>(n_samples));
    const std::uint64_t chunks = (n_samples + samples_per_chunk - 1) / samples_per_chunk;

    auto run_chunk = [&](std::uint64_t chunk) {
        RandomStream rng = make_stream(seed, chunk);
        const std::uint64_t begin = chunk * samples_per_chunk;
        const std::uint64_t end = std::min(n_samples, begin + samples_per_chunk);
        for (std::uint64_t i = begin; i < end; ++i)
            values[i] = response(sample_pair_distance(region, rng).value, params);
    };

    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(chunks, 1)));

    if (workers <= 1)
    {
        for (std::uint64_t c = 0; c < chunks; ++c)
            run_chunk(c);
        return values;
    }

    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::uint64_t c = next++; c < chunks; c = next++)
                run_chunk(c);
        });
    pool.clear(); // joins
    return values;
}

/// Build histogram and ECDF from concentration samples over [lower, upper].
inline EmpiricalDistribution build_empirical(std::vector<double> samples, double lower,
                                             double upper, std::size_t n_bins, std::uint64_t seed)
{
    if (samples.empty())
        throw std::invalid_argument("build_empirical: need at least one sample");
    if (n_bins < 2)
        throw std::invalid_argument("build_empirical: need at least two bins");
    if (!(upper > lower))
        throw std::invalid_argument("build_empirical: empty histogram range");

    EmpiricalDistribution emp;
    emp.seed = seed;
    emp.sample_count = samples.size();
    const double n = static_cast<double>(samples.size());

    emp.bin_edges.resize(n_bins + 1);
    const double width = (upper - lower) / static_cast<double>(n_bins);
    for (std::size_t i = 0; i <= n_bins; ++i)
        emp.bin_edges[i] = lower + width * static_cast<double>(i);
    emp.bin_edges.back() = upper;

    std::vector<std::uint64_t> counts(n_bins, 0);
    for (double y : samples)
    {
        const double pos = (y - lower) / width;
        std::size_t bin = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
        counts[std::min(bin, n_bins - 1)] += 1;
    }
    emp.bin_probabilities.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        emp.bin_probabilities[i] = static_cast<double>(counts[i]) / n;

    std::sort(samples.begin(), samples.end());
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const double cumulative = static_cast<double>(i + 1) / n;
        if (!emp.ecdf_points.empty() && emp.ecdf_points.back().y == samples[i])
            emp.ecdf_points.back().cumulative = cumulative;
        else
            emp.ecdf_points.push_back({samples[i], cumulative});
    }
    emp.sorted_samples = std::move(samples);
    return emp;
}

/// Draw n_samples node pairs, push each distance through the channel and
/// histogram the concentrations over the analytic support. Deterministic for
/// fixed (params, region, n_samples, seed, bins) at any worker count.
inline EmpiricalDistribution simulate(const ChannelParams& params, const DiskRegion& region,
                                      std::uint64_t n_samples, std::uint64_t seed,
                                      const SimulationOptions& opts = {})
{
    if (n_samples < 1)
        throw std::invalid_argument("simulate: need at least one sample");
    if (opts.bins < 2)
        throw std::invalid_argument("simulate: need at least two bins");
    const SignalDistribution dist(params, region);
    auto samples = sample_signals(params, region, n_samples, seed, opts.workers);
    return build_empirical(std::move(samples), dist.y_min(), dist.y_max(), opts.bins, seed);
}

//---------------------------------------------------------------------------//
// Agreement metrics
//---------------------------------------------------------------------------//

/// sup over ECDF points of |ECDF(y) - F(y)|.
template<class Cdf>
double ks_statistic(const EmpiricalDistribution& emp, Cdf&& analytic_cdf)
{
    double worst = 0.0;
    for (const EcdfPoint& p : emp.ecdf_points)
        worst = std::max(worst, std::abs(p.cumulative - analytic_cdf(p.y)));
    return worst;
}

/// KS statistic against the quadrature CDF of a distribution, accumulated
/// over the sorted ECDF points in one sweep.
inline double ks_statistic(const EmpiricalDistribution& emp, const SignalDistribution& dist)
{
    std::vector<double> ys(emp.ecdf_points.size());
    std::transform(emp.ecdf_points.begin(), emp.ecdf_points.end(), ys.begin(),
                   [](const EcdfPoint& p) { return p.y; });
    const auto cdf = dist.cdf_ascending(ys);
    double worst = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i)
        worst = std::max(worst, std::abs(emp.ecdf_points[i].cumulative - cdf[i]));
    return worst;
}

/// sum over bins of |bin probability - integral of the density over the bin|.
/// Lies in [0, 2] for normalised densities.
template<class Pdf>
double l1_distance(const EmpiricalDistribution& emp, Pdf&& analytic_pdf,
                   const quadrature::Options& opts = {1e-12, 1e-9, 4000})
{
    double total = 0.0;
    for (std::size_t i = 0; i < emp.bin_count(); ++i)
    {
        const double mass =
            quadrature::integrate_unchecked(analytic_pdf, emp.bin_edges[i], emp.bin_edges[i + 1], opts).value;
        total += std::abs(emp.bin_probabilities[i] - mass);
    }
    return total;
}

/// Fraction of samples with y >= threshold.
inline double exceedance_fraction(const EmpiricalDistribution& emp, double threshold)
{
    auto it = std::lower_bound(emp.sorted_samples.begin(), emp.sorted_samples.end(), threshold);
    return static_cast<double>(std::distance(it, emp.sorted_samples.end()))
           / static_cast<double>(emp.sample_count);
}

//---------------------------------------------------------------------------//
// Multi-seed replication
//---------------------------------------------------------------------------//

struct RobustnessSummary
{
    std::vector<double> ks_values;
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};

inline constexpr std::size_t default_replicates = 20;

/// Repeat the simulation for seeds base_seed, base_seed + 1, ... and report
/// the spread of the KS statistic against the analytic CDF.
inline RobustnessSummary replicate_ks(const SignalDistribution& dist, std::uint64_t n_samples,
                                      std::uint64_t base_seed,
                                      std::size_t replicates = default_replicates,
                                      const SimulationOptions& opts = {})
{
    if (replicates < 1)
        throw std::invalid_argument("replicate_ks: need at least one replicate");
    RobustnessSummary out;
    for (std::size_t k = 0; k < replicates; ++k)
    {
        const auto emp = simulate(dist.params(), dist.region(), n_samples, base_seed + k, opts);
        out.ks_values.push_back(ks_statistic(emp, dist));
    }
    auto sorted = out.ks_values;
    std::sort(sorted.begin(), sorted.end());
    out.min = sorted.front();
    out.max = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    out.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return out;
}

} // namespace molcomm
