#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "molcomm/analytic.hpp"
#include "molcomm/channel.hpp"
#include "molcomm/errors.hpp"
#include "molcomm/geometry.hpp"

namespace molcomm {

/// Receiver declares a 1 when the concentration reaches `threshold`
/// (same units as the channel response).
struct ReceptionRule
{
    double threshold = 0.0;
    double target_probability = 0.9;

    void validate() const
    {
        if (!(threshold > 0.0) || !std::isfinite(threshold))
            throw std::invalid_argument("ReceptionRule: threshold must be positive");
        if (!(target_probability > 0.0 && target_probability < 1.0))
            throw std::invalid_argument("ReceptionRule: target probability must lie in (0, 1)");
    }
};

/// P(Y >= threshold), from the quadrature CDF. Drift channels use the
/// two-branch density regardless of the distribution's branch setting.
inline double success_probability(const ReceptionRule& rule, const SignalDistribution& dist)
{
    if (!(rule.threshold > 0.0))
        throw std::invalid_argument("success_probability: threshold must be positive");
    if (dist.params().model() == ChannelModel::DriftDiffusion
        && dist.branches() != DriftBranches::TwoBranch)
        return success_probability(rule, SignalDistribution(dist.params(), dist.region()));
    return std::clamp(dist.survival(rule.threshold), 0.0, 1.0);
}

struct SolverOptions
{
    double relative_tolerance = 1e-4;
    double max_molecules = 4294967296.0; // 2^32
};

/*!
 * Smallest molecule count M* with success_probability >= target.
 *
 * The response is linear in M, so the search runs over the ratio
 * q = M / M_floor where M_floor puts the channel peak exactly at the
 * threshold (success 0). The bracket doubles until the target is met or M
 * passes max_molecules, then bisects to the relative tolerance. The
 * molecule count carried by `params` is ignored.
 */
inline double threshold_molecules(const ReceptionRule& rule, const ChannelParams& params,
                                  const DiskRegion& region, const SolverOptions& opts = {})
{
    rule.validate();
    const double per_molecule_peak = peak_response(params.with_molecules(1.0));
    const double floor = rule.threshold / per_molecule_peak;

    auto success = [&](double q) {
        return success_probability(rule, SignalDistribution(params.with_molecules(floor * q), region));
    };

    double lo = 1.0;
    double hi = 2.0;
    while (success(hi) < rule.target_probability)
    {
        lo = hi;
        hi *= 2.0;
        if (floor * lo >= opts.max_molecules)
        {
            std::ostringstream msg;
            msg << "threshold_molecules: success probability " << rule.target_probability
                << " not reached below " << opts.max_molecules << " molecules";
            throw UnachievableTarget(msg.str());
        }
    }
    while ((hi - lo) > opts.relative_tolerance * hi)
    {
        const double mid = 0.5 * (lo + hi);
        if (success(mid) >= rule.target_probability)
            hi = mid;
        else
            lo = mid;
    }
    return floor * hi;
}

struct RadiusThreshold
{
    double radius = 0.0;
    std::optional<double> molecules;
    std::string error;
};

/// threshold_molecules for each radius (ascending). A failing radius records
/// its error and the sweep continues.
inline std::vector<RadiusThreshold> radius_sweep(const ReceptionRule& rule,
                                                 const ChannelParams& params,
                                                 const std::vector<double>& radii,
                                                 const SolverOptions& opts = {})
{
    if (!std::is_sorted(radii.begin(), radii.end()))
        throw std::invalid_argument("radius_sweep: radii must be ascending");
    std::vector<RadiusThreshold> out;
    out.reserve(radii.size());
    for (double r : radii)
    {
        RadiusThreshold entry{r, std::nullopt, {}};
        try
        {
            entry.molecules = threshold_molecules(rule, params, DiskRegion(r), opts);
        }
        catch (const std::exception& e)
        {
            entry.error = e.what();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

} // namespace molcomm
