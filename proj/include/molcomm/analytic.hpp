#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "molcomm/channel.hpp"
#include "molcomm/geometry.hpp"
#include "molcomm/quadrature.hpp"

namespace molcomm {

/// Which roots of z = u^2 contribute to the drift density. The single-branch
/// form keeps only u = +sqrt(z), i.e. receivers at least vt away.
enum class DriftBranches
{
    PaperSingleBranch,
    TwoBranch,
};

/*!
 * Distribution of the received concentration Y = response(X) where X is the
 * distance between two uniform nodes of a disk.
 *
 * Internally everything is parameterised by the log offset S = log(peak/Y),
 * which equals the squared displacement divided by 4Dt. This keeps the
 * support representable when y_min underflows (r^2 >> Dt) and turns the
 * change of variables into a linear map z = 4Dt * s.
 */
class SignalDistribution
{
  public:
    SignalDistribution(ChannelParams params, DiskRegion region,
                       DriftBranches branches = DriftBranches::TwoBranch)
        : params_(params), region_(region), branches_(branches)
    {
        const double spread = params_.spread();
        const double vt = params_.drift_offset();
        const double diameter = region_.diameter();
        if (params_.model() == ChannelModel::FreeDiffusion)
        {
            x_of_max_ = 0.0;
            offset_lower_ = 0.0;
            offset_upper_ = diameter * diameter / spread;
            y_max_ = response(0.0, params_);
            y_min_ = response(diameter, params_);
        }
        else
        {
            x_of_max_ = std::clamp(vt, 0.0, diameter);
            const double u_near = x_of_max_ - vt;
            const double u_far = std::max(vt, diameter - vt);
            offset_lower_ = u_near * u_near / spread;
            offset_upper_ = u_far * u_far / spread;
            y_max_ = response(x_of_max_, params_);
            y_min_ = std::min(response(0.0, params_), response(diameter, params_));
        }
    }

    const ChannelParams& params() const noexcept { return params_; }
    const DiskRegion& region() const noexcept { return region_; }
    DriftBranches branches() const noexcept { return branches_; }

    //! Smallest attainable concentration; may underflow to 0 when r^2 >> Dt.
    double y_min() const noexcept { return y_min_; }
    //! Largest attainable concentration.
    double y_max() const noexcept { return y_max_; }
    std::pair<double, double> support() const noexcept { return {y_min_, y_max_}; }

    //! Support of S = log(peak / Y).
    double offset_lower() const noexcept { return offset_lower_; }
    double offset_upper() const noexcept { return offset_upper_; }

    /// Density of the squared displacement Z that drives the response
    /// (Z = X^2 for free diffusion, Z = (X - vt)^2 for drift).
    double displacement_density(double z, DriftBranches branches) const
    {
        if (params_.model() == ChannelModel::FreeDiffusion)
            return squared_distance_pdf(z, region_);

        const double vt = params_.drift_offset();
        auto shifted = [&](double u) { return distance_pdf(u + vt, region_); };
        auto reflected = [&](double u) { return distance_pdf(vt - u, region_); };
        if (z == 0.0)
            return shifted(0.0) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        double density = power_transform_pdf(shifted, z, 2.0);
        if (branches == DriftBranches::TwoBranch)
            density += power_transform_pdf(reflected, z, 2.0);
        return density;
    }

    /// Density of S = log(peak / Y), f_S(s) = 4Dt f_Z(4Dt s).
    double offset_density(double s) const { return offset_density(s, branches_); }

    double offset_density(double s, DriftBranches branches) const
    {
        if (s < offset_lower_ || s > offset_upper_)
            return 0.0;
        const double spread = params_.spread();
        return spread * displacement_density(spread * s, branches);
    }

    /// Density of Y, h(y) = f_S(s(y)) / y.
    double pdf(double y) const { return pdf(y, branches_); }

    double pdf(double y, DriftBranches branches) const
    {
        if (!(y > 0.0) || y > y_max_)
            return 0.0;
        const double s = log_offset(y, params_);
        if (s < offset_lower_ || s > offset_upper_)
            return 0.0;
        return offset_density(s, branches) / y;
    }

    /// P(Y <= y) by adaptive quadrature of the density.
    ///
    /// The integral over y is carried out in q = sqrt(s), y = peak e^{-q^2},
    /// dy = -2 q y dq. The substitution absorbs the 1/sqrt(z) singularity of
    /// the drift density at its peak and the sqrt(z) cusp of f_Z at z = 0.
    double cdf(double y, const quadrature::Options& opts = {}) const
    {
        if (!(y > 0.0))
            return 0.0;
        const double s = log_offset(y, params_);
        if (s <= offset_lower_)
            return total_mass(opts);
        if (s >= offset_upper_)
            return 0.0;
        return integrate_offset(std::sqrt(s), std::sqrt(offset_upper_), opts);
    }

    /// P(Y >= y), integrated from the top of the support so that small
    /// exceedance probabilities keep their relative accuracy.
    double survival(double y, const quadrature::Options& opts = {}) const
    {
        if (!(y > 0.0))
            return total_mass(opts);
        const double s = log_offset(y, params_);
        if (s <= offset_lower_)
            return 0.0;
        if (s >= offset_upper_)
            return total_mass(opts);
        return integrate_offset(std::sqrt(offset_lower_), std::sqrt(s), opts);
    }

    /// Integral of the density over the whole support; 1 except for the
    /// single-branch drift form, which drops receivers closer than vt.
    double total_mass(const quadrature::Options& opts = {}) const
    {
        return integrate_offset(std::sqrt(offset_lower_), std::sqrt(offset_upper_), opts);
    }

    /// CDF at ascending concentrations, accumulated interval by interval.
    /// Equivalent to calling cdf() per point but linear in the point count.
    std::vector<double> cdf_ascending(std::span<const double> ys,
                                      const quadrature::Options& opts = {1e-15, 1e-11, 200}) const
    {
        std::vector<double> out(ys.size(), 0.0);
        const double q_top = std::sqrt(offset_upper_);
        double q_prev = q_top;
        double acc = 0.0;
        for (std::size_t i = 0; i < ys.size(); ++i)
        {
            if (i > 0 && ys[i] < ys[i - 1])
                throw std::invalid_argument("cdf_ascending: points must be ascending");
            double q = q_top;
            if (ys[i] > 0.0)
            {
                const double s = std::clamp(log_offset(ys[i], params_), offset_lower_, offset_upper_);
                q = std::sqrt(s);
            }
            if (q < q_prev)
            {
                acc += integrate_offset(q, q_prev, opts);
                q_prev = q;
            }
            out[i] = acc;
        }
        return out;
    }

  private:
    // Integral of f_S(q^2) 2q over [q_lo, q_hi], split at the kinks of the
    // drift density (where one branch leaves the disk).
    double integrate_offset(double q_lo, double q_hi, const quadrature::Options& opts) const
    {
        if (!(q_hi > q_lo))
            return 0.0;
        auto integrand = [this](double q) { return offset_density(q * q) * 2.0 * q; };
        if (params_.model() == ChannelModel::FreeDiffusion)
            return quadrature::integrate(integrand, q_lo, q_hi, opts).value;
        const double root_spread = std::sqrt(params_.spread());
        const double vt = params_.drift_offset();
        const double kinks[] = {vt / root_spread, std::abs(region_.diameter() - vt) / root_spread};
        return quadrature::integrate(integrand, q_lo, q_hi, std::span<const double>(kinks), opts)
            .value;
    }

    ChannelParams params_;
    DiskRegion region_;
    DriftBranches branches_;
    double x_of_max_ = 0.0;
    double offset_lower_ = 0.0;
    double offset_upper_ = 0.0;
    double y_min_ = 0.0;
    double y_max_ = 0.0;
};

//---------------------------------------------------------------------------//
// Free diffusion
//---------------------------------------------------------------------------//

inline std::pair<double, double> support_bounds(const SignalDistribution& dist)
{
    return dist.support();
}

/// Received-signal density for free diffusion,
/// h(y) = 4Dt / (pi r^2 y) [2 acos(sqrt(z)/2r) - sqrt(z)/r sqrt(1 - z/4r^2)]
/// with z = -4Dt log(4 pi D t y / M). Zero outside [y_min, y_max]; at y_max the
/// limit 4Dt / (r^2 y_max) is returned.
inline double free_pdf(double y, const SignalDistribution& dist)
{
    detail::require_model(dist.params(), ChannelModel::FreeDiffusion, "free_pdf");
    return dist.pdf(y);
}

/// P(Y <= y) for free diffusion by adaptive quadrature of free_pdf.
/// Throws QuadratureError when the integral does not converge.
inline double free_cdf_quadrature(double y, const SignalDistribution& dist,
                                  const quadrature::Options& opts = {})
{
    detail::require_model(dist.params(), ChannelModel::FreeDiffusion, "free_cdf_quadrature");
    return std::clamp(dist.cdf(y, opts), 0.0, 1.0);
}

struct SeriesTruncation
{
    int max_terms = 200;
    double tail_tolerance = 1e-12;

    void validate() const
    {
        if (max_terms < 1)
            throw std::invalid_argument("SeriesTruncation: max_terms must be positive");
        if (!(tail_tolerance > 0.0))
            throw std::invalid_argument("SeriesTruncation: tail_tolerance must be positive");
    }
};

enum class SeriesStatus
{
    Converged,
    Truncated,
    Diverged,
};

inline std::string_view to_string(SeriesStatus status)
{
    switch (status)
    {
        case SeriesStatus::Converged: return "converged";
        case SeriesStatus::Truncated: return "truncated";
        case SeriesStatus::Diverged: break;
    }
    return "diverged";
}

struct SeriesValue
{
    double value = 0.0;
    SeriesStatus status = SeriesStatus::Converged;
    int terms = 0;
};

/*!
 * P(Y <= y) for free diffusion from the term-by-term integrated series.
 *
 * With c = sqrt(z)/(2r) the arccos expansion contributes
 * sigma_n = C(2n,n) c^(2n+1) / (4^n (2n+1)) and the binomial expansion of
 * sqrt(1 - z/4r^2) contributes gamma_n z^n = C(1/2,n) (-1)^n c^(2n). Both
 * integrate to powers z^(n + 3/2), giving
 *
 *   P(Y >= y) = 4c^2 [1 - (4/pi) sum_n (sigma_n + C(1/2,n)(-1)^n c^(2n+1)) / (2n+3)]
 *
 * and H(y) = 1 - P(Y >= y). Summation stops at the first term whose
 * contribution to H is below tail_tolerance (Converged) or at max_terms
 * (Truncated). Near y_min (c -> 1) the terms decay only algebraically.
 */
inline SeriesValue free_cdf_series(double y, const SignalDistribution& dist,
                                   const SeriesTruncation& trunc = {})
{
    detail::require_model(dist.params(), ChannelModel::FreeDiffusion, "free_cdf_series");
    trunc.validate();

    if (!(y > 0.0))
        return {0.0, SeriesStatus::Converged, 0};
    const double s = log_offset(y, dist.params());
    if (s <= 0.0)
        return {1.0, SeriesStatus::Converged, 0};
    if (s > dist.offset_upper())
        return {0.0, SeriesStatus::Converged, 0};

    const double r = dist.region().radius();
    const double z = dist.params().spread() * s;
    const double c2 = z / (4.0 * r * r);
    const double c = std::sqrt(c2);
    const double prefactor = 4.0 * c2 * 4.0 / std::numbers::pi;

    double central = 1.0; // C(2n,n) / 4^n
    double binomial = 1.0; // C(1/2,n) (-1)^n
    double power = c;      // c^(2n+1)
    double sum = 0.0;
    SeriesValue out{0.0, SeriesStatus::Truncated, 0};
    for (int n = 0; n < trunc.max_terms; ++n)
    {
        if (n > 0)
        {
            central *= (2.0 * n - 1.0) / (2.0 * n);
            binomial *= (n - 1.5) / n;
            power *= c2;
        }
        const double sigma = central * power / (2.0 * n + 1.0);
        const double term = (sigma + binomial * power) / (2.0 * n + 3.0);
        sum += term;
        out.terms = n + 1;
        if (!std::isfinite(sum))
        {
            out.status = SeriesStatus::Diverged;
            break;
        }
        if (std::abs(prefactor * term) < trunc.tail_tolerance)
        {
            out.status = SeriesStatus::Converged;
            break;
        }
    }

    const double exceed = 4.0 * c2 * (1.0 - 4.0 / std::numbers::pi * sum);
    out.value = std::isfinite(exceed) ? std::clamp(1.0 - exceed, 0.0, 1.0)
                                      : std::numeric_limits<double>::quiet_NaN();
    return out;
}

//---------------------------------------------------------------------------//
// Diffusion with drift
//---------------------------------------------------------------------------//

/*!
 * Received-signal density for the drift channel, composed step by step:
 * shift U = X - vt, square Z = U^2, then Y = peak exp(-Z / 4Dt) with
 * |dz/dy| = 4Dt / y. The shifted density is restricted to u in [-vt, 2r - vt]
 * by the support of the distance density. Diverges at the peak when
 * 0 < vt < 2r. Throws std::domain_error above the peak.
 */
inline double drift_pdf(double y, const SignalDistribution& dist, DriftBranches mode)
{
    detail::require_model(dist.params(), ChannelModel::DriftDiffusion, "drift_pdf");
    if (y > peak_response(dist.params()))
        throw std::domain_error("drift_pdf: concentration exceeds the drift peak");
    return dist.pdf(y, mode);
}

} // namespace molcomm
