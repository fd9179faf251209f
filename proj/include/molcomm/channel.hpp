#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace molcomm {

enum class ChannelModel
{
    FreeDiffusion,
    DriftDiffusion,
};

inline std::string_view to_string(ChannelModel model)
{
    return model == ChannelModel::FreeDiffusion ? "free" : "drift";
}

/// Physical parameters of one impulse transmission. All values SI:
/// molecules (count, real-valued), diffusion coefficient m^2/s, time s,
/// drift velocity m/s (drift model only).
class ChannelParams
{
  public:
    static ChannelParams free_diffusion(double molecules, double diffusion_coeff, double time)
    {
        return ChannelParams(ChannelModel::FreeDiffusion, molecules, diffusion_coeff, time,
                             std::nullopt);
    }

    static ChannelParams drift_diffusion(double molecules, double diffusion_coeff, double time,
                                         double drift_velocity)
    {
        return ChannelParams(ChannelModel::DriftDiffusion, molecules, diffusion_coeff, time,
                             drift_velocity);
    }

    ChannelModel model() const noexcept { return model_; }
    double molecules() const noexcept { return molecules_; }
    double diffusion_coeff() const noexcept { return diffusion_coeff_; }
    double time() const noexcept { return time_; }
    std::optional<double> drift_velocity() const noexcept { return drift_velocity_; }

    //! Drift displacement v*t; zero for free diffusion.
    double drift_offset() const noexcept { return drift_velocity_.value_or(0.0) * time_; }

    //! Diffusion spread 4*D*t (m^2), the scale of the squared displacement.
    double spread() const noexcept { return 4.0 * diffusion_coeff_ * time_; }

    ChannelParams with_molecules(double molecules) const
    {
        return ChannelParams(model_, molecules, diffusion_coeff_, time_, drift_velocity_);
    }

    ChannelParams with_time(double time) const
    {
        return ChannelParams(model_, molecules_, diffusion_coeff_, time, drift_velocity_);
    }

    friend bool operator==(const ChannelParams&, const ChannelParams&) = default;

  private:
    ChannelParams(ChannelModel model, double molecules, double diffusion_coeff, double time,
                  std::optional<double> drift_velocity)
        : model_(model),
          molecules_(molecules),
          diffusion_coeff_(diffusion_coeff),
          time_(time),
          drift_velocity_(drift_velocity)
    {
        auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
        if (!positive(molecules_))
            throw std::invalid_argument("ChannelParams: molecules must be positive");
        if (!positive(diffusion_coeff_))
            throw std::invalid_argument("ChannelParams: diffusion coefficient must be positive");
        if (!positive(time_))
            throw std::invalid_argument("ChannelParams: time must be positive");
        if (drift_velocity_ && !(*drift_velocity_ >= 0.0 && std::isfinite(*drift_velocity_)))
            throw std::invalid_argument("ChannelParams: drift velocity must be nonnegative");
    }

    ChannelModel model_;
    double molecules_;
    double diffusion_coeff_;
    double time_;
    std::optional<double> drift_velocity_;
};

namespace detail {

inline void require_model(const ChannelParams& params, ChannelModel expected, const char* who)
{
    if (params.model() != expected)
        throw std::invalid_argument(std::string(who) + ": wrong channel model");
}

// peak * exp(-s), falling back to log space where exp(-s) alone would underflow.
inline double scaled_decay(double peak, double s)
{
    if (s < 700.0)
        return peak * std::exp(-s);
    return std::exp(std::log(peak) - s);
}

} // namespace detail

/// Response where the exponent vanishes: M/(4 pi D t) for free diffusion
/// (per m^2), M/sqrt(4 pi D t) for drift (per m).
inline double peak_response(const ChannelParams& params)
{
    const double four_pi_dt = 4.0 * std::numbers::pi * params.diffusion_coeff() * params.time();
    if (params.model() == ChannelModel::FreeDiffusion)
        return params.molecules() / four_pi_dt;
    return params.molecules() / std::sqrt(four_pi_dt);
}

/// Green's function of 2-D diffusion: M exp(-x^2/(4Dt)) / (4 pi D t).
inline double free_diffusion_response(double x, const ChannelParams& params)
{
    detail::require_model(params, ChannelModel::FreeDiffusion, "free_diffusion_response");
    if (x < 0.0)
        throw std::domain_error("free_diffusion_response: distance must be nonnegative");
    return detail::scaled_decay(peak_response(params), x * x / params.spread());
}

/// Wiener drift model: M exp(-(x - vt)^2/(4Dt)) / sqrt(4 pi D t).
inline double drift_diffusion_response(double x, const ChannelParams& params)
{
    detail::require_model(params, ChannelModel::DriftDiffusion, "drift_diffusion_response");
    if (x < 0.0)
        throw std::domain_error("drift_diffusion_response: distance must be nonnegative");
    const double u = x - params.drift_offset();
    return detail::scaled_decay(peak_response(params), u * u / params.spread());
}

inline double response(double x, const ChannelParams& params)
{
    return params.model() == ChannelModel::FreeDiffusion ? free_diffusion_response(x, params)
                                                         : drift_diffusion_response(x, params);
}

/// Normalised log offset s = log(peak / y) >= 0, so that y = peak * exp(-s).
inline double log_offset(double y, const ChannelParams& params)
{
    const double peak = peak_response(params);
    const double ratio = peak / y;
    if (std::isfinite(ratio))
        return std::log(ratio);
    return std::log(peak) - std::log(y);
}

/// Squared displacement z (m^2) producing concentration y:
/// z = -4Dt log(y / peak). For free diffusion z = x^2, for drift z = (x - vt)^2.
inline double response_inverse(double y, const ChannelParams& params)
{
    if (!(y > 0.0))
        throw std::domain_error("response_inverse: concentration must be positive");
    const double s = log_offset(y, params);
    if (s < 0.0)
        throw std::domain_error("response_inverse: concentration exceeds the channel peak");
    return params.spread() * s;
}

} // namespace molcomm
