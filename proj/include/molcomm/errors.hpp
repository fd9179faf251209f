#pragma once

#include <stdexcept>
#include <string>

namespace molcomm {

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
class QuadratureError : public std::runtime_error
{
  public:
    QuadratureError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual)
    {
    }

    //! Error estimate of the best result reached before giving up.
    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// No molecule count inside the search bracket reaches the requested success probability.
class UnachievableTarget : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Sample count does not fit the Monte Carlo accumulators.
class CapacityError : public std::length_error
{
  public:
    using std::length_error::length_error;
};

/// Malformed experiment configuration (bad key, value, or unit).
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

} // namespace molcomm
