#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include "molcomm/errors.hpp"

namespace molcomm::quadrature {

struct Options
{
    double abs_tolerance = 1e-13;
    double rel_tolerance = 1e-12;
    std::size_t max_intervals = 2000;
};

struct Result
{
    double value = 0.0;
    double abs_error = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK tables).
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for kronrod_nodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment
{
    double lower;
    double upper;
    double value;
    double error;

    bool operator<(const Segment& other) const { return error < other.error; }
};

template<class F>
Segment gauss_kronrod_15(F& f, double lower, double upper)
{
    const double center = 0.5 * (lower + upper);
    const double half = 0.5 * (upper - lower);

    const double f_center = f(center);
    double kronrod = kronrod_weights[7] * f_center;
    double gauss = gauss_weights[3] * f_center;
    for (std::size_t i = 0; i < 7; ++i)
    {
        const double dx = half * kronrod_nodes[i];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kronrod_weights[i] * pair;
        if (i % 2 == 1)
            gauss += gauss_weights[i / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {lower, upper, kronrod, std::abs(kronrod - gauss)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [lower, upper].
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below max(abs_tolerance, rel_tolerance * |value|) or the
/// interval budget is exhausted. The integrand is never evaluated at the
/// endpoints, so integrable endpoint singularities are tolerated. Reversed
/// limits return the negated integral.
template<class F>
Result integrate_unchecked(F&& f, double lower, double upper, const Options& opts = {})
{
    Result result;
    if (lower == upper)
    {
        result.converged = true;
        return result;
    }
    if (upper < lower)
    {
        result = integrate_unchecked(f, upper, lower, opts);
        result.value = -result.value;
        return result;
    }

    std::priority_queue<detail::Segment> heap;
    heap.push(detail::gauss_kronrod_15(f, lower, upper));
    result.evaluations = 15;
    double total = heap.top().value;
    double error = heap.top().error;

    auto tolerance = [&] { return std::max(opts.abs_tolerance, opts.rel_tolerance * std::abs(total)); };

    while (error > tolerance() && heap.size() < opts.max_intervals)
    {
        const detail::Segment worst = heap.top();
        const double mid = 0.5 * (worst.lower + worst.upper);
        if (!(mid > worst.lower && mid < worst.upper))
            break; // interval can no longer be split in double precision
        heap.pop();
        const auto left = detail::gauss_kronrod_15(f, worst.lower, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.upper);
        result.evaluations += 30;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum from the pieces; the running totals drift after many updates.
    total = 0.0;
    error = 0.0;
    while (!heap.empty())
    {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    result.value = total;
    result.abs_error = error;
    result.converged = std::isfinite(total) && error <= tolerance();
    return result;
}

/// Same as integrate_unchecked but throws QuadratureError on non-convergence.
template<class F>
Result integrate(F&& f, double lower, double upper, const Options& opts = {})
{
    Result result = integrate_unchecked(f, lower, upper, opts);
    if (!result.converged)
    {
        std::ostringstream msg;
        msg << "adaptive quadrature did not converge on [" << lower << ", " << upper
            << "]: residual " << result.abs_error << " after " << result.evaluations
            << " evaluations";
        throw QuadratureError(msg.str(), result.abs_error);
    }
    return result;
}

/// Integrate piecewise over [lower, upper], splitting at interior breakpoints
/// where the integrand has kinks. Breakpoints outside the interval are ignored.
template<class F>
Result integrate(F&& f, double lower, double upper, std::span<const double> breakpoints,
                 const Options& opts = {})
{
    const bool reversed = upper < lower;
    if (reversed)
        std::swap(lower, upper);

    std::vector<double> cuts{lower};
    for (double b : breakpoints)
        if (b > lower && b < upper)
            cuts.push_back(b);
    cuts.push_back(upper);
    std::sort(cuts.begin(), cuts.end());

    Options piece_opts = opts;
    piece_opts.abs_tolerance = opts.abs_tolerance / static_cast<double>(cuts.size() - 1);

    Result total;
    total.converged = true;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    {
        const Result piece = integrate(f, cuts[i], cuts[i + 1], piece_opts);
        total.value += piece.value;
        total.abs_error += piece.abs_error;
        total.evaluations += piece.evaluations;
    }
    if (reversed)
        total.value = -total.value;
    return total;
}

} // namespace molcomm::quadrature
