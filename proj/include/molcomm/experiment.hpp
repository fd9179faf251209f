#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "molcomm/analytic.hpp"
#include "molcomm/channel.hpp"
#include "molcomm/errors.hpp"
#include "molcomm/geometry.hpp"
#include "molcomm/linkbudget.hpp"
#include "molcomm/montecarlo.hpp"
#include "molcomm/units.hpp"

namespace molcomm::experiment {

enum class Command
{
    Pdf,
    Cdf,
    Simulate,
    Success,
    Threshold,
    Sweep,
};

enum class OutputFormat
{
    Csv,
    Json,
};

inline std::string_view to_string(Command c)
{
    switch (c)
    {
        case Command::Pdf: return "pdf";
        case Command::Cdf: return "cdf";
        case Command::Simulate: return "simulate";
        case Command::Success: return "success";
        case Command::Threshold: return "threshold";
        case Command::Sweep: break;
    }
    return "sweep";
}

inline Command parse_command(std::string_view s)
{
    for (Command c : {Command::Pdf, Command::Cdf, Command::Simulate, Command::Success,
                      Command::Threshold, Command::Sweep})
        if (to_string(c) == s)
            return c;
    throw ConfigError("unknown command '" + std::string(s) + "'");
}

struct SweepAxis
{
    std::string variable;
    std::vector<double> values;

    friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

/// Everything needed to replay one experiment. Physical values are SI.
struct ExperimentConfig
{
    Command command = Command::Pdf;
    std::string preset;
    ChannelModel model = ChannelModel::FreeDiffusion;
    double radius = 1e-3;
    double diffusion = 1e-9;
    double time = 100.0;
    double molecules = 1.0;
    std::optional<double> velocity;
    std::optional<double> threshold;
    double target = 0.9;
    std::uint64_t samples = default_sample_count;
    std::uint64_t seed = 1;
    std::size_t bins = 100;
    std::size_t replicates = 0;
    int series_terms = 200;
    double series_tolerance = 1e-12;
    std::optional<SweepAxis> sweep;
    OutputFormat format = OutputFormat::Csv;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

    ChannelParams channel() const
    {
        if (model == ChannelModel::FreeDiffusion)
            return ChannelParams::free_diffusion(molecules, diffusion, time);
        return ChannelParams::drift_diffusion(molecules, diffusion, time, velocity.value_or(0.0));
    }

    DiskRegion region() const { return DiskRegion(radius); }
};

using Entries = std::vector<std::pair<std::string, std::string>>;

//---------------------------------------------------------------------------//
// Formatting helpers
//---------------------------------------------------------------------------//

/// Exact text form of a double (17 significant digits).
inline std::string exact(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Reporting form of a double (15 significant digits), shared by CSV and JSON.
inline std::string reported(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

inline double reported_value(double v)
{
    return std::isfinite(v) ? std::stod(reported(v)) : v;
}

//---------------------------------------------------------------------------//
// Key/value configuration
//---------------------------------------------------------------------------//

/// Flat "key = value" text; '#' starts a comment line, blank lines ignored.
inline Entries parse_key_values(std::istream& in)
{
    Entries out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        auto text = units::detail::trim(line);
        if (!text.empty() && text.back() == '\r')
            text.remove_suffix(1);
        if (text.empty() || text.front() == '#')
            continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        auto key = units::detail::trim(text.substr(0, eq));
        auto value = units::detail::trim(text.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::string(key), std::string(value));
    }
    return out;
}

namespace detail {

inline std::uint64_t parse_count(std::string_view key, std::string_view text)
{
    const auto t = units::detail::trim(text);
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size())
        throw ConfigError(std::string(key) + ": expected a nonnegative integer, got '" +
                          std::string(text) + "'");
    return v;
}

inline units::Quantity sweep_quantity(std::string_view variable)
{
    if (variable == "radius")
        return units::Quantity::Length;
    if (variable == "y")
        return units::Quantity::Concentration;
    if (variable == "molecules")
        return units::Quantity::Dimensionless;
    throw ConfigError("sweep: unknown variable '" + std::string(variable) +
                      "' (expected y, molecules or radius)");
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = s.find(sep, start);
        out.push_back(units::detail::trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

} // namespace detail

/// "var=v1,v2,..." or "var=start:stop:count" (count evenly spaced points).
/// `convert` turns one literal into an SI value.
template<class Convert>
SweepAxis parse_sweep(std::string_view text, Convert&& convert)
{
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("sweep: expected name=values, got '" + std::string(text) + "'");
    SweepAxis axis;
    axis.variable = std::string(units::detail::trim(text.substr(0, eq)));
    const auto kind = detail::sweep_quantity(axis.variable);
    const auto body = units::detail::trim(text.substr(eq + 1));

    if (body.find(':') != std::string_view::npos)
    {
        const auto parts = detail::split(body, ':');
        if (parts.size() != 3)
            throw ConfigError("sweep: range form is start:stop:count");
        const double start = convert(parts[0], kind);
        const double stop = convert(parts[1], kind);
        const auto count = detail::parse_count("sweep", parts[2]);
        if (count < 2)
            throw ConfigError("sweep: range needs at least two points");
        for (std::uint64_t i = 0; i < count; ++i)
            axis.values.push_back(start + (stop - start) * static_cast<double>(i)
                                              / static_cast<double>(count - 1));
    }
    else
    {
        for (auto part : detail::split(body, ','))
            axis.values.push_back(convert(part, kind));
    }
    if (axis.values.empty())
        throw ConfigError("sweep: no values");
    return axis;
}

inline SweepAxis parse_sweep(std::string_view text)
{
    return parse_sweep(text, [](std::string_view part, units::Quantity kind) {
        return units::parse_si(part, kind);
    });
}

inline std::string format_sweep(const SweepAxis& axis)
{
    std::string out = axis.variable + "=";
    for (std::size_t i = 0; i < axis.values.size(); ++i)
    {
        if (i)
            out += ",";
        out += exact(axis.values[i]);
    }
    return out;
}

/// Check cross-field constraints; throws ConfigError.
inline void validate(const ExperimentConfig& cfg)
{
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(cfg.radius))
        throw ConfigError("radius must be positive");
    if (!positive(cfg.diffusion))
        throw ConfigError("diffusion must be positive");
    if (!positive(cfg.time))
        throw ConfigError("time must be positive");
    if (!positive(cfg.molecules))
        throw ConfigError("molecules must be positive");
    if (cfg.model == ChannelModel::DriftDiffusion && !cfg.velocity)
        throw ConfigError("drift model requires velocity");
    if (cfg.velocity && !(*cfg.velocity >= 0.0 && std::isfinite(*cfg.velocity)))
        throw ConfigError("velocity must be nonnegative");
    if (cfg.threshold && !positive(*cfg.threshold))
        throw ConfigError("threshold must be positive");
    if (!(cfg.target > 0.0 && cfg.target < 1.0))
        throw ConfigError("target must lie in (0, 1)");
    if (cfg.samples < 1)
        throw ConfigError("samples must be at least 1");
    if (cfg.samples > max_sample_count)
        throw ConfigError("samples exceeds the supported maximum");
    if (cfg.bins < 2)
        throw ConfigError("bins must be at least 2");
    if (cfg.series_terms < 1)
        throw ConfigError("series_terms must be positive");
    if (!positive(cfg.series_tolerance))
        throw ConfigError("series_tolerance must be positive");

    const bool link = cfg.command == Command::Success || cfg.command == Command::Threshold
                      || cfg.command == Command::Sweep;
    if (link && !cfg.threshold)
        throw ConfigError(std::string(to_string(cfg.command)) + " requires threshold");

    std::string_view allowed;
    switch (cfg.command)
    {
        case Command::Pdf:
        case Command::Cdf: allowed = "y"; break;
        case Command::Success: allowed = "molecules"; break;
        case Command::Sweep: allowed = "radius"; break;
        case Command::Simulate:
        case Command::Threshold: allowed = ""; break;
    }
    if (cfg.sweep)
    {
        if (cfg.sweep->variable != allowed)
            throw ConfigError(std::string(to_string(cfg.command)) + " cannot sweep '" +
                              cfg.sweep->variable + "'");
        for (double v : cfg.sweep->values)
            if (!positive(v))
                throw ConfigError("sweep values must be positive");
        if (cfg.command == Command::Sweep
            && !std::is_sorted(cfg.sweep->values.begin(), cfg.sweep->values.end()))
            throw ConfigError("sweep radii must be ascending");
    }
    else if (cfg.command == Command::Sweep)
        throw ConfigError("sweep requires sweep = radius=...");
}

/// Apply key/value entries on top of `base`. Later entries win. Unit
/// suffixes are normalised to SI here.
inline ExperimentConfig apply_entries(ExperimentConfig base, const Entries& entries)
{
    // Model first: it decides the dimension of concentration-valued keys.
    for (const auto& [key, value] : entries)
        if (key == "model")
        {
            if (value == "free")
                base.model = ChannelModel::FreeDiffusion;
            else if (value == "drift")
                base.model = ChannelModel::DriftDiffusion;
            else
                throw ConfigError("model must be free or drift, got '" + value + "'");
        }

    auto concentration = [&](std::string_view key, std::string_view text) {
        const auto parsed = units::parse(text, units::Quantity::Concentration);
        const int expected = base.model == ChannelModel::FreeDiffusion ? 2 : 1;
        if (parsed.inverse_length_power != 0 && parsed.inverse_length_power != expected)
            throw ConfigError(std::string(key) + ": " +
                              (expected == 2 ? "free diffusion concentrations are per area"
                                             : "drift concentrations are per length"));
        return parsed.value;
    };

    for (const auto& [key, value] : entries)
    {
        using units::Quantity;
        if (key == "model")
            continue;
        if (key == "command")
            base.command = parse_command(value);
        else if (key == "preset")
            base.preset = value;
        else if (key == "radius")
            base.radius = units::parse_si(value, Quantity::Length);
        else if (key == "diffusion")
            base.diffusion = units::parse_si(value, Quantity::Diffusivity);
        else if (key == "time")
            base.time = units::parse_si(value, Quantity::Time);
        else if (key == "molecules")
            base.molecules = units::parse_si(value, Quantity::Dimensionless);
        else if (key == "velocity")
            base.velocity = units::parse_si(value, Quantity::Velocity);
        else if (key == "threshold")
            base.threshold = concentration(key, value);
        else if (key == "target")
            base.target = units::parse_si(value, Quantity::Dimensionless);
        else if (key == "samples")
            base.samples = detail::parse_count(key, value);
        else if (key == "seed")
            base.seed = detail::parse_count(key, value);
        else if (key == "bins")
            base.bins = detail::parse_count(key, value);
        else if (key == "replicates")
            base.replicates = detail::parse_count(key, value);
        else if (key == "series_terms")
            base.series_terms = static_cast<int>(
                std::min<std::uint64_t>(detail::parse_count(key, value), 1u << 30));
        else if (key == "series_tolerance")
            base.series_tolerance = units::parse_si(value, Quantity::Dimensionless);
        else if (key == "sweep")
            base.sweep = parse_sweep(value, [&](std::string_view part, units::Quantity kind) {
                return kind == Quantity::Concentration ? concentration("sweep", part)
                                                       : units::parse_si(part, kind);
            });
        else if (key == "format")
        {
            if (value == "csv")
                base.format = OutputFormat::Csv;
            else if (value == "json")
                base.format = OutputFormat::Json;
            else
                throw ConfigError("format must be csv or json, got '" + value + "'");
        }
        else
            throw ConfigError("unknown configuration key '" + key + "'");
    }
    return base;
}

/// Canonical, exact entry list for a config (what outputs embed).
inline Entries to_entries(const ExperimentConfig& cfg)
{
    Entries out;
    out.emplace_back("command", std::string(to_string(cfg.command)));
    if (!cfg.preset.empty())
        out.emplace_back("preset", cfg.preset);
    out.emplace_back("model", std::string(to_string(cfg.model)));
    out.emplace_back("radius", exact(cfg.radius));
    out.emplace_back("diffusion", exact(cfg.diffusion));
    out.emplace_back("time", exact(cfg.time));
    out.emplace_back("molecules", exact(cfg.molecules));
    if (cfg.velocity)
        out.emplace_back("velocity", exact(*cfg.velocity));
    if (cfg.threshold)
        out.emplace_back("threshold", exact(*cfg.threshold));
    out.emplace_back("target", exact(cfg.target));
    out.emplace_back("samples", std::to_string(cfg.samples));
    out.emplace_back("seed", std::to_string(cfg.seed));
    out.emplace_back("bins", std::to_string(cfg.bins));
    out.emplace_back("replicates", std::to_string(cfg.replicates));
    out.emplace_back("series_terms", std::to_string(cfg.series_terms));
    out.emplace_back("series_tolerance", exact(cfg.series_tolerance));
    if (cfg.sweep)
        out.emplace_back("sweep", format_sweep(*cfg.sweep));
    out.emplace_back("format", cfg.format == OutputFormat::Csv ? "csv" : "json");
    return out;
}

//---------------------------------------------------------------------------//
// Results
//---------------------------------------------------------------------------//

struct Table
{
    ExperimentConfig config;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

inline EmpiricalDistribution simulate_for(const ExperimentConfig& cfg, unsigned workers)
{
    return simulate(cfg.channel(), cfg.region(), cfg.samples, cfg.seed, {cfg.bins, workers});
}

inline void add_common_diagnostics(Table& t, const SignalDistribution& dist,
                                   const EmpiricalDistribution& emp)
{
    t.diagnostics["y_min"] = reported_value(dist.y_min());
    t.diagnostics["y_max"] = reported_value(dist.y_max());
    t.diagnostics["sample_count"] = emp.sample_count;
    t.diagnostics["seed"] = emp.seed;
    t.diagnostics["ks"] = reported_value(ks_statistic(emp, dist));
}

inline void add_robustness(Table& t, const ExperimentConfig& cfg, const SignalDistribution& dist,
                           unsigned workers)
{
    if (cfg.replicates == 0)
        return;
    const auto summary = replicate_ks(dist, cfg.samples, cfg.seed, cfg.replicates,
                                      {cfg.bins, workers});
    t.diagnostics["ks_replicates"] = cfg.replicates;
    t.diagnostics["ks_min"] = reported_value(summary.min);
    t.diagnostics["ks_median"] = reported_value(summary.median);
    t.diagnostics["ks_max"] = reported_value(summary.max);
}

inline double analytic_pdf(const SignalDistribution& dist, double y, DriftBranches mode)
{
    if (dist.params().model() == ChannelModel::FreeDiffusion)
        return free_pdf(y, dist);
    if (y > peak_response(dist.params()))
        return 0.0;
    return drift_pdf(y, dist, mode);
}

inline Table run_pdf(const ExperimentConfig& cfg, unsigned workers)
{
    Table t{cfg, {}, {}, {}};
    const SignalDistribution dist(cfg.channel(), cfg.region());
    const auto emp = simulate_for(cfg, workers);
    if (!t.config.sweep)
    {
        SweepAxis axis{"y", {}};
        for (std::size_t i = 0; i < emp.bin_count(); ++i)
            axis.values.push_back(0.5 * (emp.bin_edges[i] + emp.bin_edges[i + 1]));
        t.config.sweep = axis;
    }
    const bool free = cfg.model == ChannelModel::FreeDiffusion;
    t.columns = free ? std::vector<std::string>{"y", "pdf_analytic", "pdf_empirical"}
                     : std::vector<std::string>{"y", "pdf_two_branch", "pdf_single_branch",
                                                "pdf_empirical"};
    for (double y : t.config.sweep->values)
    {
        if (free)
            t.rows.push_back({y, analytic_pdf(dist, y, DriftBranches::TwoBranch), emp.density_at(y)});
        else
            t.rows.push_back({y, analytic_pdf(dist, y, DriftBranches::TwoBranch),
                              analytic_pdf(dist, y, DriftBranches::PaperSingleBranch),
                              emp.density_at(y)});
    }
    add_common_diagnostics(t, dist, emp);
    const auto edges = dist.cdf_ascending(emp.bin_edges);
    double l1 = 0.0;
    for (std::size_t i = 0; i < emp.bin_count(); ++i)
        l1 += std::abs(emp.bin_probabilities[i] - (edges[i + 1] - edges[i]));
    t.diagnostics["l1"] = reported_value(l1);
    if (!free)
        t.diagnostics["single_branch_mass"] =
            reported_value(SignalDistribution(cfg.channel(), cfg.region(),
                                              DriftBranches::PaperSingleBranch)
                               .total_mass());
    add_robustness(t, cfg, dist, workers);
    return t;
}

inline Table run_cdf(const ExperimentConfig& cfg, unsigned workers)
{
    Table t{cfg, {}, {}, {}};
    const SignalDistribution dist(cfg.channel(), cfg.region());
    const auto emp = simulate_for(cfg, workers);
    if (!t.config.sweep)
        t.config.sweep = SweepAxis{"y", linspace(dist.y_min(), dist.y_max(), 101)};
    const bool free = cfg.model == ChannelModel::FreeDiffusion;
    t.columns = free ? std::vector<std::string>{"y", "cdf_series", "series_status",
                                                "cdf_quadrature", "cdf_empirical"}
                     : std::vector<std::string>{"y", "cdf_quadrature", "cdf_empirical"};

    const SeriesTruncation trunc{cfg.series_terms, cfg.series_tolerance};
    double grid_dev = 0.0;
    double series_dev = 0.0;
    std::size_t converged = 0;
    std::size_t truncated = 0;
    std::size_t diverged = 0;
    for (double y : t.config.sweep->values)
    {
        const double quad = std::clamp(dist.cdf(y), 0.0, 1.0);
        const double empirical = emp.ecdf(y);
        grid_dev = std::max(grid_dev, std::abs(quad - empirical));
        if (!free)
        {
            t.rows.push_back({y, quad, empirical});
            continue;
        }
        const auto series = free_cdf_series(y, dist, trunc);
        switch (series.status)
        {
            case SeriesStatus::Converged:
                ++converged;
                series_dev = std::max(series_dev, std::abs(series.value - quad));
                break;
            case SeriesStatus::Truncated: ++truncated; break;
            case SeriesStatus::Diverged: ++diverged; break;
        }
        t.rows.push_back({y, series.value, static_cast<double>(series.status), quad, empirical});
    }
    add_common_diagnostics(t, dist, emp);
    t.diagnostics["max_grid_deviation"] = reported_value(grid_dev);
    if (free)
    {
        t.diagnostics["series_status_codes"] = "0=converged,1=truncated,2=diverged";
        t.diagnostics["series_converged"] = converged;
        t.diagnostics["series_truncated"] = truncated;
        t.diagnostics["series_diverged"] = diverged;
        t.diagnostics["series_max_deviation"] = reported_value(series_dev);
    }
    add_robustness(t, cfg, dist, workers);
    return t;
}

inline Table run_simulate(const ExperimentConfig& cfg, unsigned workers)
{
    Table t{cfg, {"bin_lower", "bin_upper", "probability", "cumulative"}, {}, {}};
    const SignalDistribution dist(cfg.channel(), cfg.region());
    const auto emp = simulate_for(cfg, workers);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < emp.bin_count(); ++i)
    {
        cumulative += emp.bin_probabilities[i];
        t.rows.push_back({emp.bin_edges[i], emp.bin_edges[i + 1], emp.bin_probabilities[i],
                          cumulative});
    }
    add_common_diagnostics(t, dist, emp);
    t.diagnostics["distinct_values"] = emp.ecdf_points.size();
    return t;
}

inline Table run_success(const ExperimentConfig& cfg, unsigned workers)
{
    Table t{cfg, {"molecules", "success_probability", "success_empirical"}, {}, {}};
    if (!t.config.sweep)
        t.config.sweep = SweepAxis{"molecules", linspace(1.0, 200.0, 200)};
    const ReceptionRule rule{*cfg.threshold, cfg.target};
    ExperimentConfig unit_cfg = cfg;
    unit_cfg.molecules = 1.0;
    // Y is linear in M: Y_M >= tau  <=>  Y_1 >= tau / M.
    const auto emp = simulate_for(unit_cfg, workers);
    for (double m : t.config.sweep->values)
    {
        const SignalDistribution dist(cfg.channel().with_molecules(m), cfg.region());
        t.rows.push_back({m, success_probability(rule, dist), exceedance_fraction(emp, rule.threshold / m)});
    }
    t.diagnostics["threshold"] = reported_value(rule.threshold);
    t.diagnostics["target"] = reported_value(rule.target_probability);
    t.diagnostics["sample_count"] = emp.sample_count;
    t.diagnostics["seed"] = emp.seed;
    try
    {
        const double m_star = threshold_molecules(rule, cfg.channel(), cfg.region());
        t.diagnostics["molecules_at_target"] = reported_value(m_star);
        t.diagnostics["success_at_target"] = reported_value(
            success_probability(rule, SignalDistribution(cfg.channel().with_molecules(m_star), cfg.region())));
    }
    catch (const UnachievableTarget& e)
    {
        t.diagnostics["molecules_at_target"] = nullptr;
        t.diagnostics["solver_error"] = e.what();
    }
    return t;
}

inline Table run_threshold(const ExperimentConfig& cfg)
{
    Table t{cfg, {"radius", "molecules_threshold", "success_at_threshold"}, {}, {}};
    const ReceptionRule rule{*cfg.threshold, cfg.target};
    const double m_star = threshold_molecules(rule, cfg.channel(), cfg.region());
    const double p = success_probability(
        rule, SignalDistribution(cfg.channel().with_molecules(m_star), cfg.region()));
    t.rows.push_back({cfg.radius, m_star, p});
    t.diagnostics["threshold"] = reported_value(rule.threshold);
    t.diagnostics["target"] = reported_value(rule.target_probability);
    return t;
}

inline Table run_sweep(const ExperimentConfig& cfg)
{
    Table t{cfg, {"radius", "molecules_threshold", "success_at_threshold", "status"}, {}, {}};
    const ReceptionRule rule{*cfg.threshold, cfg.target};
    const auto results = radius_sweep(rule, cfg.channel(), cfg.sweep->values);
    auto errors = nlohmann::ordered_json::array();
    for (const auto& r : results)
    {
        if (r.molecules)
        {
            const double p = success_probability(
                rule, SignalDistribution(cfg.channel().with_molecules(*r.molecules), DiskRegion(r.radius)));
            t.rows.push_back({r.radius, *r.molecules, p, 0.0});
        }
        else
        {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            t.rows.push_back({r.radius, nan, nan, 1.0});
            errors.push_back({{"radius", reported_value(r.radius)}, {"error", r.error}});
        }
    }
    t.diagnostics["threshold"] = reported_value(rule.threshold);
    t.diagnostics["target"] = reported_value(rule.target_probability);
    t.diagnostics["status_codes"] = "0=solved,1=failed";
    t.diagnostics["errors"] = errors;
    return t;
}

} // namespace detail

/// Run one resolved experiment. Default sweep grids are filled into the
/// returned table's config so it can be replayed exactly.
inline Table run(const ExperimentConfig& cfg, unsigned workers = 0)
{
    validate(cfg);
    switch (cfg.command)
    {
        case Command::Pdf: return detail::run_pdf(cfg, workers);
        case Command::Cdf: return detail::run_cdf(cfg, workers);
        case Command::Simulate: return detail::run_simulate(cfg, workers);
        case Command::Success: return detail::run_success(cfg, workers);
        case Command::Threshold: return detail::run_threshold(cfg);
        case Command::Sweep: break;
    }
    return detail::run_sweep(cfg);
}

//---------------------------------------------------------------------------//
// Emission
//---------------------------------------------------------------------------//

inline constexpr std::string_view config_prefix = "# config: ";
inline constexpr std::string_view diagnostic_prefix = "# diagnostic: ";

inline std::string to_csv(const Table& t)
{
    std::ostringstream out;
    out << "# molcomm experiment\n";
    for (const auto& [k, v] : to_entries(t.config))
        out << config_prefix << k << " = " << v << "\n";
    for (const auto& [k, v] : t.diagnostics.items())
        out << diagnostic_prefix << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump())
            << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << reported(row[i]);
        out << "\n";
    }
    return out.str();
}

inline std::string to_json(const Table& t)
{
    nlohmann::ordered_json doc;
    auto config = nlohmann::ordered_json::object();
    for (const auto& [k, v] : to_entries(t.config))
        config[k] = v;
    doc["config"] = config;
    doc["columns"] = t.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows)
    {
        auto jr = nlohmann::ordered_json::array();
        for (double v : row)
        {
            if (std::isfinite(v))
                jr.push_back(reported_value(v));
            else
                jr.push_back(nullptr);
        }
        rows.push_back(std::move(jr));
    }
    doc["rows"] = std::move(rows);
    doc["diagnostics"] = t.diagnostics;
    return doc.dump(2) + "\n";
}

inline std::string emit(const Table& t)
{
    return t.config.format == OutputFormat::Csv ? to_csv(t) : to_json(t);
}

/// Recover the embedded config entries from an emitted CSV or JSON file,
/// or read a plain key = value config file.
inline Entries read_config_entries(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
    {
        nlohmann::json doc;
        try
        {
            doc = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::exception& e)
        {
            throw ConfigError("'" + path + "': " + e.what());
        }
        if (!doc.contains("config") || !doc["config"].is_object())
            throw ConfigError("'" + path + "' has no config object");
        Entries out;
        for (const auto& [k, v] : doc["config"].items())
            out.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
        return out;
    }

    if (text.starts_with("# molcomm experiment"))
    {
        std::istringstream lines(text);
        std::string line;
        std::string body;
        while (std::getline(lines, line))
            if (line.starts_with(config_prefix))
                body += line.substr(config_prefix.size()) + "\n";
        std::istringstream cfg(body);
        return parse_key_values(cfg);
    }

    std::istringstream plain(text);
    return parse_key_values(plain);
}

//---------------------------------------------------------------------------//
// Figure presets
//---------------------------------------------------------------------------//

/// Radii of each figure's panels (SI). Empty for single-panel figures.
inline std::vector<double> preset_panels(std::string_view figure)
{
    if (figure == "fig2")
        return {3e-3, 8e-3};
    if (figure == "fig3")
        return {1.8, 2.25};
    if (figure == "fig6")
        return {2.0, 4.0};
    if (figure == "fig4" || figure == "fig5")
        return {};
    throw ConfigError("unknown figure '" + std::string(figure) + "' (expected fig2 .. fig6)");
}

/// Concrete configs for a figure; `radius` selects or overrides the panel.
inline std::vector<ExperimentConfig> preset(std::string_view figure,
                                            std::optional<double> radius = std::nullopt)
{
    ExperimentConfig base;
    base.preset = std::string(figure);
    base.diffusion = 1e-9; // 1e-5 cm^2/s
    base.molecules = 1.0;

    std::vector<double> radii = preset_panels(figure);
    if (figure == "fig2")
    {
        base.command = Command::Pdf;
        base.time = 3600.0;
    }
    else if (figure == "fig3")
    {
        base.command = Command::Cdf;
        base.time = 300.0;
        base.sweep = parse_sweep("y=1:10:91");
    }
    else if (figure == "fig4")
    {
        base.command = Command::Success;
        base.radius = 1.2e-3;
        base.time = 100.0;
        base.threshold = 1e4; // 0.01 per mm^2
        base.target = 0.9;
        base.sweep = parse_sweep("molecules=1:200:200");
        radii = {base.radius};
    }
    else if (figure == "fig5")
    {
        if (radius)
            throw ConfigError("fig5 sweeps the radius; --radius does not apply");
        base.command = Command::Sweep;
        base.time = 100.0;
        base.threshold = 1e4;
        base.target = 0.9;
        base.sweep = parse_sweep("radius=1.1mm:1.5mm:9");
        return {base};
    }
    else if (figure == "fig6")
    {
        base.command = Command::Pdf;
        base.model = ChannelModel::DriftDiffusion;
        base.time = 1e9;
        base.velocity = 2e-9;
    }
    if (radius)
        radii = {*radius};

    std::vector<ExperimentConfig> out;
    for (double r : radii)
    {
        ExperimentConfig cfg = base;
        cfg.radius = r;
        out.push_back(cfg);
    }
    return out;
}

} // namespace molcomm::experiment
