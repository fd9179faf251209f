// molcomm: received-signal distributions for molecular nanonodes in a disk.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "molcomm/experiment.hpp"
#include "molcomm/units.hpp"

namespace {

using namespace molcomm;
using namespace molcomm::experiment;

enum ExitCode
{
    exit_ok = 0,
    exit_config = 2,
    exit_numerical = 3,
    exit_unachievable = 4,
};

int report_error(std::string_view kind, const std::string& message, int code)
{
    nlohmann::ordered_json err;
    err["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << err.dump() << "\n";
    return code;
}

// Flag values are kept as text so that units go through the same parser as
// config files.
struct ExperimentFlags
{
    std::string config_path;
    std::vector<std::pair<std::string, std::optional<std::string>>> values{
        {"model", {}},       {"radius", {}},    {"diffusion", {}},        {"time", {}},
        {"molecules", {}},   {"velocity", {}},  {"threshold", {}},        {"target", {}},
        {"samples", {}},     {"seed", {}},      {"bins", {}},             {"replicates", {}},
        {"series_terms", {}}, {"series_tolerance", {}}, {"sweep", {}},   {"format", {}},
    };

    Entries entries() const
    {
        Entries out;
        if (!config_path.empty())
            out = read_config_entries(config_path);
        for (const auto& [key, value] : values)
            if (value)
                out.emplace_back(key, *value);
        return out;
    }
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& flags)
{
    app->add_option("--config", flags.config_path,
                    "key = value config file (or an emitted CSV/JSON file); flags override it");
    auto flag_for = [&](const std::string& key) -> std::optional<std::string>& {
        for (auto& [k, v] : flags.values)
            if (k == key)
                return v;
        throw std::logic_error("unknown flag " + key);
    };
    app->add_option("--model", flag_for("model"), "free | drift");
    app->add_option("--radius,-r", flag_for("radius"), "disk radius, e.g. 3mm or 1.8m");
    app->add_option("--diffusion,-D", flag_for("diffusion"), "diffusion coefficient, e.g. 1e-5cm2/s");
    app->add_option("--time,-t", flag_for("time"), "observation time, e.g. 300s");
    app->add_option("--molecules,-M", flag_for("molecules"), "molecules released");
    app->add_option("--velocity,-v", flag_for("velocity"), "drift velocity, e.g. 2e-9m/s");
    app->add_option("--threshold", flag_for("threshold"), "reception threshold, e.g. 0.01/mm2");
    app->add_option("--target", flag_for("target"), "target success probability");
    app->add_option("--samples,-n", flag_for("samples"), "Monte Carlo trials");
    app->add_option("--seed", flag_for("seed"), "64-bit seed");
    app->add_option("--bins", flag_for("bins"), "histogram bins");
    app->add_option("--replicates", flag_for("replicates"), "extra seeds for KS spread (0 = off)");
    app->add_option("--series-terms", flag_for("series_terms"), "max CDF series terms");
    app->add_option("--series-tolerance", flag_for("series_tolerance"), "CDF series tail tolerance");
    app->add_option("--sweep", flag_for("sweep"), "name=v1,v2,... or name=start:stop:count");
    app->add_option("--format", flag_for("format"), "csv | json");
}

std::string output_path_for(const std::string& base, const ExperimentConfig& cfg, bool multi)
{
    if (!multi || base.empty())
        return base;
    const auto dot = base.find_last_of('.');
    const auto slash = base.find_last_of('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    const std::string tag = "_r" + reported(cfg.radius) + "m";
    return has_ext ? base.substr(0, dot) + tag + base.substr(dot) : base + tag;
}

void write_output(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    out << text;
}

void run_and_write(const std::vector<ExperimentConfig>& configs, const std::string& output,
                   unsigned workers)
{
    for (const auto& cfg : configs)
    {
        const Table table = run(cfg, workers);
        write_output(emit(table), output_path_for(output, cfg, configs.size() > 1));
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Received signal strength distributions for randomly placed molecular nanonodes"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string output;
    unsigned workers = 0;
    app.add_option("--output,-o", output, "output file (default stdout)");
    app.add_option("--workers", workers, "Monte Carlo threads (0 = all cores; never changes results)");

    ExperimentFlags flags;
    std::vector<std::pair<CLI::App*, Command>> commands;
    for (auto [name, cmd, help] : std::initializer_list<std::tuple<const char*, Command, const char*>>{
             {"pdf", Command::Pdf, "analytic and empirical PDF table"},
             {"cdf", Command::Cdf, "series, quadrature and empirical CDF table"},
             {"simulate", Command::Simulate, "Monte Carlo histogram dump"},
             {"success", Command::Success, "success probability versus molecule count"},
             {"threshold", Command::Threshold, "minimum molecules for the target success probability"},
             {"sweep", Command::Sweep, "threshold molecule count versus radius"},
         })
    {
        auto* sub = app.add_subcommand(name, help);
        add_experiment_flags(sub, flags);
        commands.emplace_back(sub, cmd);
    }

    auto* reproduce = app.add_subcommand("reproduce", "run a figure preset (fig2 .. fig6)");
    std::string figure;
    std::optional<std::string> preset_radius;
    std::optional<std::string> preset_seed;
    std::optional<std::string> preset_samples;
    std::optional<std::string> preset_format;
    reproduce->add_option("figure", figure, "fig2 | fig3 | fig4 | fig5 | fig6")->required();
    reproduce->add_option("--radius,-r", preset_radius, "run a single panel at this radius");
    reproduce->add_option("--seed", preset_seed, "64-bit seed");
    reproduce->add_option("--samples,-n", preset_samples, "Monte Carlo trials");
    reproduce->add_option("--format", preset_format, "csv | json");

    auto* replay = app.add_subcommand("replay", "re-run the config embedded in an emitted file");
    std::string replay_path;
    replay->add_option("file", replay_path, "CSV or JSON produced by molcomm")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        return report_error("config", e.what(), exit_config);
    }

    try
    {
        for (const auto& [sub, cmd] : commands)
        {
            if (!sub->parsed())
                continue;
            ExperimentConfig base;
            base.command = cmd;
            Entries entries = flags.entries();
            std::erase_if(entries, [](const auto& kv) { return kv.first == "command"; });
            run_and_write({apply_entries(base, entries)}, output, workers);
        }
        if (reproduce->parsed())
        {
            std::optional<double> radius;
            if (preset_radius)
                radius = units::parse_si(*preset_radius, units::Quantity::Length);
            auto configs = preset(figure, radius);
            Entries overrides;
            if (preset_seed)
                overrides.emplace_back("seed", *preset_seed);
            if (preset_samples)
                overrides.emplace_back("samples", *preset_samples);
            if (preset_format)
                overrides.emplace_back("format", *preset_format);
            for (auto& cfg : configs)
                cfg = apply_entries(cfg, overrides);
            run_and_write(configs, output, workers);
        }
        if (replay->parsed())
            run_and_write({apply_entries(ExperimentConfig{}, read_config_entries(replay_path))},
                          output, workers);
    }
    catch (const ConfigError& e)
    {
        return report_error("config", e.what(), exit_config);
    }
    catch (const UnachievableTarget& e)
    {
        return report_error("unachievable_target", e.what(), exit_unachievable);
    }
    catch (const QuadratureError& e)
    {
        return report_error("non_convergence", e.what(), exit_numerical);
    }
    catch (const std::invalid_argument& e)
    {
        return report_error("config", e.what(), exit_config);
    }
    catch (const std::domain_error& e)
    {
        return report_error("config", e.what(), exit_config);
    }
    catch (const std::exception& e)
    {
        return report_error("internal", e.what(), 1);
    }
    return exit_ok;
}
