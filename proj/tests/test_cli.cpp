#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome
{
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch()
{
    const auto dir = fs::temp_directory_path() / "molcomm_cli_test";
    fs::create_directories(dir);
    return dir;
}

Outcome run_cli(const std::string& args)
{
    const auto out = scratch() / "stdout.txt";
    const auto err = scratch() / "stderr.txt";
    const std::string cmd = std::string(MOLCOMM_CLI_PATH) + " " + args + " >" + out.string() + " 2>"
                            + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string header_line(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (!line.starts_with("#"))
            return line;
    return {};
}

} // namespace

TEST(Cli, ConfigErrorsExitTwoWithErrorRecord)
{
    for (const char* args : {"pdf --radius -3mm", "pdf --radius 3parsecs", "pdf --bogus 1",
                             "threshold --radius 1mm", "reproduce fig9", "sweep --threshold 0.01/mm2"})
    {
        const auto res = run_cli(args);
        EXPECT_EQ(res.code, 2) << args;
        const auto record = nlohmann::json::parse(res.err);
        EXPECT_EQ(record["error"]["kind"], "config") << args;
        EXPECT_EQ(record["error"]["exit_code"], 2);
    }
}

TEST(Cli, UnachievableTargetExitsFour)
{
    const auto res = run_cli("threshold --radius 3mm --time 100s --threshold 0.01/mm2 --target 0.999");
    EXPECT_EQ(res.code, 4);
    EXPECT_EQ(nlohmann::json::parse(res.err)["error"]["kind"], "unachievable_target");
}

TEST(Cli, ThresholdSucceeds)
{
    const auto res = run_cli("threshold --radius 1.2mm --time 100s --threshold 0.01/mm2 --format json");
    ASSERT_EQ(res.code, 0) << res.err;
    const auto doc = nlohmann::json::parse(res.out);
    EXPECT_EQ(doc["config"]["command"], "threshold");
    EXPECT_GT(doc["rows"][0][1].get<double>(), 1.0);
    EXPECT_GE(doc["rows"][0][2].get<double>(), 0.9);
}

TEST(Cli, SameSeedGivesIdenticalBytes)
{
    const std::string args = "pdf --radius 3mm --time 1h --samples 20000 --seed 5 --bins 30";
    const auto a = run_cli("--workers 1 " + args);
    const auto b = run_cli("--workers 4 " + args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(header_line(a.out), "y,pdf_analytic,pdf_empirical");
    EXPECT_NE(a.out, run_cli(args + " --seed 6").out);
}

TEST(Cli, ReplayReproducesFiles)
{
    for (const char* fmt : {"csv", "json"})
    {
        const auto file = scratch() / (std::string("emitted.") + fmt);
        const auto res = run_cli("-o " + file.string()
                                 + " cdf --radius 2mm --time 300s --samples 5000 --seed 9 --format " + fmt);
        ASSERT_EQ(res.code, 0) << res.err;
        const auto replay = run_cli("replay " + file.string());
        ASSERT_EQ(replay.code, 0) << replay.err;
        EXPECT_EQ(replay.out, slurp(file)) << fmt;
    }
}

TEST(Cli, ConfigFileWithFlagOverride)
{
    const auto cfg = scratch() / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "# fig. 2 small panel\nradius = 3mm\ntime = 1h\nsamples = 3000\nseed = 1\n";
    }
    const auto res = run_cli("simulate --config " + cfg.string() + " --seed 2");
    ASSERT_EQ(res.code, 0) << res.err;
    EXPECT_NE(res.out.find("# config: seed = 2\n"), std::string::npos);
    EXPECT_NE(res.out.find("# config: radius = 0.0030000000000000001\n"), std::string::npos);
    EXPECT_EQ(header_line(res.out), "bin_lower,bin_upper,probability,cumulative");
}

TEST(Cli, ReproduceFig3SinglePanel)
{
    const auto res = run_cli("reproduce fig3 --radius 1.8 --samples 20000");
    ASSERT_EQ(res.code, 0) << res.err;
    EXPECT_NE(res.out.find("# config: preset = fig3\n"), std::string::npos);
    EXPECT_NE(res.out.find("# config: time = 300\n"), std::string::npos);
    EXPECT_NE(res.out.find("# config: molecules = 1\n"), std::string::npos);
    std::istringstream in(res.out);
    std::string line;
    std::vector<double> ys;
    bool header = false;
    while (std::getline(in, line))
    {
        if (line.starts_with("#"))
            continue;
        if (!header)
        {
            header = true;
            EXPECT_TRUE(line.starts_with("y,cdf_series,series_status,cdf_quadrature"));
            continue;
        }
        ys.push_back(std::stod(line.substr(0, line.find(','))));
    }
    ASSERT_FALSE(ys.empty());
    EXPECT_DOUBLE_EQ(ys.front(), 1.0);
    EXPECT_DOUBLE_EQ(ys.back(), 10.0);
}

TEST(Cli, ReproduceFig4)
{
    const auto res = run_cli("reproduce fig4 --samples 20000 --format json");
    ASSERT_EQ(res.code, 0) << res.err;
    const auto doc = nlohmann::json::parse(res.out);
    EXPECT_EQ(doc["config"]["radius"], "0.0011999999999999999");
    EXPECT_EQ(doc["config"]["time"], "100");
    EXPECT_EQ(doc["config"]["threshold"], "10000");
    EXPECT_EQ(doc["columns"][0], "molecules");
    EXPECT_EQ(doc["rows"].size(), 200u);
    EXPECT_TRUE(doc["diagnostics"].contains("molecules_at_target"));
}

TEST(Cli, MultiPanelOutputFiles)
{
    const auto base = scratch() / "fig2.csv";
    const auto res = run_cli("-o " + base.string() + " reproduce fig2 --samples 2000");
    ASSERT_EQ(res.code, 0) << res.err;
    EXPECT_TRUE(fs::exists(scratch() / "fig2_r0.003m.csv"));
    EXPECT_TRUE(fs::exists(scratch() / "fig2_r0.008m.csv"));
}
