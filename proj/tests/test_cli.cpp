#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "elvlab/runner.hpp"

using namespace elvlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    fs::path d = fs::temp_directory_path() / ("elvlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(ELVLAB_CLI_PATH) + " " + args + " 2>/dev/null";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::vector<json> read_lines(const fs::path& f) {
    std::ifstream in(f);
    std::vector<json> out;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(json::parse(line));
    return out;
}

// Drop the timing fields so two runs can be compared verbatim.
std::vector<json> strip_timing(std::vector<json> rows) {
    for (auto& r : rows) {
        r.erase("runtime_ms");
        if (r.contains("summary")) r.erase("runtime_ms");
    }
    return rows;
}

}  // namespace

TEST(Cli, VerifyPassesAndWritesSchema) {
    auto out = scratch() / "verify.jsonl";
    EXPECT_EQ(run_cli("verify --suite zeros,tail --n 2 --trials 5 --out " + out.string()), 0);
    auto rows = read_lines(out);
    ASSERT_GT(rows.size(), 2u);
    for (size_t i = 0; i + 1 < rows.size(); ++i) {
        auto& r = rows[i];
        for (auto key : {"check_id", "params_echo", "residual", "tolerance", "pass", "runtime_ms"})
            ASSERT_TRUE(r.contains(key)) << key;
        EXPECT_EQ(r["pass"].get<bool>(), r["residual"].get<double>() < r["tolerance"].get<double>());
    }
    auto& s = rows.back();
    EXPECT_TRUE(s["summary"].get<bool>());
    EXPECT_TRUE(s["all_pass"].get<bool>());
    EXPECT_EQ(s["rows"].get<size_t>(), rows.size() - 1);
}

TEST(Cli, SameSeedSameResiduals) {
    auto d = scratch();
    ASSERT_EQ(run_cli("verify --suite ybe-face,identities --n 3 --trials 4 --seed 7 --out " + (d / "a").string()), 0);
    ASSERT_EQ(run_cli("verify --suite ybe-face,identities --n 3 --trials 4 --seed 7 --out " + (d / "b").string()), 0);
    ASSERT_EQ(run_cli("verify --suite ybe-face,identities --n 3 --trials 4 --seed 8 --out " + (d / "c").string()), 0);
    auto a = strip_timing(read_lines(d / "a")), b = strip_timing(read_lines(d / "b")), c = strip_timing(read_lines(d / "c"));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli("verify --suite nosuch"), 2);
    EXPECT_EQ(run_cli("verify --trials 0"), 2);
    EXPECT_EQ(run_cli("verify --x 1.5"), 2);
    EXPECT_EQ(run_cli("verify --x 0.3 --eps 1"), 2);
    EXPECT_EQ(run_cli("verify --config /nonexistent/file.cfg"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("scan --grid-x '' --suite zeros"), 2);
}

TEST(Cli, ToleranceOverrideCanFail) {
    auto out = scratch() / "strict.jsonl";
    EXPECT_EQ(run_cli("verify --suite ybe-vertex --n 2 --trials 3 --tol 1e-30 --out " + out.string()), 1);
    EXPECT_FALSE(read_lines(out).back()["all_pass"].get<bool>());
}

TEST(Cli, ConfigFileWithFlagOverride) {
    auto d = scratch();
    {
        std::ofstream cfg(d / "run.cfg");
        cfg << "# test config\nn = 3\nr = 5.5\nx = 0.3\ntrials = 3\nseed = 11\nsuites = zeros, commutation\n";
    }
    auto out = d / "cfg.jsonl";
    EXPECT_EQ(run_cli("verify --config " + (d / "run.cfg").string() + " --n 2 --out " + out.string()), 0);
    auto cfg = read_lines(out).back()["config"];
    EXPECT_EQ(cfg["n"].get<int>(), 2);
    EXPECT_EQ(cfg["seed"].get<int>(), 11);
    EXPECT_EQ(cfg["trials"].get<int>(), 3);
    // suites come back in canonical order
    EXPECT_EQ(cfg["suites"], json::array({"commutation", "zeros"}));
    {
        std::ofstream bad(d / "bad.cfg");
        bad << "colour = blue\n";
    }
    EXPECT_EQ(run_cli("verify --config " + (d / "bad.cfg").string()), 2);
}

TEST(Cli, ScanReportsEveryPoint) {
    auto out = scratch() / "scan.jsonl";
    EXPECT_EQ(run_cli("scan --suite zeros --trials 2 --out " + out.string()), 0);
    auto rows = read_lines(out);
    int points = 0;
    for (auto& r : rows) points += r.contains("point_report");
    EXPECT_EQ(points, 10);
    auto& s = rows.back();
    EXPECT_EQ(s["points"].get<int>(), 10);
    EXPECT_TRUE(s["suites"]["zeros"].contains("trend"));
}

TEST(Cli, ScanMarksInvalidPoint) {
    auto out = scratch() / "scan_bad.jsonl";
    EXPECT_EQ(run_cli("scan --suite zeros --trials 2 --grid-x 0.3 --grid-n 2,9 --out " + out.string()), 1);
    EXPECT_EQ(read_lines(out).back()["errored_points"].get<int>(), 1);
}

TEST(Cli, KernelCatalogParses) {
    auto out = scratch() / "catalog.json";
    EXPECT_EQ(run_cli("kernel-catalog --n 3 --out " + out.string()), 0);
    std::ifstream in(out);
    json j = json::parse(in);
    ASSERT_TRUE(j.contains("chains"));
    EXPECT_FALSE(j["chains"].empty());
}

TEST(Runner, ThrowingTaskBecomesFailedRow) {
    Task t;
    t.check_id = "demo.pole";
    t.tolerance = 1e-10;
    t.run = []() -> std::vector<Measurement> { throw PoleError("demo: [0] in a denominator"); };
    auto rows = run_tasks({t}, std::nullopt, 1);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_FALSE(rows[0].pass);
    EXPECT_NE(rows[0].error.find("pole"), std::string::npos);
    EXPECT_TRUE(rows[0].to_json()["residual"].is_null());
}

TEST(Runner, ThreadCountDoesNotChangeResiduals) {
    RunConfig cfg;
    cfg.params = ModelParams::from_x(3, 5.5, 0.3);
    cfg.suites = {"tail", "vertex-face"};
    cfg.trials = 5;
    auto a = run_verify(cfg, 1), b = run_verify(cfg, 4);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].check_id, b.rows[i].check_id);
        EXPECT_EQ(a.rows[i].residual, b.rows[i].residual) << a.rows[i].check_id;
    }
}

TEST(Config, ParsesFlatFile) {
    auto f = scratch() / "kv.cfg";
    {
        std::ofstream o(f);
        o << "eps = 1.2\nsuites = tail,ope\ntol = 1e-8\n";
    }
    RunConfig cfg;
    apply_kv(cfg, read_kv_file(f.string()));
    EXPECT_EQ(cfg.params.eps, 1.2);
    EXPECT_EQ(cfg.suites, (std::vector<std::string>{"tail", "ope"}));
    EXPECT_EQ(cfg.tol.value(), 1e-8);
    EXPECT_THROW(apply_kv(cfg, {{"x", "0.3"}, {"eps", "1"}}), ConfigError);
    EXPECT_THROW(apply_kv(cfg, {{"trials", "many"}}), ConfigError);
}
