#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "elvlab/catalog.hpp"
#include "elvlab/runner.hpp"

namespace {

using namespace elvlab;

// Flags shared by every subcommand; unset ones leave the config-file value alone.
struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol, x, eps, r;
    std::optional<int> trials, n;
    std::vector<std::string> suites;

    void attach(CLI::App* app, bool with_suites) {
        app->add_option("--config", config, "flat key=value config file; flags override it")->check(CLI::ExistingFile);
        app->add_option("--out", out, "report path (stdout when omitted)");
        app->add_option("--n", n, "lattice rank n >= 2");
        app->add_option("--r", r, "elliptic level r > n-1");
        auto* ox = app->add_option("--x", x, "nome x in (0,1)");
        auto* oe = app->add_option("--eps", eps, "eps > 0 with x = exp(-eps)");
        ox->excludes(oe);
        if (with_suites) {
            app->add_option("--seed", seed, "seed for every random draw");
            app->add_option("--tol", tol, "override for the per-check residual tolerances");
            app->add_option("--trials", trials, "random draws per check");
            app->add_option("--suite", suites, "suite ids (repeatable or comma separated)")->delimiter(',');
        }
    }

    RunConfig build() const {
        RunConfig cfg;
        if (!config.empty()) apply_kv(cfg, read_kv_file(config));
        if (n) cfg.params.n = *n;
        if (r) cfg.params.r = *r;
        if (x) {
            if (!(*x > 0 && *x < 1)) throw ConfigError("x must lie in (0,1)");
            cfg.params.eps = -std::log(*x);
        }
        if (eps) cfg.params.eps = *eps;
        if (seed) cfg.seed = *seed;
        if (tol) cfg.tol = *tol;
        if (trials) cfg.trials = *trials;
        if (!suites.empty()) cfg.suites = suites;
        if (!out.empty()) cfg.out_path = out;
        return cfg;
    }
};

struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Sink(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw ConfigError("cannot write report to '" + path + "'");
        os = &file;
    }
};

void print_status(const json& summary) {
    std::fprintf(stderr, "%s: %d/%d rows passed\n", summary["all_pass"].get<bool>() ? "PASS" : "FAIL",
                 summary["passed"].get<int>(), summary["rows"].get<int>());
    for (auto& [name, s] : summary["suites"].items()) {
        char worst[32] = "error";
        if (!s["worst_residual"].is_null()) std::snprintf(worst, sizeof worst, "%.3g", s["worst_residual"].get<double>());
        std::fprintf(stderr, "  %-12s %4d/%-4d worst %s (%s)\n", name.c_str(), s["passed"].get<int>(),
                     s["rows"].get<int>(), worst, s["worst_check"].get<std::string>().c_str());
    }
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (auto& t : split_list(s)) out.push_back(detail::parse_number<double>("grid", t));
    return out;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    for (auto& t : split_list(s)) out.push_back(detail::parse_number<int>("grid", t));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elvlab: numerical verification of the elliptic vertex/face model identities"};
    app.require_subcommand(1);

    Flags vf, sf, kf;
    auto* verify = app.add_subcommand("verify", "run verification suites at one parameter point");
    vf.attach(verify, true);

    auto* scan = app.add_subcommand("scan", "run suites over an (x, n) grid");
    sf.attach(scan, true);
    std::string grid_x = "0.1,0.2,0.3,0.4,0.5", grid_n = "2,3";
    scan->add_option("--grid-x", grid_x, "comma list of x values");
    scan->add_option("--grid-n", grid_n, "comma list of n values");

    auto* catalog = app.add_subcommand("kernel-catalog", "dump pole/zero descriptors of the operator chains");
    kf.attach(catalog, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) {
            RunConfig cfg = vf.build();
            cfg.validate();
            Sink sink(cfg.out_path);
            auto res = run_verify(cfg);
            write_rows(*sink.os, res.rows);
            *sink.os << res.summary.dump() << '\n';
            print_status(res.summary);
            return res.all_pass ? 0 : 1;
        }
        if (scan->parsed()) {
            RunConfig cfg = sf.build();
            ScanGrid grid{parse_doubles(grid_x), parse_ints(grid_n)};
            if (grid.xs.empty() || grid.ns.empty()) throw ConfigError("scan grid is empty");
            Sink sink(cfg.out_path);
            auto res = run_scan(cfg, grid);
            write_rows(*sink.os, res.rows);
            for (auto& p : res.point_reports) *sink.os << p.dump() << '\n';
            *sink.os << res.summary.dump() << '\n';
            print_status(res.summary);
            std::fprintf(stderr, "  points: %d, errored: %d\n", res.summary["points"].get<int>(),
                         res.summary["errored_points"].get<int>());
            return res.all_pass ? 0 : 1;
        }
        RunConfig cfg = kf.build();
        try {
            cfg.params.validate();
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        Sink sink(cfg.out_path);
        *sink.os << kernel_catalog(cfg.params).dump(2) << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
}
