#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"

namespace elvlab {

struct VerifyResult {
    std::vector<ReportRow> rows;
    json summary;
    bool all_pass = false;
};

inline VerifyResult run_verify(const RunConfig& cfg, int threads = thread_cap()) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    SuiteContext ctx{cfg.params, cfg.trials, cfg.seed};
    VerifyResult out;
    out.rows = run_tasks(all_tasks(cfg.suites, ctx), cfg.tol, threads);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.summary = summary_json(out.rows, ms);
    out.summary["config"] = cfg.to_json();
    out.all_pass = all_pass(out.rows);
    return out;
}

struct ScanGrid {
    std::vector<double> xs{0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<int> ns{2, 3};
};

struct ScanResult {
    std::vector<ReportRow> rows;
    std::vector<json> point_reports;
    json summary;
    bool all_pass = false;
};

// Every (x, n) point shares r, trials, tol, seed and suites with the base config.
// Points with invalid parameters are marked errored and skipped.
inline ScanResult run_scan(const RunConfig& base, const ScanGrid& grid, int threads = thread_cap()) {
    if (grid.xs.empty() || grid.ns.empty()) throw ConfigError("scan grid is empty");
    if (base.trials < 1) throw ConfigError("trials must be >= 1");
    if (base.tol && !(*base.tol > 0)) throw ConfigError("tol must be positive");
    expand_suites(base.suites);
    auto t0 = std::chrono::steady_clock::now();

    struct Point {
        ModelParams p;
        std::string error;
    };
    std::vector<Point> points;
    for (int n : grid.ns)
        for (double x : grid.xs) {
            Point pt;
            pt.p = base.params;
            pt.p.n = n;
            try {
                if (!(x > 0 && x < 1)) throw DomainError("x must lie in (0,1)");
                pt.p.eps = -std::log(x);
                pt.p.validate();
            } catch (const std::exception& e) {
                pt.error = e.what();
            }
            points.push_back(pt);
        }

    std::vector<Task> tasks;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].error.empty()) continue;
        SuiteContext ctx{points[i].p, base.trials, base.seed};
        for (auto& t : all_tasks(base.suites, ctx)) {
            tasks.push_back(t);
            tasks.back().echo["point"] = i;
        }
    }
    ScanResult out;
    out.rows = run_tasks(tasks, base.tol, threads);

    std::vector<std::vector<const ReportRow*>> by_point(points.size());
    for (auto& r : out.rows) by_point[r.params_echo["point"].get<std::size_t>()].push_back(&r);

    std::map<std::string, SuiteStats> agg;
    // worst residual per suite along x for each n; monotonicity is reported, never asserted
    std::map<std::string, std::map<int, std::vector<std::pair<double, double>>>> trend;
    int errored = 0, passed_points = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        json rep{{"point_report", i}, {"params", params_json(points[i].p)}};
        if (!points[i].error.empty()) {
            ++errored;
            rep["errored"] = true;
            rep["error"] = points[i].error;
            out.point_reports.push_back(rep);
            continue;
        }
        std::map<std::string, SuiteStats> local;
        int passed = 0;
        for (auto* r : by_point[i]) {
            local[suite_of(r->check_id)].add(*r);
            agg[suite_of(r->check_id)].add(*r);
            passed += r->pass;
        }
        json suites = json::object();
        for (auto& [name, st] : local) {
            suites[name] = st.to_json();
            trend[name][points[i].p.n].push_back({points[i].p.x(), st.worst});
        }
        rep["errored"] = false;
        rep["rows"] = by_point[i].size();
        rep["passed"] = passed;
        rep["failed"] = int(by_point[i].size()) - passed;
        rep["suites"] = suites;
        passed_points += passed == int(by_point[i].size());
        out.point_reports.push_back(rep);
    }

    json suites = json::object();
    for (auto& [name, st] : agg) {
        json s = st.to_json();
        json tr = json::object();
        for (auto& [n, series] : trend[name]) {
            auto sorted = series;
            std::sort(sorted.begin(), sorted.end());
            bool up = true, down = true;
            json pts = json::array();
            for (std::size_t k = 0; k < sorted.size(); ++k) {
                pts.push_back({sorted[k].first, sorted[k].second});
                if (k) {
                    up = up && sorted[k].second >= sorted[k - 1].second;
                    down = down && sorted[k].second <= sorted[k - 1].second;
                }
            }
            tr["n=" + std::to_string(n)] = json{{"worst_by_x", pts}, {"nondecreasing_in_x", up}, {"nonincreasing_in_x", down}};
        }
        s["trend"] = tr;
        suites[name] = s;
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    int passed_rows = 0;
    for (auto& r : out.rows) passed_rows += r.pass;
    json cfg = base.to_json();
    cfg.erase("n");
    cfg.erase("x");
    cfg.erase("eps");
    cfg["grid_x"] = grid.xs;
    cfg["grid_n"] = grid.ns;
    out.all_pass = errored == 0 && all_pass(out.rows);
    out.summary = json{{"summary", true},
                       {"points", points.size()},
                       {"errored_points", errored},
                       {"passing_points", passed_points},
                       {"rows", out.rows.size()},
                       {"passed", passed_rows},
                       {"failed", int(out.rows.size()) - passed_rows},
                       {"all_pass", out.all_pass},
                       {"suites", suites},
                       {"config", cfg},
                       {"runtime_ms", ms}};
    return out;
}

}  // namespace elvlab
