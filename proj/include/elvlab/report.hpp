#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "params.hpp"

namespace elvlab {

using json = nlohmann::ordered_json;

// value: plain residual against a tolerance that --tol may override.
// exact: must be identically zero.
// control: a negative control; residual = threshold / observed, so it passes when observed > threshold.
enum class TolKind { value, exact, control };

inline const char* tol_kind_name(TolKind k) {
    return k == TolKind::value ? "value" : (k == TolKind::exact ? "exact" : "control");
}

inline constexpr double exact_tolerance = std::numeric_limits<double>::denorm_min();

struct ReportRow {
    std::string check_id;
    json params_echo = json::object();
    double residual = 0;
    double tolerance = 0;
    bool pass = false;
    double runtime_ms = 0;
    std::string error;  // non-empty when the check threw

    void settle() { pass = error.empty() && residual < tolerance; }

    // Non-finite residuals serialize as null.
    json to_json(bool with_runtime = true) const {
        json j;
        j["check_id"] = check_id;
        j["params_echo"] = params_echo;
        if (std::isfinite(residual)) j["residual"] = residual;
        else j["residual"] = nullptr;
        j["tolerance"] = tolerance;
        j["pass"] = pass;
        if (with_runtime) j["runtime_ms"] = runtime_ms;
        if (!error.empty()) j["error"] = error;
        return j;
    }
};

inline std::string suite_of(const std::string& check_id) { return check_id.substr(0, check_id.find('.')); }

struct SuiteStats {
    int rows = 0, passed = 0;
    double worst = 0;
    std::string worst_check;

    void add(const ReportRow& r) {
        ++rows;
        passed += r.pass;
        double res = std::isfinite(r.residual) ? r.residual : std::numeric_limits<double>::infinity();
        // worst is measured against the row's own tolerance so exact and control rows compare fairly
        double score = r.tolerance > 0 ? res / r.tolerance : res;
        if (rows == 1 || score > worst_score) {
            worst_score = score;
            worst = res;
            worst_check = r.check_id;
        }
    }

    json to_json() const {
        json j{{"rows", rows}, {"passed", passed}, {"failed", rows - passed}};
        if (std::isfinite(worst)) j["worst_residual"] = worst;
        else j["worst_residual"] = nullptr;
        j["worst_check"] = worst_check;
        return j;
    }

private:
    double worst_score = 0;
};

inline std::map<std::string, SuiteStats> suite_stats(const std::vector<ReportRow>& rows) {
    std::map<std::string, SuiteStats> out;
    for (auto& r : rows) out[suite_of(r.check_id)].add(r);
    return out;
}

inline bool all_pass(const std::vector<ReportRow>& rows) {
    for (auto& r : rows)
        if (!r.pass) return false;
    return true;
}

inline json params_json(const ModelParams& p) {
    return json{{"n", p.n}, {"r", p.r}, {"x", p.x()}, {"eps", p.eps}};
}

inline json cplx_json(cplx c) { return json::array({c.real(), c.imag()}); }

inline json summary_json(const std::vector<ReportRow>& rows, double runtime_ms) {
    int passed = 0;
    for (auto& r : rows) passed += r.pass;
    json suites = json::object();
    for (auto& [name, st] : suite_stats(rows)) suites[name] = st.to_json();
    return json{{"summary", true},
                {"rows", rows.size()},
                {"passed", passed},
                {"failed", int(rows.size()) - passed},
                {"all_pass", passed == int(rows.size())},
                {"suites", suites},
                {"runtime_ms", runtime_ms}};
}

inline void write_rows(std::ostream& os, const std::vector<ReportRow>& rows) {
    for (auto& r : rows) os << r.to_json().dump() << '\n';
}

}  // namespace elvlab
