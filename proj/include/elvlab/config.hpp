#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "suites.hpp"

namespace elvlab {

struct RunConfig {
    ModelParams params;
    std::vector<std::string> suites{"all"};
    int trials = 20;
    std::optional<double> tol;  // overrides each check's own tolerance when set
    std::uint64_t seed = 42;
    std::string out_path;

    void validate() const {
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (tol && !(*tol > 0)) throw ConfigError("tol must be positive");
        expand_suites(suites);
        try {
            params.validate();
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }

    json to_json() const {
        json j = params_json(params);
        j["suites"] = expand_suites(suites);
        j["trials"] = trials;
        if (tol) j["tol"] = *tol;
        else j["tol"] = nullptr;
        j["seed"] = seed;
        return j;
    }
};

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n"), e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

// Flat key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

namespace detail {
template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T out{};
    if (!(is >> out) || !(is >> std::ws).eof()) throw ConfigError("bad value for '" + key + "': '" + v + "'");
    return out;
}
}  // namespace detail

inline void apply_kv(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    if (kv.count("x") && kv.count("eps")) throw ConfigError("config sets both x and eps");
    for (auto& [k, v] : kv) {
        if (k == "n") cfg.params.n = detail::parse_number<int>(k, v);
        else if (k == "r") cfg.params.r = detail::parse_number<double>(k, v);
        else if (k == "x") {
            double x = detail::parse_number<double>(k, v);
            if (!(x > 0 && x < 1)) throw ConfigError("x must lie in (0,1)");
            cfg.params.eps = -std::log(x);
        } else if (k == "eps") cfg.params.eps = detail::parse_number<double>(k, v);
        else if (k == "trials") cfg.trials = detail::parse_number<int>(k, v);
        else if (k == "tol") cfg.tol = detail::parse_number<double>(k, v);
        else if (k == "seed") cfg.seed = detail::parse_number<std::uint64_t>(k, v);
        else if (k == "suites" || k == "suite") cfg.suites = split_list(v);
        else if (k == "out") cfg.out_path = v;
        else throw ConfigError("unknown config key '" + k + "'");
    }
}

}  // namespace elvlab
