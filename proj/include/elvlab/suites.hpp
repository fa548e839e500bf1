#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fock.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "tail.hpp"

namespace elvlab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> ids{"ybe-vertex", "ybe-face", "vertex-face", "tail",
                                              "ope",        "commutation", "identities", "zeros"};
    return ids;
}

// "all" expands in place; duplicates collapse; order follows known_suites().
inline std::vector<std::string> expand_suites(const std::vector<std::string>& requested) {
    if (requested.empty()) throw ConfigError("no suite selected");
    std::set<std::string> want;
    for (auto& s : requested) {
        if (s == "all") {
            want.insert(known_suites().begin(), known_suites().end());
            continue;
        }
        if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
            throw ConfigError("unknown suite id '" + s + "'");
        want.insert(s);
    }
    std::vector<std::string> out;
    for (auto& s : known_suites())
        if (want.count(s)) out.push_back(s);
    return out;
}

struct Measurement {
    std::string suffix;  // appended to the task's check_id
    double value = 0;
    json extra = json::object();
};

struct Task {
    std::string check_id;
    TolKind kind = TolKind::value;
    double tolerance = 0;  // threshold for control rows
    json echo = json::object();
    std::function<std::vector<Measurement>()> run;
};

struct SuiteContext {
    ModelParams p;
    int trials = 20;
    std::uint64_t seed = 42;
};

namespace detail {

inline std::string error_label(const std::exception& e) {
    if (dynamic_cast<const PoleError*>(&e)) return std::string("pole: ") + e.what();
    if (dynamic_cast<const DegenerateError*>(&e)) return std::string("degenerate: ") + e.what();
    if (dynamic_cast<const DomainError*>(&e)) return std::string("domain: ") + e.what();
    return std::string("error: ") + e.what();
}

inline ReportRow make_row(const Task& t, const Measurement& m, std::optional<double> tol_override) {
    ReportRow row;
    row.check_id = t.check_id + m.suffix;
    row.params_echo = t.echo;
    for (auto& [k, v] : m.extra.items()) row.params_echo[k] = v;
    switch (t.kind) {
        case TolKind::value:
            row.residual = m.value;
            row.tolerance = tol_override.value_or(t.tolerance);
            break;
        case TolKind::exact:
            row.residual = m.value;
            row.tolerance = exact_tolerance;
            break;
        case TolKind::control:
            row.params_echo["control_observed"] = m.value;
            row.params_echo["control_threshold"] = t.tolerance;
            row.residual = m.value > 0 ? t.tolerance / m.value : std::numeric_limits<double>::infinity();
            row.tolerance = 1.0;
            break;
    }
    row.params_echo["tol_kind"] = tol_kind_name(t.kind);
    row.settle();
    return row;
}

}  // namespace detail

// Runs every task; rows come back in task order whatever the scheduling.
inline std::vector<ReportRow> run_tasks(const std::vector<Task>& tasks, std::optional<double> tol_override,
                                        int threads = thread_cap()) {
    std::vector<std::vector<ReportRow>> out(tasks.size());
    parallel_for(
        tasks.size(),
        [&](std::size_t i) {
            const Task& t = tasks[i];
            auto t0 = std::chrono::steady_clock::now();
            std::vector<Measurement> ms;
            std::string err;
            try {
                ms = t.run();
            } catch (const std::exception& e) {
                err = detail::error_label(e);
            }
            double ms_total =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            if (!err.empty()) {
                ReportRow row = detail::make_row(t, {"", std::numeric_limits<double>::infinity(), {}}, tol_override);
                row.error = err;
                row.runtime_ms = ms_total;
                row.settle();
                out[i].push_back(row);
                return;
            }
            for (auto& m : ms) {
                ReportRow row = detail::make_row(t, m, tol_override);
                row.runtime_ms = ms_total / double(ms.size());
                out[i].push_back(row);
            }
        },
        threads);
    std::vector<ReportRow> rows;
    for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

namespace suites {

using Ms = std::vector<Measurement>;

inline Ms one(double v, json extra = json::object()) { return {{"", v, std::move(extra)}}; }

inline cplx draw_v(std::mt19937_64& g, double re = 1.0, double im = 0.3) {
    return {uniform(g, -re, re), uniform(g, -im, im)};
}

class Builder {
public:
    Builder(const SuiteContext& c) : ctx(c) {}

    // One task per trial; the body receives a private engine for (seed, id, trial).
    void per_trial(const std::string& id, TolKind kind, double tol, int count,
                   std::function<Ms(std::mt19937_64&)> body) {
        for (int t = 0; t < count; ++t) {
            json echo = base_echo();
            echo["trial"] = t;
            auto seed = ctx.seed;
            tasks.push_back({id, kind, tol, echo, [=] {
                                 auto g = draw_engine(seed, id, std::uint64_t(t));
                                 return body(g);
                             }});
        }
    }

    void once(const std::string& id, TolKind kind, double tol, std::function<Ms(std::mt19937_64&)> body) {
        auto seed = ctx.seed;
        tasks.push_back({id, kind, tol, base_echo(), [=] {
                             auto g = draw_engine(seed, id, 0);
                             return body(g);
                         }});
    }

    json base_echo() const {
        json e = params_json(ctx.p);
        e["seed"] = ctx.seed;
        return e;
    }

    const SuiteContext& ctx;
    std::vector<Task> tasks;
};

inline double rel_diff(cplx a, cplx b) { return scaled_residual(std::abs(a - b), std::max(std::abs(a), std::abs(b))); }

inline void ybe_vertex(Builder& b) {
    const ModelParams p = b.ctx.p;
    const int T = b.ctx.trials;
    b.per_trial("ybe-vertex.ybe", TolKind::value, 1e-9, T, [p](auto& g) {
        cplx v1 = draw_v(g), v2 = draw_v(g);
        return one(ybe_residual_vertex(v1, v2, p), {{"v1", cplx_json(v1)}, {"v2", cplx_json(v2)}});
    });
    b.per_trial("ybe-vertex.s_ybe", TolKind::value, 1e-9, T, [p](auto& g) {
        cplx v1 = draw_v(g), v2 = draw_v(g);
        double res = ybe_residual_vertex(v1, v2, p, [&](cplx v) { return s_matrix(v, p); });
        return one(res, {{"v1", cplx_json(v1)}, {"v2", cplx_json(v2)}});
    });
    b.per_trial("ybe-vertex.zero_pattern", TolKind::exact, 0, T, [p](auto& g) {
        cplx v = draw_v(g);
        auto z = zero_pattern(r_matrix(v, p));
        return one(z.max_forbidden, {{"v", cplx_json(v)}, {"nonzero", z.nonzero}});
    });
    if (p.n == 2)
        b.per_trial("ybe-vertex.eight_vertex_count", TolKind::exact, 0, T, [p](auto& g) {
            cplx v = draw_v(g);
            auto z = zero_pattern(r_matrix(v, p));
            return one(std::abs(z.nonzero - 8), {{"v", cplx_json(v)}, {"nonzero", z.nonzero}});
        });
    b.per_trial("ybe-vertex.shift_symmetry", TolKind::value, 1e-12, T, [p](auto& g) {
        cplx v = draw_v(g);
        return one(shift_symmetry_residual(r_matrix(v, p)), {{"v", cplx_json(v)}});
    });
}

// W[c d; b a | 0] against delta_{b d} over every admissible plaquette at a.
inline double face_identity_residual(const WeightVec& a, const ModelParams& p) {
    double worst = 0;
    for (auto& d : neighbors(a))
        for (auto& c : neighbors(d))
            for (auto& bb : neighbors(a)) {
                if (!admissible(bb, c)) continue;
                cplx w = face_weight(c, d, bb, a, 0.0, p);
                double want = detail::same_weight(bb, d) ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(w - want));
            }
    return worst;
}

inline void ybe_face(Builder& b) {
    const ModelParams p = b.ctx.p;
    const int T = b.ctx.trials;
    b.per_trial("ybe-face.ybe", TolKind::value, 1e-9, T, [p](auto& g) {
        WeightVec a = random_generic_weight(p.n, g);
        cplx v1 = draw_v(g), v2 = draw_v(g);
        return one(ybe_residual_face(v1, v2, a, 1, p), {{"a", a.bar}, {"v1", cplx_json(v1)}, {"v2", cplx_json(v2)}});
    });
    b.per_trial("ybe-face.w_prime_ybe", TolKind::value, 1e-9, T, [p](auto& g) {
        WeightVec a = random_generic_weight(p.n, g);
        cplx v1 = draw_v(g), v2 = draw_v(g);
        double res = ybe_residual_face(v1, v2, a, 1, twisted(0.0, p).W);
        return one(res, {{"a", a.bar}, {"v1", cplx_json(v1)}, {"v2", cplx_json(v2)}});
    });
    b.per_trial("ybe-face.identity_at_zero", TolKind::value, 1e-10, T, [p](auto& g) {
        WeightVec a = random_generic_weight(p.n, g);
        return one(face_identity_residual(a, p), {{"a", a.bar}});
    });
}

inline void vertex_face(Builder& b) {
    const ModelParams p = b.ctx.p;
    const int T = b.ctx.trials;
    for (auto c : {Correspondence::vf, Correspondence::dual_vf, Correspondence::s_vf})
        for (auto gauge : {Gauge::phased, Gauge::plain}) {
            std::string id = std::string("vertex-face.") + correspondence_name(c) + "." + gauge_name(gauge);
            b.per_trial(id, TolKind::value, 1e-9, T, [p, c, gauge](auto& g) {
                WeightVec a = random_generic_weight(p.n, g);
                cplx v1 = draw_v(g), v2 = draw_v(g);
                return one(correspondence_residual(c, v1, v2, a, p, gauge),
                           {{"a", a.bar}, {"v1", cplx_json(v1)}, {"v2", cplx_json(v2)}});
            });
        }
    b.per_trial("vertex-face.dual_completeness", TolKind::value, 1e-10, T, [p](auto& g) {
        WeightVec a = random_generic_weight(p.n, g);
        cplx v = draw_v(g);
        auto d = dual_residuals(v, a, p);
        json e{{"a", a.bar}, {"v", cplx_json(v)}};
        return Ms{{".left", d.left, e}, {".right", d.right, e}};
    });
}

inline void tail(Builder& b) {
    const ModelParams p = b.ctx.p;
    const int T = b.ctx.trials;
    const int n = p.n;
    auto draw_u = [n](std::mt19937_64& g) { return cplx(uniform(g, -0.5, n / 2.0 + 1.5), uniform(g, -0.3, 0.3)); };
    auto u_flag = [n](cplx u) { return u.real() > 0 && u.real() < n / 2.0 + 1; };
    for (Level lv : {Level::r, Level::r_minus_1}) {
        std::string id = lv == Level::r ? "tail.L_def_vs_closed" : "tail.L_prime_def_vs_closed";
        int count = lv == Level::r ? std::max(T, 100) : T;
        b.per_trial(id, TolKind::value, 1e-9, count, [p, lv, draw_u, u_flag](auto& g) {
            const int n = p.n;
            cplx u = draw_u(g);
            WeightVec a = random_generic_weight(n, g), ap = random_generic_weight(n, g);
            int mu = int(uniform(g, 0, n)) % n, nu = int(uniform(g, 0, n)) % n;
            cplx d = L_def(u, a, shift(a, mu, -1), ap, shift(ap, nu, -1), p, lv);
            cplx c = L_closed(u, a, ap, mu, nu, p, lv);
            return one(rel_diff(d, c), {{"u", cplx_json(u)},
                                        {"u_in_range", u_flag(u)},
                                        {"mu", mu},
                                        {"nu", nu},
                                        {"a", a.bar},
                                        {"a_prime", ap.bar}});
        });
    }
    b.per_trial("tail.delta", TolKind::value, 1e-10, T, [p, draw_u, u_flag](auto& g) {
        const int n = p.n;
        cplx u = draw_u(g);
        WeightVec a = random_generic_weight(n, g);
        double worst = 0;
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) {
                double want = mu == nu ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(L_def(u, a, shift(a, mu, -1), a, shift(a, nu, -1), p) - want));
                worst = std::max(worst, std::abs(L_closed(u, a, a, mu, nu, p) - want));
            }
        return one(worst, {{"u", cplx_json(u)}, {"u_in_range", u_flag(u)}, {"a", a.bar}});
    });
    b.per_trial("tail.path_identity", TolKind::exact, 0, T, [p, draw_u, u_flag](auto& g) {
        const int n = p.n, depth = 6;
        cplx u = draw_u(g);
        WeightVec a = random_generic_weight(n, g);
        int i = int(uniform(g, 0, n)) % n;
        auto path = AdmissiblePath::ground_state(a, i, depth);
        return one(std::abs(tail_product(path, path, u, depth, p) - 1.0),
                   {{"u", cplx_json(u)}, {"u_in_range", u_flag(u)}, {"i", i}, {"depth", depth}});
    });
    b.once("tail.delta_u_sign", TolKind::exact, 0, [p](auto&) {
        SpectralPoint du = delta_u(p);
        cplx plain = std::exp(-2.0 * p.eps * du.v);
        return one(std::abs(du.z(p.eps) + plain));
    });
    b.per_trial("tail.exchange_finite", TolKind::exact, 0, T, [p](auto& g) {
        const int n = p.n;
        cplx u = draw_v(g), v = draw_v(g);
        WeightVec xi = random_generic_weight(n, g), xip = random_generic_weight(n, g);
        WeightVec a = random_generic_weight(n, g), ap = random_generic_weight(n, g);
        int bad = 0;
        for (auto k : {ExchangeKind::typeII_A_B, ExchangeKind::typeI_A})
            for (auto c : exchange_coeffs(k, u, v, xi, xip, a, ap, p)) bad += !std::isfinite(std::abs(c));
        return one(bad, {{"u", cplx_json(u)}, {"v", cplx_json(v)}});
    });
}

inline double gram_constraint_residual(const ModelParams& p, int m_max) {
    double worst = 0;
    for (int m = 1; m <= m_max; ++m)
        for (int k = 1; k <= p.n; ++k) {
            wide s = 0, mag = 0;
            for (int j = 1; j <= p.n; ++j) {
                wide t = xpow_wide(-2.0 * j * m, p) * boson_gram_wide(j, k, m, p);
                s += t;
                mag = std::max(mag, wide(abs(t)));
            }
            worst = std::max(worst, static_cast<double>(abs(s) / std::max(wide(1), mag)));
        }
    return worst;
}

// Largest log coefficient over colour-orthogonal pairs missing from the product table.
inline double trivial_pair_residual(const ModelParams& p, int M) {
    const int n = p.n;
    auto lam = [n](int k, int j) { return (k == 1 || k == 3) ? omega(j, n) : alpha(j, n); };
    double worst = 0;
    for (int k1 = 0; k1 < 5; ++k1)
        for (int k2 = 0; k2 < 5; ++k2)
            for (int j1 = 1; j1 < n; ++j1)
                for (int j2 = 1; j2 < n; ++j2) {
                    if (std::abs(inner(lam(k1, j1), lam(k2, j2))) > 1e-12) continue;
                    if (classify_pair(OpKind(k1), j1, OpKind(k2), j2, p)) continue;
                    auto o1 = build_basic_op(OpKind(k1), j1, {}, M, p), o2 = build_basic_op(OpKind(k2), j2, {}, M, p);
                    for (auto c : contract_pair(o1, o2, M, p).log_coeffs) worst = std::max(worst, std::abs(c));
                }
    return worst;
}

inline void ope(Builder& b) {
    const ModelParams p = b.ctx.p;
    const int T = b.ctx.trials, M = 12;
    b.once("ope.table", TolKind::value, 1e-10, [p, M](auto&) {
        Ms out;
        for (auto& r : verify_ope_table(M, p))
            out.push_back({"." + r.id, r.residual, {{"M", M}, {"gamma_diff", r.gamma_diff}, {"coeff_diff", r.coeff_diff}}});
        return out;
    });
    b.once("ope.gram_constraint", TolKind::value, 1e-13, [p](auto&) { return one(gram_constraint_residual(p, 20), {{"m_max", 20}}); });
    b.once("ope.gram_mutation", TolKind::control, 1e-6, [p, M](auto&) {
        GramPerturbation pert{1, 1, 3, 1e-3};
        double worst = 0;
        for (auto& r : verify_ope_table(M, p, &pert)) worst = std::max(worst, r.residual);
        return one(worst, {{"perturbed_entry", {1, 1, 3}}, {"rel", pert.rel}});
    });
    b.once("ope.trivial_pairs", TolKind::value, 1e-10, [p, M](auto&) { return one(trivial_pair_residual(p, M), {{"M", M}}); });
    b.per_trial("ope.integrand_order", TolKind::value, 1e-10, T, [p](auto& g) {
        const int n = p.n;
        auto k = random_generic_weight(n, g), l = random_generic_weight(n, g);
        auto sec = SectorScalars::from_weights(k, l, p.r);
        Ms out;
        for (auto kind : {IntegrandKind::typeI, IntegrandKind::typeI_dual, IntegrandKind::typeII,
                          IntegrandKind::typeII_dual}) {
            double worst = 0;
            for (int mu = 0; mu < n; ++mu) {
                bool forward = kind == IntegrandKind::typeI || kind == IntegrandKind::typeII;
                std::size_t cnt = forward ? mu : n - 1 - mu;
                std::vector<SpectralPoint> zs;
                for (std::size_t i = 0; i < cnt; ++i) zs.push_back(draw_v(g, 0.5));
                SpectralPoint v0(draw_v(g, 0.5));
                cplx a = vertex_integrand(kind, mu, v0, zs, sec, p);
                cplx c = vertex_integrand(kind, mu, v0, zs, sec, p, IntegrandForm::reversed);
                worst = std::max(worst, std::abs(a - c) / std::max(std::abs(a), 1e-300));
            }
            out.push_back({std::string(".") + integrand_name(kind), worst, {{"k", k.bar}, {"l", l.bar}}});
        }
        return out;
    });
    b.once("ope.constants_finite", TolKind::exact, 0, [p](auto&) {
        int bad = 0;
        for (int i = 1; i <= 10; ++i) {
            ModelParams q = ModelParams::from_x(p.n, p.r, 0.05 * i);
            cplx c = constants(ConstantKind::c_n, q), cp = constants(ConstantKind::c_prime_n, q);
            bad += !std::isfinite(std::abs(c)) || !std::isfinite(std::abs(cp)) || c == 0.0 || cp == 0.0;
        }
        return one(bad, {{"x_values", "0.05..0.50 step 0.05"}});
    });
}

inline void commutation(Builder& b) {
    const ModelParams p = b.ctx.p;
    const int T = b.ctx.trials;
    for (int c = 0; c <= int(CommLaw::commute_VaUa_pm); ++c) {
        CommLaw law = CommLaw(c);
        bool pm_law = law == CommLaw::f_UaUa_pm || law == CommLaw::f_star_VaVa_pm || law == CommLaw::commute_VaUa_pm;
        if (pm_law && p.n < 3) continue;  // needs two neighbouring simple roots
        b.per_trial(std::string("commutation.") + comm_law_name(law), TolKind::value, 1e-10, T,
                    [p, law, pm_law](auto& g) {
                        SpectralPoint v(draw_v(g)), vp(draw_v(g));
                        double worst = 0;
                        for (int j = 1; j < p.n; ++j)
                            for (int pm : {-1, 1}) {
                                if (pm_law && (j + pm < 1 || j + pm > p.n - 1)) continue;
                                if (!pm_law && pm < 0) continue;
                                worst = std::max(worst, verify_commutation_factor(law, j, v, vp, p, pm));
                            }
                        return one(worst, {{"v", cplx_json(v.v)}, {"v_prime", cplx_json(vp.v)}});
                    });
    }
    b.once("commutation.delta_identity", TolKind::value, 1e-12,
           [p](auto&) { return one(delta_identity_residual(20, p), {{"order", 20}}); });
}

inline void zeros(Builder& b) {
    const ModelParams p = b.ctx.p;
    const int T = b.ctx.trials;
    for (int z = 0; z < 4; ++z) {
        auto rel = ZeroRelation(z);
        std::string id = std::string("zeros.") + zero_relation_name(rel);
        b.per_trial(id, TolKind::value, 1e-12, T, [p, rel](auto& g) {
            cplx v = draw_v(g);
            return one(ope_zero_check(rel, v, p), {{"v", cplx_json(v)}});
        });
        b.per_trial(id + ".control", TolKind::control, 1e-3, T, [p, rel](auto& g) {
            cplx v = draw_v(g);
            double off = uniform(g, 0.05, 0.45);
            return one(ope_zero_check(rel, v, p, off), {{"v", cplx_json(v)}, {"offset", off}});
        });
    }
}

inline void identities(Builder& b) {
    const ModelParams p = b.ctx.p;
    const int T = b.ctx.trials;
    for (auto which : {SumIdentity::sum_f, SumIdentity::sum_f_star}) {
        std::string id = which == SumIdentity::sum_f ? "identities.sum_f" : "identities.sum_f_star";
        b.per_trial(id, TolKind::value, 1e-10, std::max(T, 50), [p, which](auto& g) {
            const int n = p.n;
            std::vector<cplx> vl, pl;
            cplx mean = 0;
            for (int j = 0; j < n; ++j) {
                vl.push_back(cplx(uniform(g, 0, 1), uniform(g, -0.2, 0.2)));
                pl.push_back(cplx(uniform(g, -1, 1), uniform(g, -0.2, 0.2)));
                mean += pl.back();
            }
            for (auto& q : pl) q -= mean / double(n);
            json pj = json::array();
            for (auto q : pl) pj.push_back(cplx_json(q));
            return one(identity_residual(which, vl[0], vl, pl, p), {{"v", cplx_json(vl[0])}, {"p", pj}});
        });
    }
    const double strip = pi / (2 * p.eps);
    b.once("identities.bracket_antisymmetry", TolKind::value, 1e-12, [p, strip](auto& g) {
        double worst = 0;
        for (int i = 0; i < 100; ++i) {
            cplx v(uniform(g, -p.r, p.r), uniform(g, -strip, strip) * 0.999);
            worst = std::max(worst, rel_diff(bracket(p, -v, p.r), -bracket(p, v, p.r)));
        }
        return one(worst, {{"draws", 100}});
    });
    b.once("identities.bracket_quasi_periodicity", TolKind::value, 1e-10, [p](auto& g) {
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            cplx v = draw_v(g);
            worst = std::max(worst, rel_diff(bracket(p, v + p.r, p.r), -bracket(p, v, p.r)));
            // v -> v + pi i/eps leaves z fixed; only the Gaussian prefactor moves
            cplx factor = -std::exp(-2.0 * pi * I * v / p.r + pi * pi / (p.eps * p.r));
            worst = std::max(worst, rel_diff(bracket(p, SpectralPoint(v, 2), p.r), factor * bracket(p, v, p.r)));
        }
        return one(worst, {{"draws", 20}});
    });
    b.once("identities.theta_bracket", TolKind::value, 1e-10, [p](auto& g) {
        double worst = 0;
        const cplx tau = I * pi / (p.eps * p.r);
        for (int i = 0; i < 20; ++i) {
            double v = uniform(g, -p.r, p.r);
            cplx lhs = theta(0.5, -0.5, v / p.r, tau, p);
            cplx rhs = std::sqrt(p.eps * p.r / pi) * std::exp(-p.eps * p.r / 4) * bracket(p, v, p.r);
            worst = std::max(worst, rel_diff(lhs, rhs));
        }
        return one(worst, {{"draws", 20}});
    });
    b.once("identities.kernel_values", TolKind::value, 1e-12, [p](auto& g) {
        double worst = std::abs(kernel(KernelKind::h, 0.0, 0.0, p) + 1.0);
        for (int i = 0; i < 20; ++i) {
            cplx v = draw_v(g, 2.0);
            worst = std::max(worst, std::abs(kernel(KernelKind::f, v, 1.0, p) - 1.0));
            worst = std::max(worst, std::abs(kernel(KernelKind::f_star, v, 1.0, p) - 1.0));
        }
        return one(worst, {{"draws", 20}});
    });
    b.once("identities.comm_factor_inverse", TolKind::value, 1e-12, [p](auto& g) {
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            cplx v = draw_v(g);
            for (auto k : {CommKind::r_j, CommKind::r_star_j, CommKind::chi_j})
                for (int j = 1; j <= p.n; ++j)
                    worst = std::max(worst, std::abs(comm_factor(k, j, v, p) * comm_factor(k, j, -v, p) - 1.0));
        }
        return one(worst, {{"draws", 20}});
    });
    b.once("identities.qpoch_recurrence", TolKind::value, 1e-12, [](auto& g) {
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            cplx z = draw_v(g);
            double q = uniform(g, 0.05, 0.6);
            worst = std::max(worst, rel_diff(qpoch(z, {cplx(q)}), (1.0 - z) * qpoch(z * q, {cplx(q)})));
        }
        return one(worst, {{"draws", 20}});
    });
    // counts guards that failed to fire; each probe sits exactly on a pole
    b.once("identities.pole_guards", TolKind::exact, 0, [p](auto&) {
        int missed = 0;
        auto expect_pole = [&](auto&& f) {
            try {
                f();
                ++missed;
            } catch (const PoleError&) {
            }
        };
        expect_pole([&] { kernel(KernelKind::f, 0.5, 0.3, p); });
        expect_pole([&] { kernel(KernelKind::h, -1.0, 0.0, p); });
        expect_pole([&] { kernel(KernelKind::f_star, -0.5, 0.3, p); });
        expect_pole([&] {
            std::vector<cplx> vl(p.n, 0.1), pl(p.n, 0.0);
            identity_residual(SumIdentity::sum_f, vl[0], vl, pl, p);
        });
        return one(missed);
    });
}

}  // namespace suites

inline std::vector<Task> suite_tasks(const std::string& suite, const SuiteContext& ctx) {
    suites::Builder b(ctx);
    if (suite == "ybe-vertex") suites::ybe_vertex(b);
    else if (suite == "ybe-face") suites::ybe_face(b);
    else if (suite == "vertex-face") suites::vertex_face(b);
    else if (suite == "tail") suites::tail(b);
    else if (suite == "ope") suites::ope(b);
    else if (suite == "commutation") suites::commutation(b);
    else if (suite == "zeros") suites::zeros(b);
    else if (suite == "identities") suites::identities(b);
    else throw ConfigError("unknown suite id '" + suite + "'");
    return b.tasks;
}

inline std::vector<Task> all_tasks(const std::vector<std::string>& suite_ids, const SuiteContext& ctx) {
    std::vector<Task> out;
    for (auto& s : expand_suites(suite_ids)) {
        auto t = suite_tasks(s, ctx);
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

}  // namespace elvlab
