#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "weights.hpp"

namespace elvlab {

// Mode sums cancel terms of size up to x^{-O(nM)} down to O(1), so the contraction runs in
// extended precision seeded from the exact double eps.
using wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<240>,
                                           boost::multiprecision::et_off>;
inline constexpr double wide_digits = 240;

// [a]_x = (x^a - x^{-a}) / (x - x^{-1})
inline double qint(double a, const ModelParams& p) { return std::sinh(p.eps * a) / std::sinh(p.eps); }
inline wide qint_wide(double a, const ModelParams& p) {
    wide e(p.eps);
    return sinh(e * a) / sinh(e);
}

inline wide xpow_wide(double e, const ModelParams& p) { return exp(-wide(p.eps) * e); }

// Per-thread tables of everything transcendental the contraction needs, keyed by (n, r, eps).
struct WideTables {
    int n = 0, M = 0;
    double r = 0, eps = 0;
    wide x;
    std::vector<wide> atr, otr;                         // index m
    std::vector<std::vector<std::vector<wide>>> gram;   // [m][j][k], colours 1-based

    wide xpow(int e) const { return e >= 0 ? pow(x, e) : pow(1 / x, -e); }

    WideTables(const ModelParams& p, int M_) : n(p.n), M(M_), r(p.r), eps(p.eps) {
        x = exp(-wide(eps));
        atr.assign(M + 1, wide(0));
        otr = atr;
        gram.assign(M + 1, std::vector<std::vector<wide>>(n + 1, std::vector<wide>(n + 1, wide(0))));
        for (int m = 1; m <= M; ++m) {
            wide rm = qint_wide(r * m, p), r1m = qint_wide((r - 1) * m, p), qm = qint_wide(m, p);
            atr[m] = (m % 2 == 0 ? 1 : -1) * rm / r1m;
            otr[m] = qm / r1m;
            wide common = r1m / (qint_wide(double(n) * m, p) * rm);
            wide diag = m * qint_wide(double(n - 1) * m, p) * common;
            wide up = -m * xpow(n * m) * qm * common, down = -m * xpow(-n * m) * qm * common;
            for (int j = 1; j <= n; ++j)
                for (int k = 1; k <= n; ++k) gram[m][j][k] = j == k ? diag : (j > k ? up : down);
        }
    }
};

inline const WideTables& wide_tables(const ModelParams& p, int M) {
    thread_local std::vector<std::unique_ptr<WideTables>> cache;
    for (auto& t : cache)
        if (t->n == p.n && t->r == p.r && t->eps == p.eps && t->M >= M) return *t;
    if (cache.size() >= 8) cache.erase(cache.begin());
    cache.push_back(std::make_unique<WideTables>(p, std::max(M, 24)));
    return *cache.back();
}

// [B^j_m, B^k_{-m}] for colours 1..n and m >= 1.
inline wide boson_gram_wide(int j, int k, int m, const ModelParams& p) {
    const int n = p.n;
    if (j < 1 || j > n || k < 1 || k > n) throw DomainError("boson_gram: colour out of range");
    if (m < 1) throw DomainError("boson_gram: mode index must be positive");
    return wide_tables(p, m).gram[m][j][k];
}
inline double boson_gram(int j, int k, int m, const ModelParams& p) {
    return static_cast<double>(boson_gram_wide(j, k, m, p));
}

// Multiplies one gram entry by (1 + rel); used to check that the harness notices.
struct GramPerturbation {
    int j = 0, k = 0, m = 0;
    double rel = 0;
};

struct Betas {
    double b0, b1, b2;
    explicit Betas(double r)
        : b0(1.0 / std::sqrt(r * (r - 1))), b1(-std::sqrt((r - 1) / r)), b2(std::sqrt(r / (r - 1))) {}
};

enum class OpKind { U_alpha, U_omega, V_alpha, V_omega, W_alpha };

inline const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::U_alpha: return "U_alpha";
        case OpKind::U_omega: return "U_omega";
        case OpKind::V_alpha: return "V_alpha";
        case OpKind::V_omega: return "V_omega";
        case OpKind::W_alpha: return "W_alpha";
    }
    return "?";
}

// exp(charge (iQ_lambda + P_lambda (log z + i momentum_offset))) :exp(sum_m ...):
// ann[k][m-1] multiplies B^{k+1}_m z^{-m}; cre[k][m-1] multiplies B^{k+1}_{-m} z^{m}.
struct FreeFieldOperator {
    OpKind kind = OpKind::U_alpha;
    int j = 0;
    SpectralPoint v;
    double charge = 0;
    std::vector<double> weight;
    double momentum_offset = 0;
    int M = 0;
    std::vector<std::vector<wide>> ann, cre;

    static FreeFieldOperator identity(int n, int M) {
        FreeFieldOperator op;
        op.M = M;
        op.weight.assign(n, 0.0);
        op.ann.assign(n, std::vector<wide>(M, wide(0)));
        op.cre = op.ann;
        return op;
    }
};

namespace detail {
// Coefficient of B^k_m z^{-m} for signed m, colour k in 1..n; zero when the colour is absent.
inline wide exponent_coeff(OpKind kind, int j, int k, int m, const ModelParams& p) {
    const int am = std::abs(m);
    const WideTables& T = wide_tables(p, am);
    const double dm = m;
    auto atr = [&] { return T.atr[am]; };
    auto otr = [&] { return T.otr[am]; };
    switch (kind) {
        case OpKind::U_alpha:
        case OpKind::V_alpha:
        case OpKind::W_alpha: {
            double s = (k == j) ? 1.0 : (k == j + 1 ? -1.0 : 0.0);
            if (s == 0) return wide(0);
            wide base = s / dm * T.xpow(-j * m);
            if (kind == OpKind::U_alpha) return base;
            return -base * (kind == OpKind::V_alpha ? atr() : otr());
        }
        case OpKind::U_omega:
        case OpKind::V_omega: {
            if (k < 1 || k > j) return wide(0);
            wide base = T.xpow((j - 2 * k + 1) * m) / dm;
            return kind == OpKind::U_omega ? -base : base * atr();
        }
    }
    return wide(0);
}
}  // namespace detail

inline FreeFieldOperator build_basic_op(OpKind kind, int j, const SpectralPoint& v, int M, const ModelParams& p) {
    const int n = p.n;
    if (j < 1 || j > n - 1) throw DomainError("build_basic_op: index j must lie in [1, n-1]");
    if (M < 1) throw DomainError("build_basic_op: mode cutoff must be positive");
    Betas b(p.r);
    FreeFieldOperator op;
    op.kind = kind;
    op.j = j;
    op.v = v;
    op.M = M;
    const bool is_alpha = kind == OpKind::U_alpha || kind == OpKind::V_alpha || kind == OpKind::W_alpha;
    op.weight = is_alpha ? alpha(j, n) : omega(j, n);
    switch (kind) {
        case OpKind::U_alpha: op.charge = -b.b1; break;
        case OpKind::U_omega: op.charge = b.b1; break;
        case OpKind::V_alpha: op.charge = -b.b2; break;
        case OpKind::V_omega: op.charge = b.b2; break;
        case OpKind::W_alpha:
            op.charge = -b.b0;
            op.momentum_offset = pi * p.r;
            break;
    }
    op.ann.assign(n, std::vector<wide>(M, wide(0)));
    op.cre = op.ann;
    for (int k = 1; k <= n; ++k)
        for (int m = 1; m <= M; ++m) {
            op.ann[k - 1][m - 1] = detail::exponent_coeff(kind, j, k, m, p);
            op.cre[k - 1][m - 1] = detail::exponent_coeff(kind, j, k, -m, p);
        }
    return op;
}

// Scalar factor sign * z^gamma * exp(sum_m c_m (z'/z)^m).
struct OpeSeries {
    cplx gamma = 0;
    cplx sign = 1;
    std::vector<cplx> log_coeffs;
};

// gamma from the zero modes, c_m = sum_{j,k} ann1(j,m) cre2(k,m) G(j,k,m).
inline OpeSeries contract_pair(const FreeFieldOperator& op1, const FreeFieldOperator& op2, int M,
                               const ModelParams& p, const GramPerturbation* pert = nullptr) {
    if (op1.M != M || op2.M != M) throw DomainError("contract_pair: mismatched mode cutoffs");
    OpeSeries s;
    s.gamma = op1.charge * op2.charge * inner(op1.weight, op2.weight);
    s.sign = std::exp(I * op1.momentum_offset * s.gamma);
    const int n = int(op1.ann.size());
    s.log_coeffs.assign(M, 0.0);
    const WideTables& T = wide_tables(p, M);
    for (int m = 1; m <= M; ++m) {
        wide c = 0, biggest = 0;
        for (int j = 1; j <= n; ++j) {
            if (op1.ann[j - 1][m - 1] == 0) continue;
            for (int k = 1; k <= n; ++k) {
                if (op2.cre[k - 1][m - 1] == 0) continue;
                wide g = T.gram[m][j][k];
                if (pert && pert->j == j && pert->k == k && pert->m == m) g *= 1 + pert->rel;
                wide t = op1.ann[j - 1][m - 1] * op2.cre[k - 1][m - 1] * g;
                biggest = std::max(biggest, wide(abs(t)));
                c += t;
            }
        }
        // Rounding error of the sum is about biggest * 10^-digits; insist it stays far below 1e-18.
        if (biggest > 0 && log10(biggest) - wide_digits > -18 + log10(std::max(wide(1), wide(abs(c)))))
            throw DomainError("contract_pair: cancellation exceeds the working precision");
        s.log_coeffs[m - 1] = static_cast<double>(c);
    }
    return s;
}

// Mismatch between two series: absolute on gamma and sign, relative per log coefficient.
inline double series_mismatch(const OpeSeries& a, const OpeSeries& b) {
    double d = std::max(std::abs(a.gamma - b.gamma), std::abs(a.sign - b.sign));
    size_t M = std::min(a.log_coeffs.size(), b.log_coeffs.size());
    if (a.log_coeffs.size() != b.log_coeffs.size()) d = std::max(d, 1.0);
    for (size_t m = 0; m < M; ++m) {
        double mag = std::max(std::abs(a.log_coeffs[m]), std::abs(b.log_coeffs[m]));
        d = std::max(d, scaled_residual(std::abs(a.log_coeffs[m] - b.log_coeffs[m]), mag));
    }
    return d;
}

// (sgn x^xexp w; x^{e_1}, ..., x^{e_k})^power; no nomes means (1 - sgn x^xexp w)^power.
struct ProductFactor {
    int sgn = 1;
    double xexp = 0;
    std::vector<double> nome_xexps;
    int power = 1;
};

struct ClosedForm {
    std::string id;
    cplx gamma = 0;
    cplx sign = 1;
    std::vector<ProductFactor> factors;

    OpeSeries series(int M, const ModelParams& p) const {
        OpeSeries s{gamma, sign, std::vector<cplx>(M, 0.0)};
        for (auto& f : factors) {
            double a = f.sgn * p.xpow(f.xexp);
            for (int m = 1; m <= M; ++m) {
                double den = m;
                for (double e : f.nome_xexps) den *= 1.0 - p.xpow(e * m);
                s.log_coeffs[m - 1] += -double(f.power) * std::pow(a, m) / den;
            }
        }
        return s;
    }

    cplx eval_w(cplx w, const ModelParams& p) const {
        cplx val = 1;
        for (auto& f : factors) {
            std::vector<cplx> q;
            for (double e : f.nome_xexps) q.push_back(p.xpow(e));
            cplx fac = qpoch<double>(double(f.sgn) * p.xpow(f.xexp) * w, std::span<const cplx>(q), p.prod_tol);
            val *= f.power > 0 ? std::pow(fac, f.power) : 1.0 / std::pow(fac, -f.power);
        }
        return val;
    }

    // Value of the scalar factor for op1 at s1 and op2 at s2, with w = z2/z1.
    cplx value(const SpectralPoint& s1, const SpectralPoint& s2, const ModelParams& p) const {
        cplx w = s2.z(p.eps) / s1.z(p.eps);
        return sign * s1.zpow(gamma, p.eps) * eval_w(w, p);
    }
};

enum class PairId {
    UwUw_1j, UwUw_j1, UwUa, UaUw, UaUa_pm, UaUa,
    VwVw_1j, VwVw_j1, VwVa, VaVw, VaVa_pm, VaVa,
    VwUw, UwVw, VwUa, UwVa, VaUa_pm, VaUa, UaVa, UaVw, VaUw, UaVa_pm,
    WaVa_pm, VaWa_pm, VwWa, WaVw, UaWa_pm, WaUa_pm, UwWa, WaUw
};

inline const char* pair_name(PairId id) {
    static const char* names[] = {"UwUw_1j", "UwUw_j1", "UwUa",    "UaUw",    "UaUa_pm", "UaUa",
                                  "VwVw_1j", "VwVw_j1", "VwVa",    "VaVw",    "VaVa_pm", "VaVa",
                                  "VwUw",    "UwVw",    "VwUa",    "UwVa",    "VaUa_pm", "VaUa",
                                  "UaVa",    "UaVw",    "VaUw",    "UaVa_pm", "WaVa_pm", "VaWa_pm",
                                  "VwWa",    "WaVw",    "UaWa_pm", "WaUa_pm", "UwWa",    "WaUw"};
    return names[int(id)];
}

// Closed form of the listed product; j is the display index (for g_j and rho_j the non-trivial one).
inline ClosedForm closed_form_ope(PairId id, int j, const ModelParams& p) {
    const double n = p.n, r = p.r;
    ClosedForm cf;
    cf.id = pair_name(id);
    auto fac = [](int sgn, double e, std::vector<double> q, int pw) { return ProductFactor{sgn, e, std::move(q), pw}; };
    auto u_ratio = [&] {
        cf.gamma = -(r - 1) / r;
        cf.factors = {fac(1, 2 * r - 1, {2 * r}, 1), fac(1, 1, {2 * r}, -1)};
    };
    auto v_ratio = [&] {
        cf.gamma = -r / (r - 1);
        cf.factors = {fac(1, 2 * r - 1, {2 * r - 2}, 1), fac(1, -1, {2 * r - 2}, -1)};
    };
    auto one_plus_w = [&] {
        cf.gamma = 1;
        cf.factors = {fac(-1, 0, {}, 1)};
    };
    auto wv = [&](bool w_left) {
        cf.gamma = -1 / (r - 1);
        cf.sign = w_left ? -std::exp(I * pi * cf.gamma) : cplx(1);
        cf.factors = {fac(-1, r, {2 * r - 2}, 1), fac(-1, r - 2, {2 * r - 2}, -1)};
    };
    auto uw = [&](bool w_left) {
        cf.gamma = 1 / r;
        cf.sign = w_left ? -1.0 : 1.0;
        cf.factors = {fac(1, r - 1, {2 * r}, 1), fac(1, r + 1, {2 * r}, -1)};
    };
    switch (id) {
        case PairId::UwUw_1j:
        case PairId::UwUw_j1:
            cf.gamma = (r - 1) / r * (n - j) / n;
            cf.factors = {fac(1, 2 * n + 2 * r - j - 1, {2 * r, 2 * n}, 1), fac(1, j + 1, {2 * r, 2 * n}, 1),
                          fac(1, 2 * n - j + 1, {2 * r, 2 * n}, -1), fac(1, 2 * r + j - 1, {2 * r, 2 * n}, -1)};
            break;
        case PairId::UwUa:
        case PairId::UaUw:
        case PairId::UaUa_pm: u_ratio(); break;
        case PairId::UaUa:
            cf.gamma = 2 * (r - 1) / r;
            cf.factors = {fac(1, 0, {}, 1), fac(1, 2, {2 * r}, 1), fac(1, 2 * r - 2, {2 * r}, -1)};
            break;
        case PairId::VwVw_1j:
        case PairId::VwVw_j1: {
            std::vector<double> q{2 * r - 2, 2 * n};
            cf.gamma = r / (r - 1) * (n - j) / n;
            cf.factors = {fac(1, 2 * n + 2 * r - j - 1, q, 1), fac(1, j - 1, q, 1), fac(1, 2 * n - j - 1, q, -1),
                          fac(1, 2 * r + j - 1, q, -1)};
            break;
        }
        case PairId::VwVa:
        case PairId::VaVw:
        case PairId::VaVa_pm: v_ratio(); break;
        case PairId::VaVa:
            cf.gamma = 2 * r / (r - 1);
            cf.factors = {fac(1, 0, {}, 1), fac(1, -2, {2 * r - 2}, 1), fac(1, 2 * r, {2 * r - 2}, -1)};
            break;
        case PairId::VwUw:
        case PairId::UwVw: {
            std::vector<double> q{2, 2 * n};
            cf.gamma = -j * (n - j) / n;
            cf.factors = {fac(-1, 2.0 * j + 1, q, 1), fac(-1, 2 * n - 2.0 * j + 1, q, 1), fac(-1, 1, q, -1),
                          fac(-1, 2 * n + 1, q, -1)};
            break;
        }
        case PairId::VwUa:
        case PairId::UwVa:
        case PairId::VaUa_pm:
        case PairId::UaVw:
        case PairId::VaUw:
        case PairId::UaVa_pm: one_plus_w(); break;
        case PairId::VaUa:
        case PairId::UaVa:
            cf.gamma = -2;
            cf.factors = {fac(-1, 1, {}, -1), fac(-1, -1, {}, -1)};
            break;
        case PairId::WaVa_pm:
        case PairId::WaVw: wv(true); break;
        case PairId::VaWa_pm:
        case PairId::VwWa: wv(false); break;
        case PairId::UaWa_pm:
        case PairId::UwWa: uw(false); break;
        case PairId::WaUa_pm:
        case PairId::WaUw: uw(true); break;
    }
    return cf;
}

struct PairMatch {
    PairId id;
    int j;
};

// Table entry for an ordered operator pair; nullopt when the pair contracts trivially.
inline std::optional<PairMatch> classify_pair(OpKind k1, int j1, OpKind k2, int j2, const ModelParams& p) {
    using K = OpKind;
    const bool same = j1 == j2, adj = std::abs(j1 - j2) == 1;
    auto hit = [&](PairId id, int j) { return std::optional<PairMatch>(PairMatch{id, j}); };
    if (k1 == K::U_omega && k2 == K::U_omega) {
        if (j1 == 1) return hit(PairId::UwUw_1j, j2);
        if (j2 == 1) return hit(PairId::UwUw_j1, j1);
    }
    if (k1 == K::V_omega && k2 == K::V_omega) {
        if (j1 == 1) return hit(PairId::VwVw_1j, j2);
        if (j2 == 1) return hit(PairId::VwVw_j1, j1);
    }
    struct Rule {
        K a, b;
        bool need_same;
        PairId id;
    };
    static const Rule rules[] = {
        {K::U_omega, K::U_alpha, true, PairId::UwUa},    {K::U_alpha, K::U_omega, true, PairId::UaUw},
        {K::U_alpha, K::U_alpha, true, PairId::UaUa},    {K::U_alpha, K::U_alpha, false, PairId::UaUa_pm},
        {K::V_omega, K::V_alpha, true, PairId::VwVa},    {K::V_alpha, K::V_omega, true, PairId::VaVw},
        {K::V_alpha, K::V_alpha, true, PairId::VaVa},    {K::V_alpha, K::V_alpha, false, PairId::VaVa_pm},
        {K::V_omega, K::U_omega, true, PairId::VwUw},    {K::U_omega, K::V_omega, true, PairId::UwVw},
        {K::V_omega, K::U_alpha, true, PairId::VwUa},    {K::U_alpha, K::V_omega, true, PairId::UaVw},
        {K::U_omega, K::V_alpha, true, PairId::UwVa},    {K::V_alpha, K::U_omega, true, PairId::VaUw},
        {K::V_alpha, K::U_alpha, true, PairId::VaUa},    {K::V_alpha, K::U_alpha, false, PairId::VaUa_pm},
        {K::U_alpha, K::V_alpha, true, PairId::UaVa},    {K::U_alpha, K::V_alpha, false, PairId::UaVa_pm},
        {K::W_alpha, K::V_alpha, false, PairId::WaVa_pm}, {K::V_alpha, K::W_alpha, false, PairId::VaWa_pm},
        {K::V_omega, K::W_alpha, true, PairId::VwWa},    {K::W_alpha, K::V_omega, true, PairId::WaVw},
        {K::U_alpha, K::W_alpha, false, PairId::UaWa_pm}, {K::W_alpha, K::U_alpha, false, PairId::WaUa_pm},
        {K::U_omega, K::W_alpha, true, PairId::UwWa},    {K::W_alpha, K::U_omega, true, PairId::WaUw},
    };
    for (auto& rl : rules)
        if (rl.a == k1 && rl.b == k2 && (rl.need_same ? same : adj)) return hit(rl.id, j1);

    auto lam = [&](K k, int j) {
        bool a = k == K::U_alpha || k == K::V_alpha || k == K::W_alpha;
        return a ? alpha(j, p.n) : omega(j, p.n);
    };
    if (std::abs(inner(lam(k1, j1), lam(k2, j2))) < 1e-12) return std::nullopt;
    throw DomainError(std::string("no product formula for the pair ") + op_kind_name(k1) + "_" + std::to_string(j1) +
                      " x " + op_kind_name(k2) + "_" + std::to_string(j2));
}

inline std::optional<ClosedForm> pair_closed_form(const FreeFieldOperator& a, const FreeFieldOperator& b,
                                                  const ModelParams& p) {
    auto m = classify_pair(a.kind, a.j, b.kind, b.j, p);
    if (!m) return std::nullopt;
    return closed_form_ope(m->id, m->j, p);
}

struct OpeRow {
    std::string id;
    double gamma_diff = 0;
    double coeff_diff = 0;
    double residual = 0;
};

// Every listed product formula instantiated for j = 1..n-1 (and both neighbours for the _pm rows).
inline std::vector<OpeRow> verify_ope_table(int M, const ModelParams& p, const GramPerturbation* pert = nullptr) {
    using K = OpKind;
    const int n = p.n;
    std::vector<OpeRow> rows;
    auto run = [&](K k1, int j1, K k2, int j2) {
        auto m = classify_pair(k1, j1, k2, j2, p);
        if (!m) return;
        auto o1 = build_basic_op(k1, j1, SpectralPoint(0.0), M, p);
        auto o2 = build_basic_op(k2, j2, SpectralPoint(0.0), M, p);
        OpeSeries lhs = contract_pair(o1, o2, M, p, pert);
        OpeSeries rhs = closed_form_ope(m->id, m->j, p).series(M, p);
        OpeRow row;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s[%d,%d]", pair_name(m->id), j1, j2);
        row.id = buf;
        row.gamma_diff = std::max(std::abs(lhs.gamma - rhs.gamma), std::abs(lhs.sign - rhs.sign));
        OpeSeries l2 = lhs, r2 = rhs;
        l2.gamma = r2.gamma = 0;
        l2.sign = r2.sign = 1;
        row.coeff_diff = series_mismatch(l2, r2);
        row.residual = std::max(row.gamma_diff, row.coeff_diff);
        rows.push_back(row);
    };
    for (int j = 1; j < n; ++j) {
        run(K::U_omega, 1, K::U_omega, j);
        if (j > 1) run(K::U_omega, j, K::U_omega, 1);
        run(K::V_omega, 1, K::V_omega, j);
        if (j > 1) run(K::V_omega, j, K::V_omega, 1);
        for (auto [a, b] : std::vector<std::pair<K, K>>{{K::U_omega, K::U_alpha},
                                                         {K::U_alpha, K::U_omega},
                                                         {K::U_alpha, K::U_alpha},
                                                         {K::V_omega, K::V_alpha},
                                                         {K::V_alpha, K::V_omega},
                                                         {K::V_alpha, K::V_alpha},
                                                         {K::V_omega, K::U_omega},
                                                         {K::U_omega, K::V_omega},
                                                         {K::V_omega, K::U_alpha},
                                                         {K::U_alpha, K::V_omega},
                                                         {K::U_omega, K::V_alpha},
                                                         {K::V_alpha, K::U_omega},
                                                         {K::V_alpha, K::U_alpha},
                                                         {K::U_alpha, K::V_alpha},
                                                         {K::V_omega, K::W_alpha},
                                                         {K::W_alpha, K::V_omega},
                                                         {K::U_omega, K::W_alpha},
                                                         {K::W_alpha, K::U_omega}})
            run(a, j, b, j);
        for (int jp : {j - 1, j + 1}) {
            if (jp < 1 || jp > n - 1) continue;
            run(K::U_alpha, j, K::U_alpha, jp);
            run(K::V_alpha, j, K::V_alpha, jp);
            run(K::V_alpha, j, K::U_alpha, jp);
            run(K::U_alpha, jp, K::V_alpha, j);
            run(K::W_alpha, j, K::V_alpha, jp);
            run(K::V_alpha, jp, K::W_alpha, j);
            run(K::U_alpha, jp, K::W_alpha, j);
            run(K::W_alpha, j, K::U_alpha, jp);
        }
    }
    return rows;
}

// Scalar factor of op(k1, j1) at s1 times op(k2, j2) at s2; 1 for trivially contracting pairs.
inline cplx pair_value(OpKind k1, int j1, const SpectralPoint& s1, OpKind k2, int j2, const SpectralPoint& s2,
                       const ModelParams& p) {
    auto m = classify_pair(k1, j1, k2, j2, p);
    if (!m) return 1.0;
    return closed_form_ope(m->id, m->j, p).value(s1, s2, p);
}

enum class CommLaw { r_j, f_UaUw, f_UaUa_pm, h, r_star_j, f_star_VaVw, f_star_VaVa_pm, h_star, chi_j,
                     commute_VwUa, commute_UwVa, commute_VaUa_pm };

inline const char* comm_law_name(CommLaw c) {
    static const char* names[] = {"r_j",        "-f:UaUw",    "-f:UaUa_pm",   "h",           "r*_j",
                                  "-f*:VaVw",   "-f*:VaVa_pm", "h*",          "chi_j",       "1:VwUa",
                                  "1:UwVa",     "1:VaUa_pm"};
    return names[int(c)];
}

// |s12(v, v') - c(v - v') s21(v', v)| scaled by the larger side. pm picks j +- 1 for the _pm laws.
inline double verify_commutation_factor(CommLaw which, int j, const SpectralPoint& v, const SpectralPoint& vp,
                                        const ModelParams& p, int pm = +1) {
    using K = OpKind;
    const int jn = j + pm;
    SpectralPoint d = v - vp;
    K k1{}, k2{};
    int j1 = j, j2 = j;
    cplx c = 1;
    switch (which) {
        case CommLaw::r_j: k1 = k2 = K::U_omega; j1 = 1; c = comm_factor(CommKind::r_j, j, d, p); break;
        case CommLaw::f_UaUw:
            k1 = K::U_alpha, k2 = K::U_omega;
            c = -kernel(KernelKind::f, d.full_v(p.eps), 0.0, p);
            break;
        case CommLaw::f_UaUa_pm:
            k1 = k2 = K::U_alpha, j2 = jn;
            c = -kernel(KernelKind::f, d.full_v(p.eps), 0.0, p);
            break;
        case CommLaw::h: k1 = k2 = K::U_alpha; c = kernel(KernelKind::h, d.full_v(p.eps), 0.0, p); break;
        case CommLaw::r_star_j:
            k1 = k2 = K::V_omega;
            j1 = 1;
            c = comm_factor(CommKind::r_star_j, j, d, p);
            break;
        case CommLaw::f_star_VaVw:
            k1 = K::V_alpha, k2 = K::V_omega;
            c = -kernel(KernelKind::f_star, d.full_v(p.eps), 0.0, p);
            break;
        case CommLaw::f_star_VaVa_pm:
            k1 = k2 = K::V_alpha, j2 = jn;
            c = -kernel(KernelKind::f_star, d.full_v(p.eps), 0.0, p);
            break;
        case CommLaw::h_star: k1 = k2 = K::V_alpha; c = kernel(KernelKind::h_star, d.full_v(p.eps), 0.0, p); break;
        case CommLaw::chi_j: k1 = K::U_omega, k2 = K::V_omega; c = comm_factor(CommKind::chi_j, j, d, p); break;
        case CommLaw::commute_VwUa: k1 = K::V_omega, k2 = K::U_alpha; break;
        case CommLaw::commute_UwVa: k1 = K::U_omega, k2 = K::V_alpha; break;
        case CommLaw::commute_VaUa_pm: k1 = K::V_alpha, k2 = K::U_alpha, j2 = jn; break;
    }
    if (j1 < 1 || j1 > p.n - 1 || j2 < 1 || j2 > p.n - 1)
        throw DomainError("verify_commutation_factor: index out of range");
    cplx s12 = pair_value(k1, j1, v, k2, j2, vp, p);
    cplx s21 = pair_value(k2, j2, vp, k1, j1, v, p);
    cplx rhs = c * s21;
    return scaled_residual(std::abs(s12 - rhs), std::max(std::abs(s12), std::abs(rhs)));
}

// Laurent coefficients of 1/(z^2(1+xw)(1+w/x)) - (z <-> z') against the delta-function side.
// Index s labels the monomial z^{-2-s} z'^s for s in [-M-2, M]; the comparison is relative.
inline double delta_identity_residual(int M, const ModelParams& p) {
    const double x = p.x();
    if (!(x > 0 && x < 1)) throw DomainError("delta identity needs 0 < x < 1");
    auto c = [&](int k) {
        double s = 0;
        for (int a = 0; a <= k; ++a) s += std::pow(x, a - (k - a));
        return (k % 2 == 0 ? 1.0 : -1.0) * s;
    };
    double worst = 0;
    for (int s = -M - 2; s <= M; ++s) {
        double lhs = s >= 0 ? c(s) : (s == -1 ? 0.0 : -c(-2 - s));
        double rhs = (std::pow(-x, s + 1) - std::pow(-x, -(s + 1))) / (1.0 / x - x);
        worst = std::max(worst, scaled_residual(std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))));
    }
    return worst;
}

enum class ZeroRelation { WV, WV_prime, UW, UW_prime };

inline const char* zero_relation_name(ZeroRelation z) {
    switch (z) {
        case ZeroRelation::WV: return "WV";
        case ZeroRelation::WV_prime: return "WV'";
        case ZeroRelation::UW: return "UW";
        case ZeroRelation::UW_prime: return "UW'";
    }
    return "?";
}

// Largest |scalar factor| over both sides of the relation; offset = 0 sits on the zero,
// a non-zero offset moves off it (negative control).
inline double ope_zero_check(ZeroRelation which, cplx v, const ModelParams& p, double offset = 0.0) {
    const double r = p.r;
    SpectralPoint at(v);
    auto val = [&](PairId id, const SpectralPoint& s1, const SpectralPoint& s2) {
        return std::abs(closed_form_ope(id, 1, p).value(s1, s2, p));
    };
    switch (which) {
        case ZeroRelation::WV:
            return std::max(val(PairId::WaVa_pm, {v + r / 2 + offset, -1}, at),
                            val(PairId::VaWa_pm, at, {v - r / 2 - offset, -1}));
        case ZeroRelation::WV_prime:
            return std::max(val(PairId::WaVw, {v + r / 2 + offset, -1}, at),
                            val(PairId::VwWa, at, {v - r / 2 - offset, -1}));
        case ZeroRelation::UW:
            return std::max(val(PairId::UaWa_pm, at, SpectralPoint(v - (r - 1) / 2 - offset)),
                            val(PairId::WaUa_pm, SpectralPoint(v + (r - 1) / 2 + offset), at));
        case ZeroRelation::UW_prime:
            return std::max(val(PairId::UwWa, at, SpectralPoint(v - (r - 1) / 2 - offset)),
                            val(PairId::WaUw, SpectralPoint(v + (r - 1) / 2 + offset), at));
    }
    throw DomainError("ope_zero_check: unknown selector");
}

enum class ContourSide { inside, outside, none };

inline const char* side_name(ContourSide s) {
    return s == ContourSide::inside ? "inside" : (s == ContourSide::outside ? "outside" : "none");
}

// z_to = sgn * x^{e0 + k step} * z_from for k >= 0, or for every integer k when two_sided.
struct LatticeLaw {
    int from = 0, to = 1;
    int sgn = 1;
    double e0 = 0, step = 0;
    bool two_sided = false;
    ContourSide side = ContourSide::none;
    std::string source;

    cplx ratio(int k, const ModelParams& p) const { return double(sgn) * p.xpow(e0 + k * step); }
};

struct ChainKernel {
    int earlier, later;
    KernelKind kind;
    double weight;
};

struct KernelDescriptor {
    std::vector<FreeFieldOperator> ops;
    std::vector<std::pair<std::pair<int, int>, ClosedForm>> pair_forms;
    std::vector<ChainKernel> kernels;
    std::vector<LatticeLaw> poles, zeros;

    cplx evaluate(const std::vector<SpectralPoint>& pts, const ModelParams& p) const {
        if (pts.size() != ops.size()) throw DomainError("KernelDescriptor: wrong number of points");
        cplx val = 1;
        for (auto& [ij, cf] : pair_forms) val *= cf.value(pts[ij.first], pts[ij.second], p);
        for (auto& k : kernels) {
            SpectralPoint d = pts[k.later] - pts[k.earlier];
            val *= kernel(k.kind, d.full_v(p.eps), k.weight, p);
        }
        return val;
    }
};

namespace detail {
inline bool is_u(OpKind k) { return k == OpKind::U_alpha || k == OpKind::U_omega; }
inline bool is_v(OpKind k) { return k == OpKind::V_alpha || k == OpKind::V_omega; }

inline void push_factor_laws(KernelDescriptor& kd, int a, int b, const ClosedForm& cf) {
    for (auto& f : cf.factors) {
        LatticeLaw law;
        law.from = a;
        law.to = b;
        law.sgn = f.sgn;
        law.e0 = -f.xexp;
        law.source = cf.id;
        if (f.nome_xexps.size() == 1) law.step = -f.nome_xexps[0];
        else if (f.nome_xexps.size() > 1) continue;  // two-nome lattices stay implicit in the closed form
        (f.power > 0 ? kd.zeros : kd.poles).push_back(law);
    }
}
}  // namespace detail

// Closed form and pole/zero catalog for an ordered operator chain.
// Consecutive U (or V) chain links carry an f (or f*) kernel at `chain_weight`; their net pole families
// are tagged relative to the later variable.
inline KernelDescriptor assemble_kernel(const std::vector<FreeFieldOperator>& ops, const ModelParams& p,
                                        double chain_weight = 0.3) {
    if (ops.empty()) throw DomainError("assemble_kernel: empty operator list");
    const double r = p.r;
    KernelDescriptor kd;
    kd.ops = ops;
    for (size_t a = 0; a < ops.size(); ++a)
        for (size_t b = a + 1; b < ops.size(); ++b) {
            auto m = classify_pair(ops[a].kind, ops[a].j, ops[b].kind, ops[b].j, p);
            if (!m) continue;
            ClosedForm cf = closed_form_ope(m->id, m->j, p);
            kd.pair_forms.push_back({{int(a), int(b)}, cf});
            const bool consecutive = b == a + 1;
            const PairId id = m->id;
            const bool u_link = id == PairId::UwUa || id == PairId::UaUw || id == PairId::UaUa_pm;
            const bool v_link = id == PairId::VwVa || id == PairId::VaVw || id == PairId::VaVa_pm;
            if (consecutive && (u_link || v_link)) {
                kd.kernels.push_back({int(a), int(b), u_link ? KernelKind::f : KernelKind::f_star, chain_weight});
                double e = u_link ? 1.0 : -1.0, st = u_link ? 2 * r : 2 * (r - 1);
                std::string src = std::string(cf.id) + (u_link ? "+f" : "+f*");
                kd.poles.push_back({int(a), int(b), 1, e, st, false, ContourSide::inside, src});
                kd.poles.push_back({int(a), int(b), 1, -e, -st, false, ContourSide::outside, src});
                continue;
            }
            const bool vu = id == PairId::VaUa, uv = id == PairId::UaVa;
            if (vu || uv) {
                // Poles at z_V = -x^{+-1} z_U; the V contour encircles them only in the VU order.
                int zv = vu ? int(a) : int(b), zu = vu ? int(b) : int(a);
                ContourSide side = vu ? ContourSide::inside : ContourSide::outside;
                kd.poles.push_back({zu, zv, -1, 1, 0, false, side, cf.id});
                kd.poles.push_back({zu, zv, -1, -1, 0, false, side, cf.id});
                continue;
            }
            detail::push_factor_laws(kd, int(a), int(b), cf);
        }
    return kd;
}

enum class IntegrandKind { typeI, typeI_dual, typeII, typeII_dual, bose_lambda, lambda_repII };
enum class IntegrandForm { primary, reversed };

inline const char* integrand_name(IntegrandKind k) {
    static const char* names[] = {"typeI", "typeI_dual", "typeII", "typeII_dual", "bose_lambda", "lambda_repII"};
    return names[int(k)];
}

enum class ConstantKind { c_n, c_prime_n };

inline cplx constants(ConstantKind which, const ModelParams& p) {
    const double n = p.n, r = p.r;
    if (which == ConstantKind::c_n) {
        double q = p.xpow(2 * r);
        cplx den = std::pow(qpoch(cplx(p.xpow(2.0)), {q}, p.prod_tol), n) *
                   std::pow(qpoch(cplx(q), {q}, p.prod_tol), 2 * n - 3);
        return p.xpow((r - 1) / r * (n - 1) / (2 * n)) * g_fun(p.n - 1, p.xpow(n), p) / den;
    }
    double qp = p.xpow(2 * r - 2);
    cplx ratio = qpoch(cplx(p.xpow(2 * r)), {qp}, p.prod_tol) / qpoch(cplx(qp), {qp}, p.prod_tol);
    return p.xpow(r * (n - 1) / (2 * (r - 1))) * std::pow(ratio, n) * g_star_fun(p.n - 1, p.xpow(n), p);
}

namespace detail {
struct ChainTerm {
    OpKind kind;
    int j;
    SpectralPoint at;
};

inline cplx chain_value(const std::vector<ChainTerm>& ops, const ModelParams& p) {
    cplx val = 1;
    for (size_t a = 0; a < ops.size(); ++a)
        for (size_t b = a + 1; b < ops.size(); ++b) {
            cplx f = pair_value(ops[a].kind, ops[a].j, ops[a].at, ops[b].kind, ops[b].j, ops[b].at, p);
            if (!std::isfinite(std::abs(f)))
                throw PoleError(std::string("integrand: operator product pole between ") + op_kind_name(ops[a].kind) +
                                " and " + op_kind_name(ops[b].kind) + " (see kernel-catalog)");
            val *= f;
        }
    return val;
}

inline cplx kern(KernelKind k, const SpectralPoint& later, const SpectralPoint& earlier, double w,
                 const ModelParams& p) {
    return kernel(k, (later - earlier).full_v(p.eps), w, p);
}
}  // namespace detail

// Scalar integrand of the selected vertex-operator display; the normal-ordered remainder is 1.
// zs holds the integration points in display order (v_1..v_mu, or v_{mu+1}..v_{n-1}, etc.).
inline cplx vertex_integrand(IntegrandKind which, int mu, const SpectralPoint& v0, const std::vector<SpectralPoint>& zs,
                             const SectorScalars& sector, const ModelParams& p,
                             IntegrandForm form = IntegrandForm::primary) {
    using detail::ChainTerm;
    const int n = p.n;
    const double Lr = p.r, Lp = p.r - 1;
    check_index(mu, n, "vertex_integrand");
    const auto& K = sector.K;
    const auto& Ls = sector.L;
    auto need = [&](size_t want) {
        if (zs.size() != want)
            throw DomainError(std::string(integrand_name(which)) + ": expected " + std::to_string(want) +
                              " integration points");
    };
    const bool rev = form == IntegrandForm::reversed;
    std::vector<ChainTerm> chain;
    cplx val = 1;
    switch (which) {
        case IntegrandKind::typeI:
        case IntegrandKind::typeII: {
            need(mu);
            const bool one = which == IntegrandKind::typeI;
            const OpKind w = one ? OpKind::U_omega : OpKind::V_omega, a = one ? OpKind::U_alpha : OpKind::V_alpha;
            const KernelKind kk = one ? KernelKind::f : KernelKind::f_star;
            const auto& S = one ? K : Ls;
            std::vector<SpectralPoint> v{v0};
            v.insert(v.end(), zs.begin(), zs.end());
            chain.push_back({w, 1, v0});
            for (int j = 1; j <= mu; ++j) chain.push_back({a, j, v[j]});
            if (rev) std::reverse(chain.begin(), chain.end());
            val = detail::chain_value(chain, p);
            for (int j = 0; j < mu; ++j)
                val *= rev ? detail::kern(kk, v[j], v[j + 1], 1 - S[j][mu], p)
                           : detail::kern(kk, v[j + 1], v[j], S[j][mu], p);
            if (rev && mu % 2 == 1) val = -val;
            if (one)
                for (int j = 0; j < n; ++j)
                    if (j != mu) val /= bracket_denominator(p, K[j][mu], Lr, "typeI [K_{j mu}]");
            return val;
        }
        case IntegrandKind::typeI_dual:
        case IntegrandKind::typeII_dual: {
            need(n - 1 - mu);
            const bool one = which == IntegrandKind::typeI_dual;
            const OpKind w = one ? OpKind::U_omega : OpKind::V_omega, a = one ? OpKind::U_alpha : OpKind::V_alpha;
            const KernelKind kk = one ? KernelKind::f : KernelKind::f_star;
            const auto& S = one ? K : Ls;
            // v[j] for j = mu+1..n, with v_n = v - n/2
            std::vector<SpectralPoint> v(n + 1);
            for (int j = mu + 1; j <= n - 1; ++j) v[j] = zs[j - mu - 1];
            v[n] = v0 - n / 2.0;
            chain.push_back({w, n - 1, v[n]});
            for (int j = n - 1; j >= mu + 1; --j) chain.push_back({a, j, v[j]});
            if (rev) std::reverse(chain.begin(), chain.end());
            val = detail::chain_value(chain, p);
            for (int j = mu + 1; j <= n - 1; ++j)
                val *= rev ? detail::kern(kk, v[j + 1], v[j], 1 - S[mu][j], p)
                           : detail::kern(kk, v[j], v[j + 1], S[mu][j], p);
            if (!rev && (n - 1 - mu) % 2 == 1) val = -val;
            val /= constants(one ? ConstantKind::c_n : ConstantKind::c_prime_n, p);
            if (!one)
                for (int j = 0; j < n; ++j)
                    if (j != mu)
                        val *= bracket(p, 1.0, Lp) / bracket_denominator(p, Ls[j][mu], Lp, "typeII* [L_{j mu}]'");
            return val;
        }
        case IntegrandKind::bose_lambda: {
            if (zs.empty()) throw DomainError("bose_lambda: needs nu > mu");
            const int nu = mu + int(zs.size());
            if (nu > n - 1) throw DomainError("bose_lambda: nu exceeds n-1");
            std::vector<SpectralPoint> v(n);
            v[mu] = v0;
            for (int j = mu + 1; j <= nu; ++j) v[j] = zs[j - mu - 1];
            for (int j = mu + 1; j <= nu; ++j) chain.push_back({OpKind::U_alpha, j, v[j]});
            val = detail::chain_value(chain, p);
            for (int j = mu; j < nu; ++j) val *= detail::kern(KernelKind::f, v[j + 1], v[j], K[j][nu], p);
            // G_K on both sides is evaluated on the supplied sector and cancels.
            WeightVec k{std::vector<double>(n), WeightVec::Tag::generic};
            for (int m = 0; m < n; ++m) k.bar[m] = K[m][0];
            cplx gk = norm_products(k, NormKind::G_a, p);
            return gk * val / gk;
        }
        case IntegrandKind::lambda_repII: {
            if (mu > n - 2) throw DomainError("lambda_repII: mu must be at most n-2");
            need(n - 2 - mu);
            std::vector<SpectralPoint> v(n);
            for (int j = mu + 1; j <= n - 2; ++j) v[j] = zs[j - mu - 1];
            v[n - 1] = SpectralPoint(v0.v, v0.half_turns + 1);
            chain.push_back({OpKind::W_alpha, n - 1, v0 - (p.r - 1) / 2});
            for (int j = n - 2; j >= mu + 1; --j) chain.push_back({OpKind::V_alpha, j, v[j]});
            val = detail::chain_value(chain, p);
            for (int j = mu + 1; j <= n - 2; ++j) val *= detail::kern(KernelKind::f_star, v[j], v[j + 1], Ls[mu][j], p);
            double q = p.xpow(2 * p.r);
            cplx pref = ((n - mu) % 2 == 0 ? 1.0 : -1.0) * bracket(p, K[n - 2][n - 1], Lr) /
                        ((1.0 / p.x() - p.x()) * std::pow(qpoch(cplx(q), {q}, p.prod_tol), 3));
            pref *= bracket(p, Ls[mu][n - 1] - 1.0, Lp) / bracket(p, 1.0, Lp);
            WeightVec k{std::vector<double>(n), WeightVec::Tag::generic}, l = k;
            for (int m = 0; m < n; ++m) {
                k.bar[m] = K[m][0];
                l.bar[m] = Ls[m][0];
            }
            cplx gk = norm_products(k, NormKind::G_a, p), gl = norm_products(l, NormKind::G_prime, p);
            // G_K G'_L^{-1} ... G_K^{-1} G'_L on a single sector.
            return pref * (gk / gl) * val * (gl / gk);
        }
    }
    throw DomainError("vertex_integrand: unknown selector");
}

}  // namespace elvlab
