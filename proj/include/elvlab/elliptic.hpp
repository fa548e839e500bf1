#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "params.hpp"

namespace elvlab {

// Theta function with characteristics, summed symmetrically around the dominant index.
// terms > 0 sums m in [-terms, terms]; terms == 0 grows outward until terms drop below tol.
template <class T>
std::complex<T> theta_series(T a, T b, std::complex<T> v, std::complex<T> tau, int terms = 0,
                             T tol = T(1e-16), int* used = nullptr) {
    if (!(tau.imag() > 0)) throw DomainError("theta: Im(tau) must be positive");
    const std::complex<T> iu(0, 1);
    const T pi_t = std::numbers::pi_v<T>;
    auto term = [&](long m) {
        T ma = T(m) + a;
        return std::exp(iu * pi_t * ma * (ma * tau + T(2) * (v + b)));
    };
    std::complex<T> sum(0);
    if (terms > 0) {
        for (long m = -terms; m <= terms; ++m) sum += term(m);
        if (used) *used = terms;
        return sum;
    }
    long centre = std::lround(-a - v.imag() / tau.imag());
    sum = term(centre);
    T peak = std::abs(sum);
    long k = 1;
    for (; k < 100000; ++k) {
        std::complex<T> up = term(centre + k), dn = term(centre - k);
        sum += up + dn;
        peak = std::max({peak, std::abs(up), std::abs(dn)});
        if (std::abs(up) < tol * peak && std::abs(dn) < tol * peak) break;
    }
    if (used) *used = int(k);
    return sum;
}

inline cplx theta(double a, double b, cplx v, cplx tau, const ModelParams& p) {
    return theta_series<double>(a, b, v, tau, p.theta_terms, p.prod_tol);
}

namespace detail {
template <class T>
std::complex<T> qpoch_rec(std::complex<T> z, std::span<const std::complex<T>> q, T cutoff) {
    if (q.empty()) return std::complex<T>(1) - z;
    std::complex<T> prod(1);
    std::complex<T> zi = z;
    for (int i = 0; i < 1000000; ++i) {
        if (std::abs(zi) < cutoff) break;
        prod *= qpoch_rec<T>(zi, q.subspan(1), cutoff);
        zi *= q[0];
    }
    return prod;
}
}  // namespace detail

// Multi-nome q-Pochhammer (z; q_1,...,q_m)_inf. Factors with |z q^i| < cutoff are dropped.
template <class T>
std::complex<T> qpoch(std::complex<T> z, std::span<const std::complex<T>> nomes, T cutoff) {
    for (auto q : nomes)
        if (!(std::abs(q) < 1)) throw DomainError("qpoch: every nome needs |q| < 1");
    if (nomes.empty()) return std::complex<T>(1) - z;
    return detail::qpoch_rec<T>(z, nomes, cutoff);
}

inline cplx qpoch(cplx z, std::initializer_list<cplx> nomes, double cutoff = 1e-16) {
    std::vector<cplx> q(nomes);
    return qpoch<double>(z, std::span<const cplx>(q), cutoff);
}

// Number of factors kept for a single nome at |z| = 1; echoed in reports for reproducibility.
inline int qpoch_factor_count(double q, double cutoff) {
    return q <= 0 ? 1 : int(std::ceil(std::log(cutoff) / std::log(q)));
}

// Theta_q(z) = (z;q)(q/z;q)(q;q)
inline cplx Theta(cplx z, double q, double cutoff) {
    return qpoch(z, {q}, cutoff) * qpoch(q / z, {q}, cutoff) * qpoch(cplx(q), {q}, cutoff);
}

// [v] at level L: x^{v^2/L - v} Theta_{x^{2L}}(x^{2v}).
inline cplx bracket(const ModelParams& p, const SpectralPoint& v, double L) {
    cplx vf = v.full_v(p.eps);
    return p.xpow(vf * vf / L - vf) * Theta(v.z(p.eps), p.xpow(2.0 * L), p.prod_tol);
}
inline cplx bracket(const ModelParams& p, cplx v, double L) { return bracket(p, SpectralPoint(v), L); }
inline cplx bracket(const ModelParams& p, cplx v, Level lv) { return bracket(p, v, level_value(p, lv)); }
inline cplx bracket(const ModelParams& p, const SpectralPoint& v, Level lv) {
    return bracket(p, v, level_value(p, lv));
}

// True when u sits on the zero lattice L*Z + (pi i/eps)*Z of the level-L bracket.
inline bool near_bracket_zero(cplx u, double L, double eps, double tol = 1e-10) {
    double k = std::round(u.real() / L);
    double m = std::round(u.imag() * eps / pi);
    cplx d = u - cplx(k * L, m * pi / eps);
    return std::abs(d) < tol * std::max(1.0, std::abs(u));
}
inline bool near_bracket_zero(const SpectralPoint& u, double L, double eps, double tol = 1e-10) {
    return near_bracket_zero(u.full_v(eps), L, eps, tol);
}

// Denominator bracket that refuses to sit on its own zero set.
inline cplx bracket_denominator(const ModelParams& p, const SpectralPoint& u, double L, const char* where) {
    if (near_bracket_zero(u, L, p.eps))
        throw PoleError(std::string(where) + ": bracket zero in denominator at " + fmt_cplx(u.full_v(p.eps)));
    return bracket(p, u, L);
}
inline cplx bracket_denominator(const ModelParams& p, cplx u, double L, const char* where) {
    return bracket_denominator(p, SpectralPoint(u), L, where);
}

enum class KernelKind { f, h, f_star, h_star };

// f(v,w) = [v+1/2-w]/[v-1/2], h(v) = [v-1]/[v+1], and their level r-1 partners.
inline cplx kernel(KernelKind which, cplx v, cplx w, const ModelParams& p) {
    const double L = p.r, Lp = p.r - 1.0;
    switch (which) {
        case KernelKind::f:
            return bracket(p, v + 0.5 - w, L) / bracket_denominator(p, v - 0.5, L, "f");
        case KernelKind::h:
            return bracket(p, v - 1.0, L) / bracket_denominator(p, v + 1.0, L, "h");
        case KernelKind::f_star:
            return bracket(p, v - 0.5 + w, Lp) / bracket_denominator(p, v + 0.5, Lp, "f*");
        case KernelKind::h_star:
            return bracket(p, v + 1.0, Lp) / bracket_denominator(p, v - 1.0, Lp, "h*");
    }
    throw DomainError("kernel: unknown selector");
}

// {z} at level L: (z; x^{2L}, x^{2n})
inline cplx curly(cplx z, double L, const ModelParams& p) {
    return qpoch(z, {cplx(p.xpow(2.0 * L)), cplx(p.xpow(2.0 * p.n))}, p.prod_tol);
}

inline cplx g_fun(int j, cplx z, const ModelParams& p) {
    const double n = p.n, r = p.r;
    auto c = [&](double e) { return curly(p.xpow(e) * z, r, p); };
    return c(2 * n + 2 * r - j - 1) * c(j + 1) / (c(2 * n - j + 1) * c(2 * r + j - 1));
}

inline cplx g_star_fun(int j, cplx z, const ModelParams& p) {
    const double n = p.n, r = p.r;
    auto c = [&](double e) { return curly(p.xpow(e) * z, r - 1.0, p); };
    return c(2 * n + 2 * r - j - 1) * c(j - 1) / (c(2 * n - j - 1) * c(2 * r + j - 1));
}

inline cplx rho_fun(int j, cplx z, const ModelParams& p) {
    const double n = p.n;
    cplx q1 = p.xpow(2.0), q2 = p.xpow(2.0 * n);
    auto c = [&](double e) { return qpoch(-p.xpow(e) * z, {q1, q2}, p.prod_tol); };
    return c(2 * j + 1) * c(2 * n - 2 * j + 1) / (c(1) * c(2 * n + 1));
}

enum class CommKind { r_j, r_star_j, chi_j };

inline double comm_exponent(CommKind which, int j, const ModelParams& p) {
    const double n = p.n, r = p.r;
    switch (which) {
        case CommKind::r_j: return (r - 1) / r * (n - j) / n;
        case CommKind::r_star_j: return r / (r - 1) * (n - j) / n;
        case CommKind::chi_j: return -double(j) * (n - j) / n;
    }
    return 0;
}

// z^gamma g(1/z)/g(z) with the selector's gamma and g.
inline cplx comm_factor(CommKind which, int j, const SpectralPoint& v, const ModelParams& p) {
    if (j < 1 || j > p.n) throw DomainError("comm_factor: j must lie in [1, n]");
    cplx z = v.z(p.eps);
    cplx pref = v.zpow(comm_exponent(which, j, p), p.eps);
    switch (which) {
        case CommKind::r_j: return pref * g_fun(j, 1.0 / z, p) / g_fun(j, z, p);
        case CommKind::r_star_j: return pref * g_star_fun(j, 1.0 / z, p) / g_star_fun(j, z, p);
        case CommKind::chi_j: return pref * rho_fun(j, 1.0 / z, p) / rho_fun(j, z, p);
    }
    throw DomainError("comm_factor: unknown selector");
}
inline cplx comm_factor(CommKind which, int j, cplx v, const ModelParams& p) {
    return comm_factor(which, j, SpectralPoint(v), p);
}

enum class SumIdentity { sum_f, sum_f_star };

// |sum_nu prod_{j != nu} kernel / [p_nu - p_j]| scaled by the largest term magnitude.
// v_list holds v_0..v_{n-1}; the closing point is v_n = v + n/2 and the identity needs v = v_0.
inline double identity_residual(SumIdentity which, cplx v, std::span<const cplx> v_list,
                                std::span<const cplx> p_list, const ModelParams& p) {
    const int n = p.n;
    if (int(v_list.size()) != n || int(p_list.size()) != n)
        throw DomainError("identity_residual: v_list and p_list need length n");
    if (std::abs(v_list[0] - v) > 1e-12 * std::max(1.0, std::abs(v)))
        throw DomainError("identity_residual: v must equal v_0");
    cplx psum = 0;
    for (auto q : p_list) psum += q;
    if (std::abs(psum) > 1e-12) throw DomainError("identity_residual: p_j must sum to zero");
    const double L = which == SumIdentity::sum_f ? p.r : p.r - 1.0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (near_bracket_zero(p_list[a] - p_list[b], L, p.eps))
                throw PoleError("identity_residual: p_" + std::to_string(a) + " and p_" + std::to_string(b) +
                                " coincide modulo the bracket zero lattice");
    std::vector<cplx> vv(v_list.begin(), v_list.end());
    vv.push_back(v + double(n) / 2.0);
    cplx sum = 0;
    double biggest = 0;
    for (int nu = 0; nu < n; ++nu) {
        cplx t = 1;
        for (int j = 0; j < n; ++j) {
            if (j == nu) continue;
            cplx den = bracket(p, p_list[nu] - p_list[j], L);
            if (which == SumIdentity::sum_f)
                t *= kernel(KernelKind::f, vv[j + 1] - vv[j], 1.0 - p_list[nu] + p_list[j], p) / den;
            else
                t *= kernel(KernelKind::f_star, vv[j] - vv[j + 1], 1.0 - p_list[j] + p_list[nu], p) / den;
        }
        sum += t;
        biggest = std::max(biggest, std::abs(t));
    }
    return scaled_residual(std::abs(sum), biggest);
}

}  // namespace elvlab
