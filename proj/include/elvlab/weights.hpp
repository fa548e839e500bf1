#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "elliptic.hpp"
#include "rng.hpp"

namespace elvlab {

// Point of h* stored by bar coordinates abar_mu = <a + rho, eps_mu>.
struct WeightVec {
    enum class Tag { generic, integral };
    std::vector<double> bar;
    Tag tag = Tag::generic;

    int n() const { return int(bar.size()); }
    double operator[](int mu) const { return bar[mu]; }
    double diff(int mu, int nu) const { return bar[mu] - bar[nu]; }

    bool operator==(const WeightVec& o) const { return bar == o.bar; }

    // a = 0, so abar = <rho, eps_mu>
    static WeightVec zero(int n) {
        WeightVec a;
        a.bar.resize(n);
        for (int mu = 0; mu < n; ++mu) a.bar[mu] = (n - 1 - mu) - (n - 1) / 2.0;
        a.tag = Tag::integral;
        return a;
    }

    // a + rho = sum_nu k^nu omega_nu
    static WeightVec from_dynkin(const std::vector<double>& k, Tag tag = Tag::generic) {
        const int n = int(k.size());
        WeightVec a;
        a.bar.assign(n, 0.0);
        a.tag = tag;
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) a.bar[mu] += k[nu] * ((mu < nu ? 1.0 : 0.0) - double(nu) / n);
        return a;
    }

    // Dynkin labels k^nu (nu >= 1) recovered from bar coordinates; k^0 fixed by the level.
    std::vector<double> dynkin(double level) const {
        const int nn = n();
        std::vector<double> k(nn, 0.0);
        double s = 0;
        for (int nu = 1; nu < nn; ++nu) {
            k[nu] = bar[nu - 1] - bar[nu];
            s += k[nu];
        }
        k[0] = level - s;
        return k;
    }

    bool is_integral(double tol = 1e-12) const {
        for (int nu = 1; nu < n(); ++nu) {
            double d = bar[nu - 1] - bar[nu];
            if (std::abs(d - std::round(d)) > tol) return false;
        }
        return true;
    }
};

inline void check_index(int mu, int n, const char* where) {
    if (mu < 0 || mu >= n) throw DomainError(std::string(where) + ": index out of range");
}

// epsbar_mu = e_mu - (1/n) sum e
inline std::vector<double> epsbar(int mu, int n) {
    check_index(mu, n, "epsbar");
    std::vector<double> e(n, -1.0 / n);
    e[mu] += 1.0;
    return e;
}

inline std::vector<double> omega(int j, int n) {
    std::vector<double> w(n, 0.0);
    for (int l = 0; l < j; ++l)
        for (int mu = 0; mu < n; ++mu) w[mu] += (mu == l ? 1.0 : 0.0) - 1.0 / n;
    return w;
}

inline std::vector<double> alpha(int j, int n) {
    auto a = epsbar(j - 1, n), b = epsbar(j, n);
    for (int mu = 0; mu < n; ++mu) a[mu] -= b[mu];
    return a;
}

// Invariant form on traceless coordinates.
inline double inner(const std::vector<double>& u, const std::vector<double>& w) {
    double s = 0;
    for (size_t i = 0; i < u.size(); ++i) s += u[i] * w[i];
    return s;
}

// a + sign * epsbar_mu
inline WeightVec shift(const WeightVec& a, int mu, int sign = +1) {
    check_index(mu, a.n(), "shift");
    WeightVec b = a;
    const double inv = 1.0 / a.n();
    for (int nu = 0; nu < a.n(); ++nu) b.bar[nu] += sign * ((nu == mu ? 1.0 : 0.0) - inv);
    return b;
}

inline std::vector<std::vector<double>> pair_diffs(const WeightVec& a) {
    const int n = a.n();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) d[mu][nu] = a.bar[mu] - a.bar[nu];
    return d;
}

// Index mu with b = a + epsbar_mu, or -1 when the pair is not admissible.
inline int step_index(const WeightVec& a, const WeightVec& b, double tol = 1e-9) {
    const int n = a.n();
    if (b.n() != n) return -1;
    for (int mu = 0; mu < n; ++mu) {
        bool ok = true;
        for (int nu = 0; nu < n && ok; ++nu) {
            double want = (nu == mu ? 1.0 : 0.0) - 1.0 / n;
            ok = std::abs(b.bar[nu] - a.bar[nu] - want) < tol;
        }
        if (ok) return mu;
    }
    return -1;
}

inline bool admissible(const WeightVec& a, const WeightVec& b) { return step_index(a, b) >= 0; }

inline std::vector<WeightVec> neighbors(const WeightVec& a) {
    std::vector<WeightVec> out;
    for (int mu = 0; mu < a.n(); ++mu) out.push_back(shift(a, mu));
    return out;
}

// Weights reachable in two admissible steps, without repeats.
inline std::vector<WeightVec> two_step(const WeightVec& a) {
    std::vector<WeightVec> out;
    for (int mu = 0; mu < a.n(); ++mu)
        for (int nu = mu; nu < a.n(); ++nu) out.push_back(shift(shift(a, mu), nu));
    return out;
}

// Path whose j-th step subtracts epsbar_{steps[j]}.
struct AdmissiblePath {
    WeightVec start;
    std::vector<int> steps;

    std::vector<WeightVec> weights() const {
        std::vector<WeightVec> w{start};
        for (int mu : steps) {
            check_index(mu, start.n(), "AdmissiblePath");
            w.push_back(shift(w.back(), mu, -1));
        }
        return w;
    }

    // Ground-state tail: steps mu_j = i + 1 - j (mod n) for j = 1..length.
    static AdmissiblePath ground_state(const WeightVec& start, int i, int length, int first_j = 1) {
        const int n = start.n();
        AdmissiblePath p{start, {}};
        for (int j = first_j; j < first_j + length; ++j) p.steps.push_back((((i + 1 - j) % n) + n) % n);
        return p;
    }
};

struct SectorScalars {
    std::vector<std::vector<double>> K, L, pi;

    // k = a + rho and l = xi + rho in bar coordinates.
    static SectorScalars from_weights(const WeightVec& k, const WeightVec& l, double r) {
        SectorScalars s;
        s.K = pair_diffs(k);
        s.L = pair_diffs(l);
        const int n = k.n();
        s.pi.assign(n, std::vector<double>(n, 0.0));
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) s.pi[mu][nu] = r * s.L[mu][nu] - (r - 1) * s.K[mu][nu];
        return s;
    }
};

enum class NormKind { G_a, G_prime, b_l, chi_i };

inline cplx norm_products(const WeightVec& a, NormKind which, const ModelParams& p) {
    const int n = a.n();
    auto G = [&](double L, const char* name) {
        cplx g = 1;
        for (int mu = 0; mu < n; ++mu)
            for (int nu = mu + 1; nu < n; ++nu) {
                double d = a.diff(mu, nu);
                if (near_bracket_zero(cplx(d), L, p.eps))
                    throw DegenerateError(std::string(name) + ": bracket zero at a_" + std::to_string(mu) +
                                          std::to_string(nu));
                g *= bracket(p, d, L);
            }
        return g;
    };
    switch (which) {
        case NormKind::G_a: return G(p.r, "G_a");
        case NormKind::G_prime: return G(p.r - 1, "G'");
        case NormKind::b_l: {
            double q = p.xpow(2 * p.r), qp = p.xpow(2 * p.r - 2);
            cplx ratio = qpoch(cplx(q), {q}, p.prod_tol) / qpoch(cplx(qp), {qp}, p.prod_tol);
            return std::pow(ratio, double((n - 1) * (n - 2) / 2)) * G(p.r - 1, "b_l");
        }
        case NormKind::chi_i: {
            double q = p.xpow(2.0 * n), q2 = p.xpow(2.0);
            return qpoch(cplx(q), {q}, p.prod_tol) / qpoch(cplx(q2), {q2}, p.prod_tol);
        }
    }
    throw DomainError("norm_products: unknown selector");
}

// Generic weight: rho plus offsets in [0.1, 0.9], recentred, with every a_{mu nu}
// kept at least `margin` away from the integers.
inline WeightVec random_generic_weight(int n, std::mt19937_64& g, double margin = 0.05) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        WeightVec a = WeightVec::zero(n);
        a.tag = WeightVec::Tag::generic;
        double mean = 0;
        for (auto& b : a.bar) {
            b += uniform(g, 0.1, 0.9);
            mean += b;
        }
        mean /= n;
        for (auto& b : a.bar) b -= mean;
        bool ok = true;
        for (int mu = 0; mu < n && ok; ++mu)
            for (int nu = mu + 1; nu < n && ok; ++nu) {
                double d = a.diff(mu, nu);
                ok = std::abs(d - std::round(d)) > margin;
            }
        if (ok) return a;
    }
    throw DegenerateError("random_generic_weight: no admissible draw");
}

}  // namespace elvlab
