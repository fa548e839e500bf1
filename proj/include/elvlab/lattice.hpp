#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "elliptic.hpp"
#include "weights.hpp"

namespace elvlab {

// Sign convention for the face weight of the mu != nu, c = a + epsbar_mu + epsbar_nu configuration.
// phased: weights as written in closed form, to be paired with the prefactor on the intertwiners.
// plain: that weight negated, paired with prefactor-free intertwiners.
enum class Gauge { phased, plain };

inline const char* gauge_name(Gauge g) { return g == Gauge::phased ? "phased" : "plain"; }

// R(v)^{ik}_{jl} stored densely; index (i,k,j,l) with (i,k) the output pair.
struct RMatrix {
    int n = 0;
    cplx v{};
    std::vector<cplx> entries;

    cplx& operator()(int i, int k, int j, int l) { return entries[((i * n + k) * n + j) * n + l]; }
    cplx operator()(int i, int k, int j, int l) const { return entries[((i * n + k) * n + j) * n + l]; }

    // Operator on V (x) V with rows (i,k) and columns (j,l).
    Eigen::MatrixXcd as_operator() const {
        Eigen::MatrixXcd M(n * n, n * n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l) M(i * n + k, j * n + l) = (*this)(i, k, j, l);
        return M;
    }

    RMatrix scaled(cplx s) const {
        RMatrix o = *this;
        for (auto& e : o.entries) e *= s;
        return o;
    }
};

namespace detail {
inline int mod(int a, int n) { return ((a % n) + n) % n; }

// theta[1/2, 1/2 + d/n](w; pi i/(n eps r)) with d reduced mod n; each unit shift of b flips the sign.
inline cplx theta_half(int d, cplx w, const ModelParams& p) {
    const int n = p.n;
    int m = mod(d, n);
    int wraps = (d - m) / n;
    cplx tau = I * pi / (double(n) * p.eps * p.r);
    cplx t = theta(0.5, 0.5 + double(m) / n, w, tau, p);
    return (wraps % 2 == 0) ? t : -t;
}
}  // namespace detail

inline cplx r1(cplx v, const ModelParams& p) { return comm_factor(CommKind::r_j, 1, v, p); }

// Z/nZ-symmetric R-matrix. The h_bel(v) product contains theta[1/2,1/2+m/n](v/(nr)) for every m,
// and the entry's denominator divides one of them out; the quotient is formed analytically so R(0) is finite.
inline RMatrix r_matrix(cplx v, const ModelParams& p) {
    p.validate();
    const int n = p.n;
    const double nr = n * p.r;
    if (near_bracket_zero(1.0 - v, p.r, p.eps)) throw PoleError("r_matrix: [1-v] = 0 at v=" + fmt_cplx(v));
    cplx pre = bracket(p, 1.0, p.r) / bracket(p, 1.0 - v, p.r) * r1(v, p);
    std::vector<cplx> th_v(n), th0(n), th_1(n), th_1mv(n);
    for (int m = 0; m < n; ++m) {
        th_v[m] = detail::theta_half(m, v / nr, p);
        th0[m] = detail::theta_half(m, 0.0, p);
        th_1[m] = detail::theta_half(m, 1.0 / nr, p);
        th_1mv[m] = detail::theta_half(m, (1.0 - v) / nr, p);
    }
    cplx norm = 1;
    for (int m = 1; m < n; ++m) norm *= th0[m];
    RMatrix R{n, v, std::vector<cplx>(size_t(n) * n * n * n, 0.0)};
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                int l = detail::mod(i + k - j, n);
                int dk = j - k, m = detail::mod(dk, n);
                cplx hb = 1;
                for (int q = 0; q < n; ++q)
                    if (q != m) hb *= th_v[q];
                if (((dk - m) / n) % 2 != 0) hb = -hb;
                int di = j - i;
                cplx den_i = th_1[detail::mod(di, n)] * ((((di - detail::mod(di, n)) / n) % 2 == 0) ? 1.0 : -1.0);
                int ki = k - i;
                cplx num = th_1mv[detail::mod(ki, n)] * ((((ki - detail::mod(ki, n)) / n) % 2 == 0) ? 1.0 : -1.0);
                R(i, k, j, l) = pre * hb / norm * num / den_i;
            }
    return R;
}

namespace detail {
// Embed a two-site operator into V^{(x)3} acting on slots (s1, s2).
inline Eigen::MatrixXcd embed(const RMatrix& R, int s1, int s2) {
    const int n = R.n, N = n * n * n;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
    int spect = 3 - s1 - s2;
    int out[3], in[3];
    for (int o = 0; o < N; ++o) {
        out[0] = o / (n * n), out[1] = (o / n) % n, out[2] = o % n;
        for (int c = 0; c < N; ++c) {
            in[0] = c / (n * n), in[1] = (c / n) % n, in[2] = c % n;
            if (out[spect] != in[spect]) continue;
            A(o, c) = R(out[s1], out[s2], in[s1], in[s2]);
        }
    }
    return A;
}

inline double scaled_max_diff(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    double mag = std::max(A.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff());
    return scaled_residual((A - B).cwiseAbs().maxCoeff(), mag);
}
}  // namespace detail

// R12(v1-v2) R13(v1) R23(v2) against R23 R13 R12, with v3 fixed to 0. Residual scaled by max(1, |entries|).
inline double ybe_residual_vertex(cplx v1, cplx v2, const ModelParams& p,
                                  const std::function<RMatrix(cplx)>& build = {}) {
    auto R = [&](cplx v) { return build ? build(v) : r_matrix(v, p); };
    RMatrix r12 = R(v1 - v2), r13 = R(v1), r23 = R(v2);
    Eigen::MatrixXcd A12 = detail::embed(r12, 0, 1), A13 = detail::embed(r13, 0, 2), A23 = detail::embed(r23, 1, 2);
    Eigen::MatrixXcd lhs = A12 * A13 * A23, rhs = A23 * A13 * A12;
    return detail::scaled_max_diff(lhs, rhs);
}

// W[c d; b a | v]: a south-east, b south-west, c north-west, d north-east.
inline cplx face_weight(const WeightVec& c, const WeightVec& d, const WeightVec& b, const WeightVec& a, cplx v,
                        const ModelParams& p, Gauge gauge = Gauge::phased) {
    int mu = step_index(a, d), nu = step_index(a, b), m1 = step_index(d, c), m2 = step_index(b, c);
    if (mu < 0 || nu < 0 || m1 < 0 || m2 < 0) return 0.0;
    const double L = p.r;
    auto den = [&](double amn) {
        if (near_bracket_zero(cplx(amn), L, p.eps))
            throw DegenerateError("face_weight: [a_{mu nu}] = 0 (a_{mu nu} = " + std::to_string(amn) + ")");
        return bracket(p, amn, L);
    };
    cplx r = r1(v, p);
    if (mu == nu && m1 == mu) return r;  // c = a + 2 epsbar_mu
    if (near_bracket_zero(1.0 - v, L, p.eps)) throw PoleError("face_weight: [1-v] = 0 at v=" + fmt_cplx(v));
    if (mu == nu) {
        double amn = a.diff(mu, m1);
        return r * bracket(p, 1.0, L) * bracket(p, v + amn, L) / (bracket(p, 1.0 - v, L) * den(amn));
    }
    if (m1 != nu) return 0.0;  // c must be a + epsbar_mu + epsbar_nu
    double amn = a.diff(mu, nu);
    cplx w = r * bracket(p, v, L) * bracket(p, amn + 1.0, L) / (bracket(p, 1.0 - v, L) * den(amn));
    return gauge == Gauge::phased ? w : -w;
}

using FaceWeightFn =
    std::function<cplx(const WeightVec&, const WeightVec&, const WeightVec&, const WeightVec&, cplx)>;

inline FaceWeightFn face_evaluator(const ModelParams& p, Gauge gauge = Gauge::phased, double sign = 1.0) {
    return [p, gauge, sign](const WeightVec& c, const WeightVec& d, const WeightVec& b, const WeightVec& a, cplx v) {
        return sign * face_weight(c, d, b, a, v, p, gauge);
    };
}

namespace detail {
inline bool same_weight(const WeightVec& a, const WeightVec& b) {
    for (size_t i = 0; i < a.bar.size(); ++i)
        if (std::abs(a.bar[i] - b.bar[i]) > 1e-9) return false;
    return true;
}
}  // namespace detail

// Star-triangle residual over every admissible hexagon whose base lies within height-1 steps of a.
inline double ybe_residual_face(cplx v1, cplx v2, const WeightVec& a, int height, const FaceWeightFn& W) {
    std::vector<WeightVec> bases{a};
    for (int h = 1; h < height; ++h) {
        std::vector<WeightVec> next = bases;
        for (auto& b : bases)
            for (auto& nb : neighbors(b)) {
                bool seen = false;
                for (auto& o : next) seen = seen || detail::same_weight(o, nb);
                if (!seen) next.push_back(nb);
            }
        bases = next;
    }
    double worst = 0;
    for (auto& base : bases) {
        auto inner1 = neighbors(base);
        auto inner2 = two_step(base);
        for (auto& b : neighbors(base))
            for (auto& c : neighbors(b))
                for (auto& d : neighbors(c))
                    for (auto& f : neighbors(base))
                        for (auto& e : neighbors(f)) {
                            if (!admissible(e, d)) continue;
                            cplx lhs = 0, rhs = 0;
                            double mag = 0;
                            for (auto& g : inner1) {
                                cplx t = W(d, e, c, g, v1) * W(c, g, b, base, v2) * W(e, f, g, base, v1 - v2);
                                lhs += t;
                                mag = std::max(mag, std::abs(t));
                            }
                            for (auto& g : inner2) {
                                cplx t = W(g, f, b, base, v1) * W(d, e, g, f, v2) * W(d, g, c, b, v1 - v2);
                                rhs += t;
                                mag = std::max(mag, std::abs(t));
                            }
                            worst = std::max(worst, scaled_residual(std::abs(lhs - rhs), mag));
                        }
    }
    return worst;
}

inline double ybe_residual_face(cplx v1, cplx v2, const WeightVec& a, int height, const ModelParams& p,
                                Gauge gauge = Gauge::phased) {
    return ybe_residual_face(v1, v2, a, height, face_evaluator(p, gauge));
}

// r -> r-1 twist: S = -R|_{r-1} and W' = -W|_{r-1}.
struct Twisted {
    RMatrix S;
    FaceWeightFn W;
};

inline RMatrix s_matrix(cplx v, const ModelParams& p) { return r_matrix(v, p.at_level(p.r - 1)).scaled(-1.0); }

inline Twisted twisted(cplx v, const ModelParams& p, Gauge gauge = Gauge::phased) {
    ModelParams q = p.at_level(p.r - 1);
    q.validate();
    return {r_matrix(v, q).scaled(-1.0), face_evaluator(q, gauge, -1.0)};
}

// Count of structurally nonzero entries (charge conservation), and the worst entry that breaks it.
struct ZeroPattern {
    int nonzero = 0;
    double max_forbidden = 0;
};

inline ZeroPattern zero_pattern(const RMatrix& R) {
    ZeroPattern z;
    const int n = R.n;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) {
                    cplx e = R(i, k, j, l);
                    if ((i + k - j - l) % n == 0) {
                        if (e != 0.0) ++z.nonzero;
                    } else {
                        z.max_forbidden = std::max(z.max_forbidden, std::abs(e));
                    }
                }
    return z;
}

// max |R(i+p,k+p,j+p,l+p) - R(i,k,j,l)| relative to the largest entry.
inline double shift_symmetry_residual(const RMatrix& R) {
    const int n = R.n;
    double worst = 0, mag = 0;
    for (auto e : R.entries) mag = std::max(mag, std::abs(e));
    for (int s = 1; s < n; ++s)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l) {
                        cplx a = R(i, k, j, l), b = R((i + s) % n, (k + s) % n, (j + s) % n, (l + s) % n);
                        worst = std::max(worst, std::abs(a - b));
                    }
    return mag > 0 ? worst / mag : worst;
}

}  // namespace elvlab
