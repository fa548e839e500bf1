#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lattice.hpp"

namespace elvlab {

// t(v)^a_{a - epsbar_mu}: n components, a is the upper weight.
struct IntertwinerColumn {
    std::vector<cplx> vec;
    cplx v{};
    WeightVec a;
    int mu = 0;
};

// Component nu is (-1)^nu theta[n/2, 1/2 + nu/n](v/(nr) + abar_mu/r; pi i/(n eps r)).
// The phased gauge multiplies by prod_{j > mu} exp(pi i a_{mu j}).
inline IntertwinerColumn intertwiner(cplx v, const WeightVec& a, int mu, const ModelParams& p,
                                     Gauge gauge = Gauge::phased) {
    const int n = p.n;
    check_index(mu, n, "intertwiner");
    if (a.n() != n) throw DomainError("intertwiner: weight has wrong rank");
    cplx pref = 1;
    if (gauge == Gauge::phased)
        for (int j = mu + 1; j < n; ++j) pref *= std::exp(I * pi * a.diff(mu, j));
    const cplx tau = I * pi / (double(n) * p.eps * p.r);
    const cplx arg = v / (double(n) * p.r) + a[mu] / p.r;
    IntertwinerColumn t{std::vector<cplx>(n), v, a, mu};
    for (int nu = 0; nu < n; ++nu) {
        double sgn = (nu % 2 == 0) ? 1.0 : -1.0;
        t.vec[nu] = sgn * pref * theta(n / 2.0, 0.5 + double(nu) / n, arg, tau, p);
    }
    return t;
}

// M(nu, mu) = t^nu(v)^a_{a - epsbar_mu}
inline Eigen::MatrixXcd intertwiner_matrix(cplx v, const WeightVec& a, const ModelParams& p,
                                           Gauge gauge = Gauge::phased) {
    const int n = p.n;
    Eigen::MatrixXcd M(n, n);
    for (int mu = 0; mu < n; ++mu) {
        auto t = intertwiner(v, a, mu, p, gauge);
        for (int nu = 0; nu < n; ++nu) M(nu, mu) = t.vec[nu];
    }
    return M;
}

inline double condition_number(const Eigen::MatrixXcd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    auto s = svd.singularValues();
    return s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

// D(nu, mu) = t*_mu(v)^{a - epsbar_nu}_a, the solution of D M = 1.
inline Eigen::MatrixXcd dual_intertwiner(cplx v, const WeightVec& a, const ModelParams& p,
                                         Gauge gauge = Gauge::phased, double max_cond = 1e12) {
    Eigen::MatrixXcd M = intertwiner_matrix(v, a, p, gauge);
    double kappa = condition_number(M);
    if (!(kappa < max_cond))
        throw DegenerateError("dual_intertwiner: intertwiner matrix is singular (condition " + std::to_string(kappa) +
                              ") at v=" + fmt_cplx(v));
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
    return lu.solve(Eigen::MatrixXcd::Identity(p.n, p.n));
}

struct DualResiduals {
    double left = 0;   // sum_mu t*_mu t^mu = delta
    double right = 0;  // sum_nu t^mu t*_mu' = delta
};

inline DualResiduals dual_residuals(cplx v, const WeightVec& a, const ModelParams& p, Gauge gauge = Gauge::phased) {
    Eigen::MatrixXcd M = intertwiner_matrix(v, a, p, gauge);
    Eigen::MatrixXcd D = dual_intertwiner(v, a, p, gauge);
    Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(p.n, p.n);
    return {(D * M - Id).cwiseAbs().maxCoeff(), (M * D - Id).cwiseAbs().maxCoeff()};
}

// t*(v)^{up}_{low} as a row vector, where up = low - epsbar_mu.
inline Eigen::VectorXcd dual_row(cplx v, const WeightVec& up, const WeightVec& low, const ModelParams& p,
                                 Gauge gauge) {
    int mu = step_index(up, low);
    if (mu < 0) throw DomainError("dual_row: weights are not admissible");
    return dual_intertwiner(v, low, p, gauge).row(mu).transpose();
}

inline Eigen::VectorXcd column(cplx v, const WeightVec& upper, const WeightVec& lower, const ModelParams& p,
                               Gauge gauge) {
    int mu = step_index(lower, upper);
    if (mu < 0) throw DomainError("column: weights are not admissible");
    auto t = intertwiner(v, upper, mu, p, gauge);
    return Eigen::Map<Eigen::VectorXcd>(t.vec.data(), p.n);
}

enum class Correspondence { vf, dual_vf, s_vf };

inline const char* correspondence_name(Correspondence c) {
    switch (c) {
        case Correspondence::vf: return "vf";
        case Correspondence::dual_vf: return "dual_vf";
        case Correspondence::s_vf: return "s_vf";
    }
    return "?";
}

namespace detail {
// R (t1 (x) t2): out_{ik} = sum_{jl} R^{ik}_{jl} t1_j t2_l
inline Eigen::MatrixXcd act(const RMatrix& R, const Eigen::VectorXcd& t1, const Eigen::VectorXcd& t2) {
    const int n = R.n;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) out(i, k) += R(i, k, j, l) * t1(j) * t2(l);
    return out;
}

// (s1 (x) s2) R: out_{jl} = sum_{ik} s1_i s2_k R^{ik}_{jl}
inline Eigen::MatrixXcd act_left(const RMatrix& R, const Eigen::VectorXcd& s1, const Eigen::VectorXcd& s2) {
    const int n = R.n;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) out(j, l) += s1(i) * s2(k) * R(i, k, j, l);
    return out;
}
}  // namespace detail

// Max over free indices of |lhs - rhs| / max(1, |lhs|, |rhs|) for the selected correspondence,
// over every admissible configuration starting at a.
inline double correspondence_residual(Correspondence which, cplx v1, cplx v2, const WeightVec& a,
                                      const ModelParams& p, Gauge gauge = Gauge::phased) {
    double worst = 0;
    auto record = [&](const Eigen::MatrixXcd& lhs, const Eigen::MatrixXcd& rhs) {
        worst = std::max(worst, detail::scaled_max_diff(lhs, rhs));
    };
    if (which == Correspondence::vf) {
        RMatrix R = r_matrix(v1 - v2, p);
        for (auto& d : neighbors(a))
            for (auto& c : neighbors(d)) {
                Eigen::MatrixXcd lhs = detail::act(R, column(v1, d, a, p, gauge), column(v2, c, d, p, gauge));
                Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(p.n, p.n);
                for (auto& b : neighbors(a)) {
                    if (!admissible(b, c)) continue;
                    cplx w = face_weight(c, d, b, a, v1 - v2, p, gauge);
                    rhs += w * column(v1, c, b, p, gauge) * column(v2, b, a, p, gauge).transpose();
                }
                record(lhs, rhs);
            }
        return worst;
    }
    // Dual forms: t*(v1)^b_c (x) t*(v2)^a_b R(v1 - v2) = sum_d W[c d; b a] t*(v1)^a_d (x) t*(v2)^d_c
    ModelParams q = which == Correspondence::s_vf ? p.at_level(p.r - 1) : p;
    double sign = which == Correspondence::s_vf ? -1.0 : 1.0;
    q.validate();
    RMatrix R = r_matrix(v1 - v2, q).scaled(sign);
    for (auto& b : neighbors(a))
        for (auto& c : neighbors(b)) {
            Eigen::MatrixXcd lhs = detail::act_left(R, dual_row(v1, b, c, q, gauge), dual_row(v2, a, b, q, gauge));
            Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(p.n, p.n);
            for (auto& d : neighbors(a)) {
                if (!admissible(d, c)) continue;
                cplx w = sign * face_weight(c, d, b, a, v1 - v2, q, gauge);
                rhs += w * dual_row(v1, a, d, q, gauge) * dual_row(v2, d, c, q, gauge).transpose();
            }
            record(lhs, rhs);
        }
    return worst;
}

}  // namespace elvlab
