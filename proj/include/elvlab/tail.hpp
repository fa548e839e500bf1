#pragma once

#include <vector>

#include "vertex_face.hpp"

namespace elvlab {

// Delta u = -(n-1)/2 + pi i/(2 eps), carried as one exact half-turn.
inline SpectralPoint delta_u(const ModelParams& p) { return {-(p.n - 1) / 2.0, 1}; }

inline ModelParams params_at(const ModelParams& p, Level lv) {
    return lv == Level::r ? p : p.at_level(p.r - 1);
}

// Local tail factor from its definition: sum over components of t*(-u)^{a1}_{a0} t(-u)^{a0p}_{a1p},
// with a1 = a0 - epsbar_mu and a1p = a0p - epsbar_nu.
inline cplx L_def(cplx u, const WeightVec& a0, const WeightVec& a1, const WeightVec& a0p, const WeightVec& a1p,
                  const ModelParams& p, Level lv = Level::r, Gauge gauge = Gauge::plain) {
    int mu = step_index(a1, a0), nu = step_index(a1p, a0p);
    if (mu < 0 || nu < 0) throw DomainError("L_def: pairs must be admissible");
    ModelParams q = params_at(p, lv);
    Eigen::MatrixXcd D = dual_intertwiner(-u, a0, q, gauge);
    Eigen::MatrixXcd M = intertwiner_matrix(-u, a0p, q, gauge);
    return (D.row(mu) * M.col(nu))(0, 0);
}

// Closed form: [u + abar_mu - abar'_nu]/[u] prod_{j != mu} [abar'_nu - abar_j]/[a_{mu j}].
inline cplx L_closed(cplx u, const WeightVec& a, const WeightVec& ap, int mu, int nu, const ModelParams& p,
                     Level lv = Level::r) {
    const int n = p.n;
    check_index(mu, n, "L_closed");
    check_index(nu, n, "L_closed");
    const double L = level_value(p, lv);
    // complex z/z is not always exactly 1, so identical arguments short-circuit; this keeps L(a, a) = 1 exact
    auto ratio = [&](cplx num, cplx den) { return num == den ? cplx(1) : bracket(p, num, L) / bracket(p, den, L); };
    const cplx den_u = bracket_denominator(p, u, L, "L_closed");
    cplx shifted = u + (a[mu] - ap[nu]);
    cplx val = shifted == u ? cplx(1) : bracket(p, shifted, L) / den_u;
    for (int j = 0; j < n; ++j) {
        if (j == mu) continue;
        double amj = a.diff(mu, j);
        if (near_bracket_zero(cplx(amj), L, p.eps))
            throw PoleError("L_closed: [a_{mu j}] = 0 for mu=" + std::to_string(mu) + ", j=" + std::to_string(j));
        val *= ratio(ap[nu] - a[j], amj);
    }
    return val;
}

// Product of local factors along two paths, site by site.
inline cplx tail_product(const AdmissiblePath& path, const AdmissiblePath& path_p, cplx u, int depth,
                         const ModelParams& p, Level lv = Level::r) {
    if (int(path.steps.size()) < depth || int(path_p.steps.size()) < depth)
        throw DomainError("tail_product: paths shorter than depth");
    auto w = path.weights(), wp = path_p.weights();
    cplx prod = 1;
    for (int j = 0; j < depth; ++j) {
        try {
            prod *= L_closed(u, w[j], wp[j], path.steps[j], path_p.steps[j], p, lv);
        } catch (const PoleError& e) {
            throw PoleError(std::string(e.what()) + " (site " + std::to_string(j) + ")");
        }
    }
    return prod;
}

enum class ExchangeKind { typeII_A_B, typeI_A };

// typeII_A_B returns A_0..A_{n-1} followed by B (level r-1 brackets, half-period shifts as exact z sign flips).
// typeI_A returns A_mu(a, a') for mu = 0..n-1 (level r brackets).
inline std::vector<cplx> exchange_coeffs(ExchangeKind which, cplx u, cplx v, const WeightVec& xi,
                                         const WeightVec& xip, const WeightVec& a, const WeightVec& ap,
                                         const ModelParams& p) {
    const int n = p.n;
    std::vector<cplx> out;
    if (which == ExchangeKind::typeI_A) {
        const double L = p.r;
        for (int mu = 0; mu < n; ++mu) {
            cplx s = 0;
            for (int nu = 0; nu < n; ++nu) {
                WeightVec b = shift(ap, nu, -1);
                cplx t = 1;
                for (int j = 0; j < n; ++j) t *= bracket(p, b[j] - a[mu], L);
                s += t;
            }
            out.push_back(s);
        }
        return out;
    }
    const double Lp = p.r - 1;
    auto B = [&](const SpectralPoint& s) { return bracket(p, s, Lp); };
    auto Bden = [&](const SpectralPoint& s, const char* w) { return bracket_denominator(p, s, Lp, w); };
    const double inv = 1.0 / n;
    SpectralPoint s1{u - v - (n - 1) / 2.0, 1};
    for (int mu = 0; mu < n; ++mu) {
        cplx A = 1;
        for (int j = 0; j < n; ++j)
            if (j != mu) A /= Bden(SpectralPoint(xip.diff(mu, j)), "A_mu");
        A *= B(s1 + (xip[mu] - xi[0] + inv)) / Bden(s1 + (xip[0] - xi[0] + inv), "A_mu");
        A *= B(SpectralPoint(xip[0] - xi[0] + inv)) / Bden(SpectralPoint(xip[mu] - xi[0] + inv), "A_mu");
        out.push_back(A);
    }
    SpectralPoint s3{u - v - (n - 3) / 2.0, 1};
    cplx Bc = B(s3) / Bden(s3 + (xip[0] - xi[0] + inv), "B");
    for (int j = 1; j < n; ++j)
        Bc *= B(SpectralPoint(xip.diff(j, 0))) /
              (Bden(SpectralPoint(xip[j] - xi[0] + inv), "B") * Bden(SpectralPoint(xi.diff(0, j) + 1.0), "B"));
    out.push_back(Bc);
    return out;
}

}  // namespace elvlab
