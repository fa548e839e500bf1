#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace elvlab {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Error taxonomy shared by every module.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : Error {
    using Error::Error;
};
struct PoleError : Error {
    using Error::Error;
};
struct DegenerateError : Error {
    using Error::Error;
};

// Global parameter pack. x = exp(-eps); theta_terms == 0 selects the series cutoff automatically.
struct ModelParams {
    int n = 2;
    double r = 5.5;
    double eps = -std::log(0.3);
    int theta_terms = 0;
    double prod_tol = 1e-16;

    static ModelParams from_x(int n, double r, double x) {
        ModelParams p;
        p.n = n;
        p.r = r;
        p.eps = -std::log(x);
        return p;
    }

    double x() const { return std::exp(-eps); }

    // x^e for any complex exponent, keyed to eps so no branch choice is ever made.
    cplx xpow(cplx e) const { return std::exp(-eps * e); }
    double xpow(double e) const { return std::exp(-eps * e); }

    void validate() const {
        if (n < 2) throw DomainError("n must be >= 2");
        if (!(r > n - 1)) throw DomainError("r must exceed n-1");
        if (!(eps > 0) || !std::isfinite(eps)) throw DomainError("x must lie in (0,1)");
        if (!(prod_tol > 0 && prod_tol < 1)) throw DomainError("prod_tol must lie in (0,1)");
        if (theta_terms < 0) throw DomainError("theta_terms must be >= 0");
    }

    // Same pack at another elliptic level (used for the r -> r-1 twist).
    ModelParams at_level(double L) const {
        ModelParams q = *this;
        q.r = L;
        return q;
    }
};

// Which elliptic level a bracket is taken at.
enum class Level { r, r_minus_1 };

inline double level_value(const ModelParams& p, Level lv) {
    return lv == Level::r ? p.r : p.r - 1.0;
}

// A spectral point v plus an integer count of pi*i/(2 eps) shifts.
// z = x^{2v} then picks up an exact factor (-1)^half_turns instead of a rounded phase.
struct SpectralPoint {
    cplx v{0.0, 0.0};
    int half_turns = 0;

    SpectralPoint() = default;
    SpectralPoint(cplx v_) : v(v_) {}
    SpectralPoint(cplx v_, int h) : v(v_), half_turns(h) {}

    cplx full_v(double eps) const { return v + double(half_turns) * I * pi / (2.0 * eps); }

    cplx z(double eps) const {
        cplx base = std::exp(-2.0 * eps * v);
        return (half_turns % 2 == 0) ? base : -base;
    }

    // z^gamma := exp(-2 eps gamma v_full), with the half-turn phase applied exactly.
    cplx zpow(cplx gamma, double eps) const {
        return std::exp(-2.0 * eps * gamma * v) * std::exp(-I * pi * gamma * double(half_turns));
    }

    SpectralPoint operator+(cplx d) const { return {v + d, half_turns}; }
    SpectralPoint operator-(cplx d) const { return {v - d, half_turns}; }
    SpectralPoint operator-(const SpectralPoint& o) const { return {v - o.v, half_turns - o.half_turns}; }
    SpectralPoint operator+(const SpectralPoint& o) const { return {v + o.v, half_turns + o.half_turns}; }
    SpectralPoint operator-() const { return {-v, -half_turns}; }
};

inline SpectralPoint half_period_shift(cplx v, int turns = 1) { return {v, turns}; }

// Residual of an identity whose two sides may be large: |diff| / max(1, |lhs|, |rhs|).
// Below magnitude 1 this is the plain absolute difference.
inline double scaled_residual(double abs_diff, double magnitude) {
    return abs_diff / std::max(1.0, magnitude);
}

inline std::string fmt_cplx(cplx c) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%.6g%+.6gi)", c.real(), c.imag());
    return buf;
}

}  // namespace elvlab
