#include <gtest/gtest.h>

#include "elvlab/lattice.hpp"
#include "elvlab/suites.hpp"

using namespace elvlab;

namespace {
ModelParams desk(int n) { return ModelParams::from_x(n, 5.5, 0.3); }
cplx draw(std::mt19937_64& g) { return {uniform(g, -1, 1), uniform(g, -0.3, 0.3)}; }
}  // namespace

TEST(RMatrix, ChargeRuleZero) {
    RMatrix R = r_matrix(0.37, desk(3));
    EXPECT_EQ(R(0, 1, 2, 0), cplx(0));
}

TEST(RMatrix, ShiftSymmetryRankTwo) {
    RMatrix R = r_matrix(cplx(0.21, 0.05), desk(2));
    EXPECT_LT(std::abs(R(0, 0, 0, 0) - R(1, 1, 1, 1)), 1e-14);
}

TEST(RMatrix, ZeroPatternExactAndEightVertex) {
    for (int n : {2, 3}) {
        auto g = draw_engine(1, "zp", std::uint64_t(n));
        for (int i = 0; i < 5; ++i) {
            RMatrix R = r_matrix(draw(g), desk(n));
            auto z = zero_pattern(R);
            EXPECT_EQ(z.max_forbidden, 0.0);
            if (n == 2) {
                EXPECT_EQ(z.nonzero, 8);
            }
            EXPECT_LT(shift_symmetry_residual(R), 1e-12);
        }
    }
}

TEST(RMatrix, YbeAtReferencePoint) {
    ModelParams p = desk(2);
    EXPECT_LT(ybe_residual_vertex(0.4, 0.17, p), 1e-9);
}

TEST(RMatrix, YbeRandomDraws) {
    for (int n : {2, 3}) {
        auto g = draw_engine(2, "ybe", std::uint64_t(n));
        for (int i = 0; i < 20; ++i) {
            double v1 = uniform(g, 0, 1), v2 = uniform(g, 0, 1);
            EXPECT_LT(ybe_residual_vertex(v1, v2, desk(n)), 1e-9);
        }
    }
}

TEST(RMatrix, YbeCoincidentArguments) { EXPECT_LT(ybe_residual_vertex(0.3, 0.3, desk(3)), 1e-9); }

TEST(RMatrix, PoleAtUnitArgument) { EXPECT_THROW(r_matrix(1.0, desk(2)), PoleError); }

TEST(Twist, SIsNegatedLevelShift) {
    ModelParams p = desk(3);
    RMatrix S = s_matrix(0.3, p), R = r_matrix(0.3, p.at_level(p.r - 1));
    for (size_t i = 0; i < S.entries.size(); ++i) EXPECT_EQ(S.entries[i], -R.entries[i]);
}

TEST(Twist, SAndWPrimeSatisfyYbe) {
    for (int n : {2, 3}) {
        ModelParams p = desk(n);
        auto g = draw_engine(3, "twist", std::uint64_t(n));
        for (int i = 0; i < 5; ++i) {
            cplx v1 = draw(g), v2 = draw(g);
            EXPECT_LT(ybe_residual_vertex(v1, v2, p, [&](cplx v) { return s_matrix(v, p); }), 1e-9);
            WeightVec a = random_generic_weight(n, g);
            EXPECT_LT(ybe_residual_face(v1, v2, a, 1, twisted(0.0, p).W), 1e-9);
        }
    }
}

TEST(Face, IdentityAtZero) {
    for (int n : {2, 3}) {
        auto g = draw_engine(4, "w0", std::uint64_t(n));
        for (int i = 0; i < 5; ++i)
            EXPECT_LT(suites::face_identity_residual(random_generic_weight(n, g), desk(n)), 1e-10);
    }
}

TEST(Face, NonAdmissibleIsZero) {
    ModelParams p = desk(3);
    auto g = draw_engine(5, "na", 0);
    WeightVec a = random_generic_weight(3, g);
    WeightVec d = shift(a, 0), b = shift(a, 1), c = shift(shift(a, 0), 0);
    // c is two steps from a along epsbar_0, so it is not adjacent to b
    EXPECT_EQ(face_weight(c, d, b, a, 0.3, p), cplx(0));
    EXPECT_EQ(face_weight(a, a, a, a, 0.3, p), cplx(0));
}

TEST(Face, ThirdWeightVanishesAtShiftedArgument) {
    ModelParams p = desk(3);
    auto g = draw_engine(6, "bw3", 0);
    WeightVec a = random_generic_weight(3, g);
    const int mu = 0, nu = 2;
    WeightVec d = shift(a, mu), c = shift(d, nu);
    cplx w = face_weight(c, d, d, a, -a.diff(mu, nu), p);
    EXPECT_LT(std::abs(w), 1e-12);
}

TEST(Face, YbeRandomDraws) {
    for (int n : {2, 3}) {
        auto g = draw_engine(7, "fybe", std::uint64_t(n));
        for (int i = 0; i < 20; ++i) {
            WeightVec a = random_generic_weight(n, g);
            cplx v1 = draw(g), v2 = draw(g);
            EXPECT_LT(ybe_residual_face(v1, v2, a, 1, desk(n)), 1e-9);
        }
    }
}

TEST(Face, DegenerateWeightRaises) {
    ModelParams p = desk(2);
    WeightVec a = WeightVec::zero(2);
    a.bar = {p.r / 2, -p.r / 2};  // [a_01] = [r] = 0
    WeightVec d = shift(a, 0), c = shift(d, 1);
    EXPECT_THROW(face_weight(c, d, d, a, 0.3, p), DegenerateError);
}
