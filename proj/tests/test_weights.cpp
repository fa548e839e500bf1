#include <gtest/gtest.h>

#include "elvlab/weights.hpp"

using namespace elvlab;

namespace {
ModelParams desk(int n) { return ModelParams::from_x(n, 5.5, 0.3); }
}  // namespace

TEST(Shift, UnshiftRestores) {
    for (int n : {2, 3, 4}) {
        auto g = draw_engine(1, "shift", std::uint64_t(n));
        WeightVec a = random_generic_weight(n, g);
        for (int mu = 0; mu < n; ++mu) {
            WeightVec b = shift(shift(a, mu), mu, -1);
            for (int nu = 0; nu < n; ++nu) EXPECT_NEAR(b[nu], a[nu], 1e-15);
        }
    }
}

TEST(Shift, EpsbarIsTraceless) {
    auto g = draw_engine(2, "shift", 0);
    WeightVec a = random_generic_weight(3, g);
    WeightVec b = shift(a, 1);
    double s = 0;
    for (int nu = 0; nu < 3; ++nu) s += b[nu] - a[nu];
    EXPECT_NEAR(s, 0.0, 1e-15);
}

TEST(Shift, RaisesA01ByOne) {
    WeightVec a = WeightVec::zero(3);
    EXPECT_NEAR(shift(a, 0).diff(0, 1) - a.diff(0, 1), 1.0, 1e-15);
}

TEST(Shift, RejectsIndex) {
    EXPECT_THROW(shift(WeightVec::zero(2), 2), DomainError);
    EXPECT_THROW(shift(WeightVec::zero(2), -1), DomainError);
}

TEST(PairDiffs, ZeroWeight) {
    for (int n : {2, 3, 5}) {
        auto d = pair_diffs(WeightVec::zero(n));
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) EXPECT_DOUBLE_EQ(d[mu][nu], double(nu - mu));
    }
}

TEST(PairDiffs, CocycleAndDiagonal) {
    auto g = draw_engine(3, "pd", 0);
    WeightVec a = random_generic_weight(4, g);
    auto d = pair_diffs(a);
    for (int mu = 0; mu < 4; ++mu) {
        EXPECT_EQ(d[mu][mu], 0.0);
        for (int nu = 0; nu < 4; ++nu)
            for (int la = 0; la < 4; ++la) EXPECT_NEAR(d[mu][nu] + d[nu][la], d[mu][la], 1e-14);
    }
}

TEST(Inner, EpsbarGram) {
    for (int n : {2, 3, 4})
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu)
                EXPECT_NEAR(inner(epsbar(mu, n), epsbar(nu, n)), (mu == nu ? 1.0 : 0.0) - 1.0 / n, 1e-15);
}

TEST(Omega, RepeatedShiftsFromZero) {
    const int n = 4;
    for (int j = 1; j < n; ++j) {
        std::vector<double> w(n, 0.0);
        for (int nu = 0; nu < j; ++nu) {
            auto e = epsbar(nu, n);
            for (int i = 0; i < n; ++i) w[i] += e[i];
        }
        auto o = omega(j, n);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(o[i], w[i], 1e-15);
        // alpha_j pairs with omega_k as delta_jk
        for (int k = 1; k < n; ++k) EXPECT_NEAR(inner(alpha(k, n), o), k == j ? 1.0 : 0.0, 1e-15);
    }
}

TEST(Path, PairDiffsMoveByOnePerStep) {
    auto g = draw_engine(4, "path", 0);
    const int n = 3;
    WeightVec a = random_generic_weight(n, g);
    AdmissiblePath path = AdmissiblePath::ground_state(a, 1, 7);
    auto ws = path.weights();
    ASSERT_EQ(ws.size(), 8u);
    for (size_t s = 0; s + 1 < ws.size(); ++s) {
        int mu = path.steps[s];
        EXPECT_EQ(step_index(ws[s + 1], ws[s]), mu);
        auto d0 = pair_diffs(ws[s]), d1 = pair_diffs(ws[s + 1]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double want = (i == mu && j != mu) ? -1.0 : ((j == mu && i != mu) ? 1.0 : 0.0);
                EXPECT_NEAR(d1[i][j] - d0[i][j], want, 1e-14);
            }
    }
}

TEST(Path, GroundStateCyclesThroughAllSteps) {
    AdmissiblePath p = AdmissiblePath::ground_state(WeightVec::zero(3), 0, 6);
    std::vector<int> want{0, 2, 1, 0, 2, 1};
    EXPECT_EQ(p.steps, want);
}

TEST(Sector, AntisymmetryAndPiRelation) {
    const double r = 5.5;
    WeightVec k = WeightVec::from_dynkin({1, 2, 2.5}, WeightVec::Tag::generic);
    WeightVec l = WeightVec::from_dynkin({2, 1, 2.5}, WeightVec::Tag::generic);
    auto s = SectorScalars::from_weights(k, l, r);
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) {
            EXPECT_EQ(s.K[mu][nu], -s.K[nu][mu]);
            EXPECT_EQ(s.L[mu][nu], -s.L[nu][mu]);
            EXPECT_EQ(s.pi[mu][nu], -s.pi[nu][mu]);
            EXPECT_EQ(s.pi[mu][nu], r * s.L[mu][nu] - (r - 1) * s.K[mu][nu]);
        }
}

TEST(Dynkin, RoundTripAndIntegrality) {
    WeightVec a = WeightVec::from_dynkin({1.5, 2, 2}, WeightVec::Tag::integral);
    auto k = a.dynkin(5.5);
    EXPECT_NEAR(k[1], 2, 1e-14);
    EXPECT_NEAR(k[2], 2, 1e-14);
    EXPECT_NEAR(k[0], 1.5, 1e-14);
    EXPECT_TRUE(a.is_integral());
    EXPECT_FALSE(WeightVec::from_dynkin({1, 0.4, 2}).is_integral());
}

TEST(Norms, SingleFactorForRankTwo) {
    ModelParams p = desk(2);
    auto g = draw_engine(5, "norm", 0);
    WeightVec a = random_generic_weight(2, g);
    EXPECT_EQ(norm_products(a, NormKind::G_a, p), bracket(p, a.diff(0, 1), p.r));
    EXPECT_EQ(norm_products(a, NormKind::b_l, p), norm_products(a, NormKind::G_prime, p));
}

TEST(Norms, ChiMatchesDirectProducts) {
    ModelParams p = desk(2);
    const double q4 = std::pow(0.3, 4), q2 = 0.09;
    cplx num = 1, den = 1;
    for (int i = 1; i < 200; ++i) {
        num *= 1.0 - std::pow(q4, i);
        den *= 1.0 - std::pow(q2, i);
    }
    cplx chi = norm_products(WeightVec::zero(2), NormKind::chi_i, p);
    EXPECT_LT(std::abs(chi - num / den), 1e-14);
}

TEST(Norms, DegenerateWeightRaises) {
    ModelParams p = desk(2);
    WeightVec a = WeightVec::zero(2);
    a.bar = {p.r / 2, -p.r / 2};  // a_01 = r sits on the bracket zero lattice
    EXPECT_THROW(norm_products(a, NormKind::G_a, p), DegenerateError);
}

TEST(RandomWeight, StaysGeneric) {
    auto g = draw_engine(6, "rw", 0);
    for (int i = 0; i < 50; ++i) {
        WeightVec a = random_generic_weight(3, g);
        double s = 0;
        for (double b : a.bar) s += b;
        EXPECT_NEAR(s, 0.0, 1e-14);
        for (int mu = 0; mu < 3; ++mu)
            for (int nu = mu + 1; nu < 3; ++nu) {
                double d = a.diff(mu, nu);
                EXPECT_GT(std::abs(d - std::round(d)), 0.05);
            }
    }
}
