#include <gtest/gtest.h>

#include "elvlab/fock.hpp"
#include "elvlab/suites.hpp"

using namespace elvlab;

namespace {
ModelParams desk(int n) { return ModelParams::from_x(n, 5.5, 0.3); }
cplx draw(std::mt19937_64& g) { return {uniform(g, -0.5, 0.5), uniform(g, -0.3, 0.3)}; }
}  // namespace

TEST(Gram, DiagonalFormulaAndPositivity) {
    for (int n : {2, 3, 4}) {
        ModelParams p = desk(n);
        for (int m = 1; m <= 10; ++m) {
            double want = m * qint((n - 1.0) * m, p) * qint((p.r - 1) * m, p) / (qint(double(n) * m, p) * qint(p.r * m, p));
            for (int j = 1; j <= n; ++j) {
                EXPECT_NEAR(boson_gram(j, j, m, p) / want, 1.0, 1e-13);
                EXPECT_GT(boson_gram(j, j, m, p), 0.0);
            }
        }
    }
}

TEST(Gram, ConstraintAndSwap) {
    for (int n : {2, 3}) {
        ModelParams p = desk(n);
        EXPECT_LT(suites::gram_constraint_residual(p, 20), 1e-13);
        for (int m = 1; m <= 6; ++m)
            for (int j = 2; j <= n; ++j) {
                double a = boson_gram(j, 1, m, p) * p.xpow(-double(n) * m);
                double b = boson_gram(1, j, m, p) * p.xpow(double(n) * m);
                EXPECT_NEAR(a / b, 1.0, 1e-13);
            }
    }
}

TEST(Gram, RejectsBadIndices) {
    EXPECT_THROW(boson_gram(0, 1, 1, desk(2)), DomainError);
    EXPECT_THROW(boson_gram(1, 1, 0, desk(2)), DomainError);
}

TEST(Ops, ColourStructure) {
    ModelParams p = desk(3);
    auto ua = build_basic_op(OpKind::U_alpha, 1, {}, 4, p);
    auto uw = build_basic_op(OpKind::U_omega, 2, {}, 4, p);
    for (int m = 0; m < 4; ++m) {
        EXPECT_NE(ua.ann[0][m], 0);
        EXPECT_NE(ua.ann[1][m], 0);
        EXPECT_EQ(ua.ann[2][m], 0);
        EXPECT_NE(uw.ann[1][m], 0);
        EXPECT_EQ(uw.ann[2][m], 0);
    }
    EXPECT_THROW(build_basic_op(OpKind::U_alpha, 3, {}, 4, p), DomainError);
    EXPECT_THROW(build_basic_op(OpKind::U_alpha, 1, {}, 0, p), DomainError);
}

TEST(Ops, VIsDressedU) {
    ModelParams p = desk(3);
    auto u = build_basic_op(OpKind::U_alpha, 2, {}, 6, p);
    auto v = build_basic_op(OpKind::V_alpha, 2, {}, 6, p);
    const auto& T = wide_tables(p, 6);
    for (int k = 0; k < 3; ++k)
        for (int m = 1; m <= 6; ++m) {
            wide want = -u.ann[k][m - 1] * T.atr[m];
            EXPECT_LE(static_cast<double>(abs(v.ann[k][m - 1] - want)), 1e-30);
        }
    auto w = build_basic_op(OpKind::W_alpha, 1, {}, 2, p);
    EXPECT_EQ(w.momentum_offset, pi * p.r);
    EXPECT_EQ(u.momentum_offset, 0.0);
}

TEST(Contract, IdentityIsTrivial) {
    ModelParams p = desk(3);
    auto id = FreeFieldOperator::identity(3, 8);
    auto u = build_basic_op(OpKind::U_omega, 1, {}, 8, p);
    auto s = contract_pair(id, u, 8, p);
    EXPECT_EQ(s.gamma, cplx(0));
    for (auto c : s.log_coeffs) EXPECT_EQ(c, cplx(0));
    EXPECT_THROW(contract_pair(id, build_basic_op(OpKind::U_omega, 1, {}, 4, p), 8, p), DomainError);
}

TEST(Contract, UomegaGamma) {
    for (int n : {2, 3, 4}) {
        ModelParams p = desk(n);
        for (int j = 1; j < n; ++j) {
            auto a = build_basic_op(OpKind::U_omega, 1, {}, 4, p), b = build_basic_op(OpKind::U_omega, j, {}, 4, p);
            EXPECT_NEAR(contract_pair(a, b, 4, p).gamma.real(), (p.r - 1) * (n - j) / (p.r * n), 1e-14);
        }
    }
}

TEST(Contract, SeriesAgainstClosedForms) {
    ModelParams p = desk(3);
    const int M = 12;
    auto check = [&](OpKind k1, int j1, OpKind k2, int j2, cplx gamma) {
        auto a = build_basic_op(k1, j1, {}, M, p), b = build_basic_op(k2, j2, {}, M, p);
        auto lhs = contract_pair(a, b, M, p);
        auto cf = pair_closed_form(a, b, p);
        ASSERT_TRUE(cf.has_value());
        EXPECT_NEAR(std::abs(lhs.gamma - gamma), 0.0, 1e-14);
        EXPECT_LT(series_mismatch(lhs, cf->series(M, p)), 1e-10) << cf->id;
    };
    check(OpKind::U_alpha, 1, OpKind::U_alpha, 1, 2 * (p.r - 1) / p.r);
    check(OpKind::V_omega, 1, OpKind::U_alpha, 1, 1.0);
    check(OpKind::U_omega, 2, OpKind::U_alpha, 2, -(p.r - 1) / p.r);
    // (1 + w) has log coefficients -(-1)^m/m
    auto c = closed_form_ope(PairId::VwUa, 1, p).series(4, p).log_coeffs;
    EXPECT_NEAR(c[0].real(), 1.0, 1e-15);
    EXPECT_NEAR(c[1].real(), -0.5, 1e-15);
}

TEST(OpeTable, PassesForBothRanks) {
    for (int n : {2, 3}) {
        auto rows = verify_ope_table(12, desk(n));
        EXPECT_GE(rows.size(), n == 2 ? 20u : 40u);
        for (auto& r : rows) EXPECT_LT(r.residual, 1e-10) << r.id;
    }
}

TEST(OpeTable, PerturbedGramIsCaught) {
    GramPerturbation pert{1, 1, 3, 1e-3};
    double worst = 0;
    for (auto& r : verify_ope_table(12, desk(2), &pert)) worst = std::max(worst, r.residual);
    EXPECT_GT(worst, 1e-6);
}

TEST(OpeTable, OrthogonalPairsContractTrivially) {
    EXPECT_LT(suites::trivial_pair_residual(desk(4), 12), 1e-10);
}

TEST(Commutation, AllLaws) {
    ModelParams p = desk(3);
    auto g = draw_engine(1, "comm", 0);
    for (int c = 0; c <= int(CommLaw::commute_VaUa_pm); ++c)
        for (int i = 0; i < 20; ++i) {
            SpectralPoint v(draw(g)), vp(draw(g));
            EXPECT_LT(verify_commutation_factor(CommLaw(c), 1, v, vp, p), 1e-10) << comm_law_name(CommLaw(c));
        }
}

TEST(Commutation, ChiAtCoincidentPoints) {
    ModelParams p = desk(2);
    SpectralPoint v(cplx(0.2, 0.1));
    EXPECT_LT(verify_commutation_factor(CommLaw::chi_j, 1, v, v, p), 1e-10);
    EXPECT_THROW(verify_commutation_factor(CommLaw::f_UaUa_pm, 1, v, v, p), DomainError);
}

TEST(Delta, IdentityAndGuard) {
    EXPECT_LT(delta_identity_residual(20, desk(2)), 1e-12);
    ModelParams p = desk(2);
    p.eps = 0;
    EXPECT_THROW(delta_identity_residual(20, p), DomainError);
}

TEST(Zeros, OnAndOffTheZero) {
    ModelParams p = desk(3);
    for (auto z : {ZeroRelation::WV, ZeroRelation::WV_prime, ZeroRelation::UW, ZeroRelation::UW_prime}) {
        EXPECT_LT(ope_zero_check(z, 0.3, p), 1e-12) << zero_relation_name(z);
        EXPECT_GT(ope_zero_check(z, 0.3, p, 0.2), 1e-3) << zero_relation_name(z);
    }
}

TEST(Kernel, UChainCarriesBothFamilies) {
    ModelParams p = desk(3);
    std::vector<FreeFieldOperator> ops{build_basic_op(OpKind::U_omega, 1, {}, 1, p),
                                       build_basic_op(OpKind::U_alpha, 1, {}, 1, p)};
    auto kd = assemble_kernel(ops, p);
    ASSERT_EQ(kd.kernels.size(), 1u);
    EXPECT_EQ(kd.kernels[0].kind, KernelKind::f);
    ASSERT_EQ(kd.poles.size(), 2u);
    EXPECT_EQ(kd.poles[0].side, ContourSide::inside);
    EXPECT_EQ(kd.poles[1].side, ContourSide::outside);
    EXPECT_NEAR(std::abs(kd.poles[0].ratio(0, p)), p.x(), 1e-15);
}

TEST(Kernel, VUPolesAtMinusX) {
    ModelParams p = desk(2);
    std::vector<FreeFieldOperator> ops{build_basic_op(OpKind::V_alpha, 1, {}, 1, p),
                                       build_basic_op(OpKind::U_alpha, 1, {}, 1, p)};
    auto kd = assemble_kernel(ops, p);
    ASSERT_EQ(kd.poles.size(), 2u);
    for (auto& law : kd.poles) {
        EXPECT_EQ(law.sgn, -1);
        EXPECT_EQ(law.side, ContourSide::inside);
        EXPECT_EQ(std::abs(law.e0), 1.0);
    }
    // z_U = -x^{-1} z_V sits on a pole
    cplx near = kd.evaluate({SpectralPoint(0.0), SpectralPoint(-0.5 + 1e-9, 1)}, p);
    cplx far = kd.evaluate({SpectralPoint(0.0), SpectralPoint(0.2)}, p);
    EXPECT_GT(std::abs(near), 1e6 * std::abs(far));
}

TEST(Kernel, SingleOperatorHasEmptyCatalog) {
    ModelParams p = desk(2);
    auto kd = assemble_kernel({build_basic_op(OpKind::U_alpha, 1, {}, 1, p)}, p);
    EXPECT_TRUE(kd.pair_forms.empty());
    EXPECT_TRUE(kd.poles.empty());
    EXPECT_TRUE(kd.zeros.empty());
    EXPECT_THROW(assemble_kernel({}, p), DomainError);
}

TEST(Integrand, TypeOneWithoutScreenings) {
    ModelParams p = desk(3);
    auto g = draw_engine(2, "integrand", 0);
    auto sec = SectorScalars::from_weights(random_generic_weight(3, g), random_generic_weight(3, g), p.r);
    cplx want = 1;
    for (int j = 1; j < 3; ++j) want /= bracket(p, sec.K[j][0], p.r);
    cplx got = vertex_integrand(IntegrandKind::typeI, 0, SpectralPoint(0.1), {}, sec, p);
    EXPECT_LT(std::abs(got - want), 1e-13 * std::abs(want));
    EXPECT_THROW(vertex_integrand(IntegrandKind::typeI, 1, SpectralPoint(0.1), {}, sec, p), DomainError);
}

TEST(Integrand, OrderingAgrees) {
    for (int n : {2, 3}) {
        ModelParams p = desk(n);
        auto g = draw_engine(3, "order", std::uint64_t(n));
        auto sec = SectorScalars::from_weights(random_generic_weight(n, g), random_generic_weight(n, g), p.r);
        for (auto kind : {IntegrandKind::typeI, IntegrandKind::typeI_dual, IntegrandKind::typeII,
                          IntegrandKind::typeII_dual})
            for (int mu = 0; mu < n; ++mu) {
                bool forward = kind == IntegrandKind::typeI || kind == IntegrandKind::typeII;
                std::vector<SpectralPoint> zs;
                for (int i = 0; i < (forward ? mu : n - 1 - mu); ++i) zs.push_back(draw(g));
                SpectralPoint v0(draw(g));
                cplx a = vertex_integrand(kind, mu, v0, zs, sec, p);
                cplx b = vertex_integrand(kind, mu, v0, zs, sec, p, IntegrandForm::reversed);
                EXPECT_LT(std::abs(a - b) / std::abs(a), 1e-10) << integrand_name(kind) << " mu=" << mu;
            }
    }
}

TEST(Constants, FiniteAndNonZero) {
    for (int n : {2, 3})
        for (double x : {0.05, 0.3, 0.5}) {
            ModelParams p = ModelParams::from_x(n, 5.5, x);
            for (auto k : {ConstantKind::c_n, ConstantKind::c_prime_n}) {
                cplx c = constants(k, p);
                EXPECT_TRUE(std::isfinite(std::abs(c)));
                EXPECT_NE(c, cplx(0));
            }
        }
}
