#include <gtest/gtest.h>

#include <cmath>

#include "flatlyap/catalog.hpp"
#include "flatlyap/cocycle.hpp"

using namespace flatlyap;

namespace {

CMatrix random_matrix(int n, RandomStream& r) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = {r.normal(), r.normal()};
    return m;
}

Word random_word(int generators, int length, RandomStream& r) {
    Word w;
    for (int i = 0; i < length; ++i) w.push_back({static_cast<int>(r() % static_cast<unsigned>(generators)), (r() & 1u) != 0});
    return w;
}

Representation fuchsian() { return make_representation(fuchsian_generators(genus2_octagon()), {}, false, true, "fuchsian"); }

}  // namespace

TEST(Transport, EmptyWordIsIdentity) {
    const Representation rep = fuchsian();
    const CocycleProduct p = transport(rep, Word{});
    EXPECT_LT((p.unit_matrix - CMatrix::Identity(2, 2)).norm(), 1e-15);
    EXPECT_EQ(p.log_scale, 0.0);
    EXPECT_NEAR(cocycle_norm_log(p), 0.0, 1e-15);
}

TEST(Transport, InverseCancellation) {
    const Representation rep = fuchsian();
    for (int g = 0; g < 4; ++g) {
        const CocycleProduct p = transport(rep, Word{{g, false}, {g, true}});
        EXPECT_LT((std::exp(p.log_scale) * p.unit_matrix - CMatrix::Identity(2, 2)).norm(), 1e-10);
    }
}

TEST(Transport, LongWordMatchesNaivePrefix) {
    const Representation rep = fuchsian();
    RandomStream r(1, "cocycle", 0);
    const Word w = random_word(4, 10000, r);
    CMatrix naive = CMatrix::Identity(2, 2);
    for (int i = 0; i < 30; ++i) naive = naive * rep.matrix(w[static_cast<std::size_t>(i)]);
    const CocycleProduct prefix = transport(rep, std::span<const Letter>(w).first(30));
    EXPECT_NEAR(std::exp(cocycle_norm_log(prefix)), operator_norm(naive), 1e-8 * operator_norm(naive));
    const CocycleProduct full = transport(rep, w);
    EXPECT_TRUE(std::isfinite(full.log_scale));
    EXPECT_GT(full.log_scale, 100.0);
}

TEST(Transport, ExtendEqualsTransportOfConcatenation) {
    const Representation rep = fuchsian();
    RandomStream r(2, "cocycle", 0);
    const Word a = random_word(4, 200, r), b = random_word(4, 300, r);
    Word ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    CocycleProduct p = transport(rep, a);
    extend(p, rep, b);
    EXPECT_NEAR(cocycle_norm_log(p), cocycle_norm_log(transport(rep, ab)), 1e-8 * (1 + std::abs(cocycle_norm_log(p))));
}

TEST(NormLog, Examples) {
    const Representation id = make_representation({CMatrix::Identity(3, 3)});
    EXPECT_EQ(cocycle_norm_log(transport(id, Word{{0, false}})), 0.0);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0 / 3.0;
    const Representation diag = make_representation({d});
    EXPECT_NEAR(cocycle_norm_log(transport(diag, Word{{0, false}})), std::log(3.0), 1e-14);
    const Representation u = make_representation({detail::su2(0.7, {0.1, 0.2, 0.3}), detail::su2(1.1, {0.5, -0.2, 0.1})}, {}, true);
    RandomStream r(3, "cocycle", 0);
    EXPECT_NEAR(cocycle_norm_log(transport(u, random_word(2, 1000, r))), 0.0, 1e-9);
}

TEST(NormLog, SubMultiplicative) {
    const Representation rep = fuchsian();
    RandomStream r(4, "cocycle", 0);
    for (int i = 0; i < 200; ++i) {
        const Word a = random_word(4, 1 + static_cast<int>(r() % 50), r), b = random_word(4, 1 + static_cast<int>(r() % 50), r);
        Word ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        EXPECT_LE(cocycle_norm_log(transport(rep, ab)),
                  cocycle_norm_log(transport(rep, a)) + cocycle_norm_log(transport(rep, b)) + 1e-8);
    }
}

TEST(Representation, RejectsFormViolationCitingGenerator) {
    const CMatrix j = detail::standard_symplectic_c(2);
    CMatrix bad = CMatrix::Identity(2, 2);
    bad(0, 0) = 2.0;
    try {
        make_representation({CMatrix::Identity(2, 2), bad}, {FormKind::symplectic, j});
        FAIL() << "expected InvariantViolation";
    } catch (const InvariantViolation& e) {
        EXPECT_EQ(e.generator(), 1);
        EXPECT_GT(e.residual(), 0.5);
    }
}

TEST(Representation, RejectsSingularAndNonUnitary) {
    EXPECT_THROW(make_representation({CMatrix::Zero(2, 2)}), InvariantViolation);
    CMatrix m = CMatrix::Identity(2, 2);
    m(0, 1) = 1.0;
    EXPECT_THROW(make_representation({m}, {}, true), InvariantViolation);
}

TEST(Representation, HermitianFormPreservedAlongLongWords) {
    const CMatrix j = [] {
        CMatrix f = CMatrix::Zero(2, 2);
        f(0, 1) = Complex(0, 1);
        f(1, 0) = Complex(0, -1);
        return f;
    }();
    const Representation rep = make_representation(fuchsian_generators(genus2_octagon()), {FormKind::hermitian, j});
    RandomStream r(5, "cocycle", 0);
    const Word w = random_word(4, 1000, r);
    const CocycleProduct p = transport(rep, w);
    // residual relative to ||rho(w)||^2: the unit matrix carries J to exp(-2 log_scale) J
    const CMatrix m = p.unit_matrix;
    const double s = std::exp(-2.0 * p.log_scale);
    EXPECT_LT((m.adjoint() * j * m - s * j).norm(), 1e-7);
    const CocycleProduct shorter = transport(rep, std::span<const Letter>(w).first(20));
    const CMatrix full = std::exp(shorter.log_scale) * shorter.unit_matrix;
    EXPECT_LT((full.adjoint() * j * full - j).norm() / full.squaredNorm(), 1e-7);
}

TEST(Representation, RelationResidualOnOctagon) {
    const SurfaceModel s = genus2_octagon();
    const Representation rep = fuchsian();
    // PSL lift: the relation may evaluate to -I
    EXPECT_LT(std::min(relation_residual(rep, s), (transport(rep, s.relation).unit_matrix + CMatrix::Identity(2, 2)).norm()),
              1e-8);
}

TEST(ExteriorPower, Examples) {
    RandomStream r(6, "cocycle", 0);
    const CMatrix m = random_matrix(3, r);
    const Representation rep = make_representation({m});
    const Representation top = exterior_power_rep(rep, 3);
    ASSERT_EQ(top.n, 1);
    EXPECT_LT(std::abs(top.generators[0](0, 0) - m.determinant()), 1e-12 * std::abs(m.determinant()) + 1e-12);
    const Representation id2 = exterior_power_rep(make_representation({CMatrix::Identity(4, 4)}), 2);
    EXPECT_LT((id2.generators[0] - CMatrix::Identity(6, 6)).norm(), 1e-15);
    CMatrix d = CMatrix::Zero(3, 3);
    d(0, 0) = 2.0;
    d(1, 1) = 3.0;
    d(2, 2) = 5.0;
    const CMatrix c = exterior_power_rep(make_representation({d}), 2).generators[0];
    EXPECT_NEAR(c(0, 0).real(), 6.0, 1e-14);   // {1,2}
    EXPECT_NEAR(c(1, 1).real(), 10.0, 1e-14);  // {1,3}
    EXPECT_NEAR(c(2, 2).real(), 15.0, 1e-14);  // {2,3}
    EXPECT_NEAR((c - c.diagonal().asDiagonal().toDenseMatrix()).norm(), 0.0, 1e-14);
}

TEST(ExteriorPower, FunctorialAndNormIsSingularValueProduct) {
    RandomStream r(7, "cocycle", 0);
    for (int i = 0; i < 50; ++i) {
        const int n = 2 + static_cast<int>(r() % 4);
        const int k = 1 + static_cast<int>(r() % static_cast<unsigned>(n));
        const CMatrix a = random_matrix(n, r), b = random_matrix(n, r);
        const CMatrix ca = compound(a, k), cb = compound(b, k);
        EXPECT_LE((compound(a * b, k) - ca * cb).norm(), 1e-8 * operator_norm(ca) * operator_norm(cb));
        const Eigen::VectorXd sv = singular_values(a);
        double prod = 1.0;
        for (int j = 0; j < k; ++j) prod *= sv(j);
        EXPECT_NEAR(operator_norm(ca), prod, 1e-9 * prod);
    }
}

TEST(ExteriorPower, SymplecticFormDroppedForEvenK) {
    const Representation rep = make_representation(fuchsian_generators(genus2_octagon()),
                                                   {FormKind::symplectic, detail::standard_symplectic_c(2)});
    const Representation e = exterior_power_rep(rep, 2);
    EXPECT_EQ(e.form.kind, FormKind::none);
    EXPECT_FALSE(e.warnings.empty());
}

TEST(NormBound, UnitaryIsZeroAndFuchsianIsOneHalf) {
    const SurfaceModel s = genus2_octagon();
    const Representation u = make_representation(
        {detail::su2(0.3, {1, 0, 0}), detail::su2(0.4, {0, 1, 0}), detail::su2(0.5, {0, 0, 1}), detail::su2(0.6, {1, 1, 0})}, {}, true);
    EXPECT_LT(distance_norm_bound_check(u, s, 200, 12, 1).max_ratio, 1e-9);
    // for SL(2, R) acting on the half-plane, ||g|| = exp(d(i, g i) / 2)
    const NormBound f = distance_norm_bound_check(fuchsian(), s, 400, 12, 2);
    EXPECT_NEAR(f.max_ratio, 0.5, 1e-8);
    const NormBound f2 = distance_norm_bound_check(fuchsian(), s, 800, 12, 2);
    EXPECT_LT(std::abs(f2.max_ratio - f.max_ratio), 0.1 * f.max_ratio);
}
