#include <gtest/gtest.h>

#include <numbers>
#include <set>

#include "flatlyap/catalog.hpp"

using namespace flatlyap;

namespace {

const std::vector<std::string> kGated = {"unitary_rank2", "rank1_character", "fuchsian_genus2", "weight1_vhs",
                                         "weight2_1k1",   "schottky_rank2",  "sp4_random"};

// 1 - |<a, b>| / (|a| |b|): zero exactly when a and b are proportional
double misalignment(const CVector& a, const CVector& b) { return 1.0 - std::abs(a.dot(b)) / (a.norm() * b.norm()); }

PresetParams with_seed(std::uint64_t seed) {
    PresetParams p;
    p.seed = seed;
    return p;
}

PresetParams with_k(int k) {
    PresetParams p;
    p.weight2_k = k;
    return p;
}

PresetParams with_slot(const std::string& slot) {
    PresetParams p;
    p.slot = slot;
    return p;
}

}  // namespace

TEST(Catalog, ListsPresetsAndSlots) {
    EXPECT_GE(catalog().size(), 6u);
    std::set<std::string> names;
    for (const auto& p : catalog()) names.insert(p.name);
    EXPECT_EQ(names.size(), catalog().size());
    for (const auto& n : kGated) EXPECT_TRUE(names.count(n)) << n;
    const auto slots = hypergeometric_slots();
    EXPECT_EQ(slots.size(), 14u);
    EXPECT_EQ(std::set<std::string>(slots.begin(), slots.end()).size(), 14u);
    EXPECT_EQ(slots.front(), "hg01");
    EXPECT_EQ(slots.back(), "hg14");
}

TEST(Catalog, EveryGatedPresetSatisfiesItsInvariants) {
    for (const auto& name : kGated) {
        const BuiltPreset p = build_preset(name);
        EXPECT_EQ(p.rep.generator_count(), p.surface.generator_count()) << name;
        EXPECT_LE(relation_residual(p.rep, p.surface), 1e-9) << name;
        for (int g = 0; g < p.rep.generator_count(); ++g)
            EXPECT_LE(form_residual(p.rep.generators[g], p.rep.form), 1e-9) << name << " generator " << g;
    }
}

TEST(Catalog, UnitaryPresetIsUnitary) {
    const BuiltPreset p = build_preset("unitary_rank2");
    for (const auto& g : p.rep.generators) EXPECT_LT((g.adjoint() * g - CMatrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(Catalog, UnknownNameThrows) { EXPECT_THROW(build_preset("no_such_preset"), DomainError); }

TEST(Catalog, RandomPresetFollowsItsSeed) {
    const BuiltPreset a = build_preset("sp4_random", with_seed(5));
    const BuiltPreset b = build_preset("sp4_random", with_seed(5));
    const BuiltPreset c = build_preset("sp4_random", with_seed(6));
    EXPECT_EQ(a.rep.generators[0], b.rep.generators[0]);
    EXPECT_GT((a.rep.generators[0] - c.rep.generators[0]).norm(), 1e-3);
}

TEST(Catalog, Weight2RankFollowsK) {
    for (int k = 1; k <= 3; ++k) {
        const BuiltPreset p = build_preset("weight2_1k1", with_k(k));
        EXPECT_EQ(p.rep.n, k + 2);
        EXPECT_EQ(p.rep.strongly_irreducible, k == 1);
    }
    EXPECT_THROW(build_preset("weight2_1k1", with_k(0)), DomainError);
}

TEST(Catalog, SubbundleDivisorsAreEquivariant) {
    // for a flat subbundle F the divisor field satisfies d(g x)^T rho(g) ~ d(x)^T
    RandomStream r(1, "catalog", 0);
    for (const char* name : {"weight1_vhs", "weight2_1k1"}) {
        const BuiltPreset p = build_preset(name);
        ASSERT_TRUE(p.subbundle);
        for (int i = 0; i < 20; ++i) {
            const HPoint x = sample_uniform(p.surface, r);
            for (int g = 0; g < p.rep.generator_count(); ++g) {
                const HPoint gx = mobius_apply(p.surface.generators[g], x);
                const CVector before = p.subbundle->divisor(x).coeffs;
                const CVector after = p.rep.generators[g].transpose() * p.subbundle->divisor(gx).coeffs;
                EXPECT_LT(misalignment(before, after), 1e-10) << name << " generator " << g;
            }
        }
    }
}

TEST(Catalog, TautologicalLineLiesOnItsDivisor) {
    const BuiltPreset p = build_preset("weight1_vhs");
    const HPoint x{0.3, 0.8};
    CVector line(2);
    line << x.z(), 1.0;
    EXPECT_LT(std::abs((p.subbundle->divisor(x).coeffs.transpose() * line)(0, 0)), 1e-14);
    EXPECT_EQ(p.subbundle->chern_number.str(), "1");
}

TEST(Catalog, CompanionEigenvaluesAreTheLocalExponents) {
    const std::array<double, 4> e{0.1, 0.25, 0.6, 0.85};
    const CMatrix m = detail::companion(e);
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<CMatrix>(m).eigenvalues();
    for (double x : e) {
        const Complex root = std::polar(1.0, 2.0 * std::numbers::pi * x);
        double best = 1.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::min(best, std::abs(ev(i) - root));
        EXPECT_LT(best, 1e-9) << x;
    }
}

TEST(Catalog, HypergeometricNeedsParameters) {
    EXPECT_THROW(build_preset("hypergeometric_sp4", with_slot("hg03")), DomainError);
    EXPECT_THROW(build_preset("hypergeometric_sp4", with_slot("hg15")), DomainError);
    PresetParams params = with_slot("hg01");
    params.hypergeometric = HypergeometricParams{{0.1, 0.2, 0.8, 0.9}, {0.0, 0.0, 0.5, 0.5}, "thin"};
    const BuiltPreset p = build_preset("hypergeometric_sp4", params);
    EXPECT_EQ(p.surface.name, "thrice_punctured_sphere");
    EXPECT_EQ(p.rep.n, 4);
    EXPECT_EQ(p.rep.generator_count(), 2);
    EXPECT_FALSE(p.notes.empty());
}

TEST(Catalog, SchottkyBasepointAvoidsTheLimitSet) {
    const BuiltPreset p = build_preset("schottky_rank2");
    ASSERT_TRUE(p.schottky);
    EXPECT_TRUE(outside_limit_disks(*p.schottky, {0.0, 0.0}, 6));
    // centres of the generator disks are inside the first level
    EXPECT_FALSE(outside_limit_disks(*p.schottky, {2.0, 0.0}, 1));
    EXPECT_FALSE(outside_limit_disks(*p.schottky, {0.0, -2.0}, 1));
    EXPECT_THROW(outside_limit_disks(*p.schottky, {0.0, 0.0}, 0), DomainError);
    // a limit point stays inside the disks at every depth: the attracting fixed point of the first map
    std::complex<double> z{2.0, 0.0};
    for (int i = 0; i < 60; ++i) z = p.schottky->pairs[0].map.apply(z);
    for (int d = 1; d <= 6; ++d) EXPECT_FALSE(outside_limit_disks(*p.schottky, z, d)) << d;
}
