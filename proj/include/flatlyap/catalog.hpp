#pragma once

// Example flat bundles: surface, monodromy, and where known a holomorphic
// subbundle given by its divisor field and Chern number.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "flatlyap/cocycle.hpp"
#include "flatlyap/errors.hpp"
#include "flatlyap/geometry.hpp"
#include "flatlyap/grassmann.hpp"
#include "flatlyap/harmonic.hpp"
#include "flatlyap/linalg.hpp"
#include "flatlyap/rng.hpp"

namespace flatlyap {

/// Local exponents of a hypergeometric Sp(4) slot: A has eigenvalues exp(2 pi i alpha_j),
/// B has eigenvalues exp(2 pi i beta_j).
struct HypergeometricParams {
    std::array<double, 4> alpha{};
    std::array<double, 4> beta{};
    std::string label = "unlabelled";  ///< thin | thick | unlabelled
};

struct PresetParams {
    std::uint64_t seed = 0;                     ///< random presets only
    int weight2_k = 1;                          ///< weight2_1k1: rank k + 2
    std::string slot;                           ///< hypergeometric_sp4: hg01 ... hg14
    std::optional<HypergeometricParams> hypergeometric;
};

struct PresetInfo {
    std::string name;
    std::string surface;
    std::string description;
    bool exploratory = false;  ///< no pass/fail gate attached
};

struct BuiltPreset {
    std::string name;
    SurfaceModel surface;
    Representation rep;
    std::optional<SubbundleData> subbundle;
    std::optional<SchottkyData> schottky;
    std::optional<HypergeometricParams> hypergeometric;
    std::vector<std::string> notes;
};

inline const std::vector<PresetInfo>& catalog() {
    static const std::vector<PresetInfo> presets = {
        {"unitary_rank2", "genus2_octagon", "SU(2) monodromy with dense projective action (b_i commute with a_i)", false},
        {"rank1_character", "genus2_octagon", "non-unitary rank-1 character", false},
        {"fuchsian_genus2", "genus2_octagon", "uniformizing SL(2,R) representation of the octagon group", false},
        {"weight1_vhs", "genus2_octagon",
         "uniformizing representation with the signature (1,1) form; E^1 is the tautological line, Chern number 1", false},
        {"weight2_1k1", "genus2_octagon",
         "Sym^2 of the uniformizing representation plus a trivial block; type (1,k,1), F = E^2 + E^1 with Chern number 2",
         false},
        {"schottky_rank2", "genus2_octagon",
         "rank-2 Schottky group on circles about +-2, +-2i (radius 1) through a_i, b_i -> 1; divisor at the point 0", false},
        {"sp4_random", "genus2_octagon", "random Sp(4,R) products of transvections through a_i, b_i -> 1", false},
        {"hypergeometric_sp4", "thrice_punctured_sphere",
         "companion-matrix pair for local exponents (alpha; beta); 14 empty slots hg01..hg14", true},
    };
    return presets;
}

/// Names of the hypergeometric slots. Their parameters and thin/thick labels are
/// configuration inputs; seven of the fourteen cases are thin.
inline std::vector<std::string> hypergeometric_slots() {
    std::vector<std::string> out;
    for (int i = 1; i <= 14; ++i) out.push_back(std::string("hg") + (i < 10 ? "0" : "") + std::to_string(i));
    return out;
}

namespace detail {

inline CMatrix to_cmatrix(const Mobius& m) {
    const Mobius n = m.normalized();
    CMatrix out(2, 2);
    out << n.a, n.b, n.c, n.d;
    return out;
}

inline CMatrix to_cmatrix(const ComplexMobius& m) {
    CMatrix out(2, 2);
    out << m.a, m.b, m.c, m.d;
    return out;
}

/// Symmetric square on coordinates (v1^2, 2 v1 v2, v2^2): Sym2(g) s(v) = s(g v).
inline CMatrix sym2(const CMatrix& g) {
    const Complex a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
    CMatrix s(3, 3);
    s << a * a, a * b, b * b,
         2.0 * a * c, a * d + b * c, 2.0 * b * d,
         c * c, c * d, d * d;
    return s;
}

/// exp(i theta (n . sigma)) for a unit axis n.
inline CMatrix su2(double theta, std::array<double, 3> axis) {
    const double nrm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    for (double& v : axis) v /= nrm;
    const Complex i(0.0, 1.0);
    const double c = std::cos(theta), s = std::sin(theta);
    CMatrix u(2, 2);
    u << c + i * s * axis[2], i * s * axis[0] + s * axis[1],
         i * s * axis[0] - s * axis[1], c - i * s * axis[2];
    return u;
}

inline CMatrix standard_symplectic_c(int n) {
    const int h = n / 2;
    CMatrix j = CMatrix::Zero(n, n);
    j.topRightCorner(h, h) = CMatrix::Identity(h, h);
    j.bottomLeftCorner(h, h) = -CMatrix::Identity(h, h);
    return j;
}

/// Product of `count` random transvections x -> x + t (v^T J x) v.
inline CMatrix random_sp(int n, RandomStream& rng, int count = 4) {
    const CMatrix j = standard_symplectic_c(n);
    CMatrix g = CMatrix::Identity(n, n);
    for (int c = 0; c < count; ++c) {
        CVector v(n);
        for (int i = 0; i < n; ++i) v(i) = rng.normal();
        const double t = 2.0 * rng.uniform() - 1.0;
        g = g * (CMatrix::Identity(n, n) + t * v * (v.transpose() * j));
    }
    return g;
}

/// Companion matrix of prod_j (x - exp(2 pi i e_j)), last column -c_0 ... -c_3.
inline CMatrix companion(const std::array<double, 4>& exponents) {
    std::vector<Complex> coeff{1.0};  // ascending powers of the monic product
    for (double e : exponents) {
        const Complex root = std::polar(1.0, 2.0 * std::numbers::pi * e);
        std::vector<Complex> next(coeff.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            next[i + 1] += coeff[i];
            next[i] -= root * coeff[i];
        }
        coeff = std::move(next);
    }
    CMatrix m = CMatrix::Zero(4, 4);
    for (int i = 1; i < 4; ++i) m(i, i - 1) = 1.0;
    for (int i = 0; i < 4; ++i) m(i, 3) = -coeff[static_cast<std::size_t>(i)];
    return m;
}

inline DivisorForm unit_covector(CVector c) {
    const double n = c.norm();
    if (!(n > 0.0)) throw NumericalDegeneracy("divisor covector vanished");
    return {c / n};
}

}  // namespace detail

/// Generators of the uniformizing representation, in surface generator order.
inline std::vector<CMatrix> fuchsian_generators(const SurfaceModel& s) {
    std::vector<CMatrix> out;
    for (const auto& m : s.generators) out.push_back(detail::to_cmatrix(m));
    return out;
}

/// Divisor field of the tautological line span(x, 1) over x in the upper half-plane:
/// the covector (1, -x) annihilates it, and the field is equivariant for the uniformizing representation.
inline DivisorField tautological_line_divisor() {
    return [](const HPoint& p) {
        CVector c(2);
        c << 1.0, -p.z();
        return detail::unit_covector(c);
    };
}

/// Bilinear form preserved by sym2 of SL(2): (det[v w])^2 = B(s(v), s(w)), sign flipped so
/// that the Hermitian form is positive on s(x, 1) for x in the upper half-plane.
inline CMatrix sym2_form() {
    CMatrix q = CMatrix::Zero(3, 3);
    q(0, 2) = q(2, 0) = -1.0;
    q(1, 1) = 0.5;
    return q;
}

/// Divisor of E^2 + E^1 = (E^2)^perp in the (1,k,1) preset: covector Q s(x, 1) padded by zeros.
inline DivisorField weight2_divisor(int k) {
    return [k](const HPoint& p) {
        const Complex x = p.z();
        CVector s = CVector::Zero(k + 2);
        s(0) = x * x;
        s(1) = 2.0 * x;
        s(2) = 1.0;
        CMatrix q = CMatrix::Zero(k + 2, k + 2);
        q.topLeftCorner(3, 3) = sym2_form();
        return detail::unit_covector(q.transpose() * s);
    };
}

inline SchottkyData schottky_rank2_data() {
    SchottkyData d;
    d.pairs = {symmetric_schottky_pair({2.0, 0.0}, 1.0), symmetric_schottky_pair({0.0, 2.0}, 1.0)};
    d.validate();
    return d;
}

/// Circle through three points.
inline Circle circle_through(std::complex<double> a, std::complex<double> b, std::complex<double> c) {
    const std::complex<double> ab = b - a, ac = c - a;
    const double d = 2.0 * (ab.real() * ac.imag() - ab.imag() * ac.real());
    if (std::abs(d) < 1e-300) throw NumericalDegeneracy("circle_through: collinear points");
    const double b2 = std::norm(ab), c2 = std::norm(ac);
    const std::complex<double> center = a + std::complex<double>((ac.imag() * b2 - ab.imag() * c2) / d,
                                                                 (ab.real() * c2 - ac.real() * b2) / d);
    return {center, std::abs(center - a)};
}

/// True if z lies outside every disk s_1 ... s_{d-1}(D(s_d)) over reduced words of length `depth`.
/// Every such disk is the image of a generator disk; its interior is the image of the interior
/// because s_1 ... s_{d-1} maps D(s_d) into D(s_1).
inline bool outside_limit_disks(const SchottkyData& s, std::complex<double> z, int depth) {
    if (depth < 1) throw DomainError("outside_limit_disks: depth must be >= 1");
    std::vector<Letter> letters;
    for (std::size_t g = 0; g < s.pairs.size(); ++g) {
        letters.push_back({static_cast<int>(g), false});
        letters.push_back({static_cast<int>(g), true});
    }
    struct Frame {
        ComplexMobius prefix;
        Letter last;
        int length;
    };
    std::vector<Frame> stack;
    for (const Letter& l : letters) stack.push_back({ComplexMobius{}, l, 1});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        const Circle& c = s.disk(f.last);
        const auto on = [&](double th) { return f.prefix.apply(c.center + std::polar(c.radius, th)); };
        const Circle img = circle_through(on(0.0), on(2.0 * std::numbers::pi / 3.0), on(4.0 * std::numbers::pi / 3.0));
        if (img.contains(z)) return false;
        if (f.length == depth) continue;
        const ComplexMobius next = f.prefix * s.letter_map(f.last);
        for (const Letter& l : letters)
            if (!(l == f.last.inverted())) stack.push_back({next, l, f.length + 1});
    }
    return true;
}

namespace detail {

inline BuiltPreset finish(BuiltPreset p) {
    check_relation(p.rep, p.surface);
    return p;
}

}  // namespace detail

/// Builds a preset by name. Throws DomainError for unknown names or missing slot parameters.
inline BuiltPreset build_preset(const std::string& name, const PresetParams& params = {}) {
    BuiltPreset p;
    p.name = name;
    const CMatrix id2 = CMatrix::Identity(2, 2);
    if (name == "unitary_rank2") {
        p.surface = genus2_octagon();
        const CMatrix u1 = detail::su2(1.0, {0.3, 0.5, 0.81});
        const CMatrix u2 = detail::su2(std::numbers::sqrt2, {-0.7, 0.2, 0.4});
        p.rep = make_representation({u1, u1 * u1, u2, u2 * u2 * u2}, {}, true, false, name);
        return detail::finish(std::move(p));
    }
    if (name == "rank1_character") {
        p.surface = genus2_octagon();
        auto c = [](double r, double th) {
            CMatrix m(1, 1);
            m(0, 0) = std::polar(r, th);
            return m;
        };
        p.rep = make_representation({c(2.0, 0.4), c(1.0, 1.3), c(0.5, -0.9), c(1.5, 2.2)}, {}, false, true, name);
        return detail::finish(std::move(p));
    }
    if (name == "fuchsian_genus2" || name == "weight1_vhs") {
        p.surface = genus2_octagon();
        if (name == "fuchsian_genus2") {
            p.rep = make_representation(fuchsian_generators(p.surface), {FormKind::symplectic, detail::standard_symplectic_c(2)},
                                        false, true, name);
        } else {
            CMatrix j(2, 2);
            j << 0.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 0.0;
            p.rep = make_representation(fuchsian_generators(p.surface), {FormKind::hermitian, j}, false, true, name);
        }
        p.subbundle = SubbundleData{tautological_line_divisor(), Rational{1, 1}, "E1"};
        return detail::finish(std::move(p));
    }
    if (name == "weight2_1k1") {
        const int k = params.weight2_k;
        if (k < 1) throw DomainError("weight2_1k1: k must be >= 1");
        p.surface = genus2_octagon();
        std::vector<CMatrix> gens;
        for (const auto& g : fuchsian_generators(p.surface)) {
            CMatrix m = CMatrix::Identity(k + 2, k + 2);
            m.topLeftCorner(3, 3) = detail::sym2(g);
            gens.push_back(m);
        }
        CMatrix q = -CMatrix::Identity(k + 2, k + 2);
        q.topLeftCorner(3, 3) = sym2_form();
        p.rep = make_representation(std::move(gens), {FormKind::hermitian, q}, false, k == 1, name);
        p.subbundle = SubbundleData{weight2_divisor(k), Rational{2, 1}, "E2+E1"};
        return detail::finish(std::move(p));
    }
    if (name == "schottky_rank2") {
        p.surface = genus2_octagon();
        p.schottky = schottky_rank2_data();
        const CMatrix a = detail::to_cmatrix(p.schottky->pairs[0].map);
        const CMatrix b = detail::to_cmatrix(p.schottky->pairs[1].map);
        p.rep = make_representation({a, id2, b, id2}, {}, false, true, name);
        CVector c(2);
        c << 1.0, 0.0;  // annihilates the line of the point 0 = [0 : 1]
        p.subbundle = SubbundleData{constant_divisor(detail::unit_covector(c)), Rational{0, 1}, "section at 0"};
        p.notes.push_back("the constant section at 0 is a proxy for the developing-map section; its degree is not known");
        return detail::finish(std::move(p));
    }
    if (name == "sp4_random") {
        p.surface = genus2_octagon();
        RandomStream rng(params.seed, "preset_sp4", 0);
        const CMatrix a1 = detail::random_sp(4, rng);
        const CMatrix a2 = detail::random_sp(4, rng);
        const CMatrix id4 = CMatrix::Identity(4, 4);
        p.rep = make_representation({a1, id4, a2, id4}, {FormKind::symplectic, detail::standard_symplectic_c(4)}, false, false,
                                    name);
        return detail::finish(std::move(p));
    }
    if (name == "hypergeometric_sp4") {
        const auto slots = hypergeometric_slots();
        if (!params.slot.empty() && std::find(slots.begin(), slots.end(), params.slot) == slots.end())
            throw DomainError("hypergeometric_sp4: unknown slot '" + params.slot + "'");
        if (!params.hypergeometric)
            throw DomainError("hypergeometric_sp4: slot '" + params.slot +
                              "' ships without parameters; supply alpha and beta in the config");
        p.surface = thrice_punctured_sphere();
        p.hypergeometric = params.hypergeometric;
        const CMatrix a = detail::companion(params.hypergeometric->alpha);
        const CMatrix b = detail::companion(params.hypergeometric->beta);
        p.rep = make_representation({a, b}, {}, false, false, name + (params.slot.empty() ? "" : ":" + params.slot));
        p.notes.push_back("cusped surface: the analytic degree theory is not settled here; results are exploratory");
        return detail::finish(std::move(p));
    }
    throw DomainError("unknown preset '" + name + "'");
}

}  // namespace flatlyap
