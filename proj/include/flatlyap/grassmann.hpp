#pragma once

// Grassmannians: Pluecker coordinates, the divisor of k-planes meeting a
// codimension-k subspace, isotropy and reality predicates, and the Lagrangian
// orbit coverage diagnostic for integer symplectic groups.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "flatlyap/errors.hpp"
#include "flatlyap/linalg.hpp"
#include "flatlyap/rng.hpp"

namespace flatlyap {

/// Subspace of C^n stored by an orthonormal basis (columns).
struct Subspace {
    CMatrix basis;

    static Subspace span(const CMatrix& vectors) { return {orthonormal_columns(vectors)}; }
    int ambient() const noexcept { return static_cast<int>(basis.rows()); }
    int dim() const noexcept { return static_cast<int>(basis.cols()); }
};

/// Unit vector of k x k row minors, indexed by lexicographic k-subsets.
struct PluckerVector {
    CVector coords;
};

/// Unit covector representing Lambda^k of a basis of the annihilator of F.
struct DivisorForm {
    CVector coeffs;
};

inline PluckerVector plucker_embed(const Subspace& g) {
    const int n = g.ambient();
    const int k = g.dim();
    const auto subsets = k_subsets(n, k);
    std::vector<int> cols(static_cast<std::size_t>(k));
    std::iota(cols.begin(), cols.end(), 0);
    CVector p(static_cast<Eigen::Index>(subsets.size()));
    for (std::size_t i = 0; i < subsets.size(); ++i) p(static_cast<Eigen::Index>(i)) = minor_det(g.basis, subsets[i], cols);
    const double nrm = p.norm();
    if (!(nrm > 0.0)) throw NumericalDegeneracy("plucker_embed: degenerate basis");
    return {p / nrm};
}

/// Basis of the annihilator F° = {phi : phi^T v = 0 for v in F}, i.e. the
/// conjugate of the Hermitian orthogonal complement.
inline CMatrix annihilator_basis(const Subspace& f) { return orthogonal_complement(f.basis).conjugate(); }

inline DivisorForm fhat_form(const Subspace& f) {
    const int k = f.ambient() - f.dim();
    if (k < 1) throw DomainError("fhat_form: F must be a proper subspace");
    const CMatrix ann = annihilator_basis(f);
    const Eigen::VectorXd sv = singular_values(ann);
    if (sv(sv.size() - 1) < 1e-12) throw NumericalDegeneracy("fhat_form: annihilator basis is rank deficient");
    const PluckerVector w = plucker_embed(Subspace{ann});
    return {w.coords};
}

/// Bilinear pairing of a divisor form with Pluecker coordinates, |<d, p>| in [0, 1].
inline double divisor_distance(const PluckerVector& p, const DivisorForm& d) {
    if (p.coords.size() != d.coeffs.size()) throw DomainError("divisor_distance: dimension mismatch");
    return std::abs((d.coeffs.transpose() * p.coords)(0, 0));
}

inline constexpr double kIntersectionThreshold = 1e-8;

struct IntersectionTest {
    bool intersects = false;
    double singular_ratio = 0.0;   ///< sigma_min of the pairing matrix (phi_i(v_j)); both bases orthonormal, so in [0, 1]
    double plucker_pairing = 0.0;  ///< |<fhat_form(F), plucker_embed(G)>|
};

/// G (dim k) meets F (codim k) nontrivially iff the k x k pairing matrix between
/// an annihilator basis of F and a basis of G is singular.
inline IntersectionTest intersects_nontrivially(const Subspace& g, const Subspace& f) {
    if (g.ambient() != f.ambient() || g.dim() != f.ambient() - f.dim())
        throw DomainError("intersects_nontrivially: need dim G = codim F");
    const CMatrix ann = annihilator_basis(f);
    const CMatrix pairing = ann.transpose() * g.basis;
    const Eigen::VectorXd sv = singular_values(pairing);
    IntersectionTest out;
    out.singular_ratio = sv(sv.size() - 1);
    out.intersects = out.singular_ratio <= kIntersectionThreshold;
    out.plucker_pairing = divisor_distance(plucker_embed(g), fhat_form(f));
    return out;
}

/// Same predicate read off the Pluecker side.
inline bool plucker_intersects(const Subspace& g, const Subspace& f, double threshold = kIntersectionThreshold) {
    return divisor_distance(plucker_embed(g), fhat_form(f)) <= threshold;
}

/// dim(G ∩ F) from ranks of stacked bases.
inline int intersection_dimension(const Subspace& g, const Subspace& f, double rel_tol = 1e-8) {
    CMatrix stacked(g.ambient(), g.dim() + f.dim());
    stacked << g.basis, f.basis;
    const Eigen::VectorXd sv = singular_values(stacked);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * sv(0)) ++rank;
    return g.dim() + f.dim() - rank;
}

// ---------------------------------------------------------------------------
// Forms

enum class StructureKind { hermitian, symplectic, real_structure };

/// Hermitian (u* S v), symplectic (u^T S v), or the antilinear involution v -> S conj(v).
struct StructureForm {
    StructureKind kind = StructureKind::hermitian;
    CMatrix matrix;

    void validate() const {
        switch (kind) {
            case StructureKind::hermitian:
                if ((matrix - matrix.adjoint()).norm() > 1e-12) throw DomainError("StructureForm: not Hermitian");
                break;
            case StructureKind::symplectic:
                if ((matrix + matrix.transpose()).norm() > 1e-12 || !Eigen::FullPivLU<CMatrix>(matrix).isInvertible())
                    throw DomainError("StructureForm: not a nondegenerate antisymmetric matrix");
                break;
            case StructureKind::real_structure:
                if ((matrix * matrix.conjugate() - CMatrix::Identity(matrix.rows(), matrix.cols())).norm() > 1e-10)
                    throw DomainError("StructureForm: involution does not square to the identity");
                break;
        }
    }
};

struct PredicateResult {
    bool holds = false;
    double residual = 0.0;
};

inline PredicateResult isotropic(const Subspace& g, const StructureForm& s, double tol = 1e-9) {
    double r = 0.0;
    switch (s.kind) {
        case StructureKind::hermitian: r = (g.basis.adjoint() * s.matrix * g.basis).norm(); break;
        case StructureKind::symplectic: r = (g.basis.transpose() * s.matrix * g.basis).norm(); break;
        case StructureKind::real_structure: throw DomainError("isotropic: a real structure is not a form");
    }
    return {r <= tol, r};
}

/// G is real when the involution maps it onto itself.
inline PredicateResult is_real(const Subspace& g, const StructureForm& s, double tol = 1e-9) {
    if (s.kind != StructureKind::real_structure) throw DomainError("is_real: need a real structure");
    const CMatrix image = s.matrix * g.basis.conjugate();
    // Gram solve rather than B B*, so a basis orthonormal only up to rounding leaves no residue
    const CMatrix gram = g.basis.adjoint() * g.basis;
    const CMatrix outside = image - g.basis * gram.ldlt().solve(g.basis.adjoint() * image);
    const double r = outside.norm();
    return {r <= tol, r};
}

/// Weight-3 Hodge data of type (1,1,1,1): basis v_i of E^i with h(v_i, v_i) = (-1)^i
/// and conjugation swapping v_0 <-> v_3, v_1 <-> v_2.
struct Weight3Example {
    StructureForm h;
    StructureForm conjugation;
    Subspace plane;  ///< span(v_2 + v_3, v_0 + v_1)
    Subspace e2_plus_e3;  ///< span(v_2, v_3)
};

inline Weight3Example weight3_isotropic_example() {
    Weight3Example ex;
    ex.h = {StructureKind::hermitian, CMatrix::Zero(4, 4)};
    for (int i = 0; i < 4; ++i) ex.h.matrix(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
    ex.conjugation = {StructureKind::real_structure, CMatrix::Zero(4, 4)};
    for (int i = 0; i < 4; ++i) ex.conjugation.matrix(3 - i, i) = 1.0;
    CMatrix b = CMatrix::Zero(4, 2);
    // entries 1/sqrt(2) set directly: +x^2 - x^2 cancels exactly in the form
    b(2, 0) = b(3, 0) = std::numbers::sqrt2 / 2.0;
    b(0, 1) = b(1, 1) = std::numbers::sqrt2 / 2.0;
    ex.plane = Subspace{b};
    CMatrix top = CMatrix::Zero(4, 2);
    top(2, 0) = 1.0;
    top(3, 1) = 1.0;
    ex.e2_plus_e3 = Subspace::span(top);
    return ex;
}

// ---------------------------------------------------------------------------
// Weight-2 Hodge structures of type (1, k, 1)

/// Ambient R^{k+2} with Q = diag(1, 1, -1, ..., -1); E^2 = C(e_0 + i e_1),
/// E^0 = conj(E^2), E^1 = span(e_2, ..., e_{k+1}). h(u, v) = u* Q v.
struct Weight2Data {
    int k = 1;
    CMatrix q;
    CVector e2;

    explicit Weight2Data(int k_) : k(k_) {
        if (k < 1) throw DomainError("Weight2Data: k must be >= 1");
        const int n = k + 2;
        q = CMatrix::Identity(n, n);
        for (int i = 2; i < n; ++i) q(i, i) = -1.0;
        e2 = CVector::Zero(n);
        e2(0) = 1.0;
        e2(1) = Complex(0.0, 1.0);
    }
    int n() const noexcept { return k + 2; }
    double h_norm(const CVector& v) const { return (v.adjoint() * q * v)(0, 0).real(); }
};

struct AvoidanceReport {
    bool ok = true;
    std::size_t lines_checked = 0;
    std::size_t rejected = 0;          ///< degenerate draws resampled
    double min_line_margin = 1.0;      ///< min over lines of |projection to span(e_0, e_1)| / |v|
    double min_plane_margin = 1.0;     ///< min over lines l of |h(E^2, l)| / (|E^2| |l|)
};

/// Real isotropic line through (cos t, sin t, w) with |w| = 1.
inline CVector weight2_isotropic_line(const Weight2Data& d, double t, const Eigen::VectorXd& w) {
    CVector v(d.n());
    v(0) = std::cos(t);
    v(1) = std::sin(t);
    for (int i = 0; i < d.k; ++i) v(2 + i) = w(i);
    return v;
}

namespace detail {

inline void accumulate_avoidance(const Weight2Data& d, const CVector& v, AvoidanceReport& r) {
    const double nv = v.norm();
    const double line_margin = v.head(2).norm() / nv;
    const double plane_margin = std::abs((d.e2.adjoint() * d.q * v)(0, 0)) / (d.e2.norm() * nv);
    r.min_line_margin = std::min(r.min_line_margin, line_margin);
    r.min_plane_margin = std::min(r.min_plane_margin, plane_margin);
    ++r.lines_checked;
    // a real isotropic line inside E^1, or one h-orthogonal to E^2, would be a violation
    if (line_margin <= 1e-12 || plane_margin <= 1e-12) r.ok = false;
}

}  // namespace detail

/// Samples real h-isotropic lines; none may lie in E^1, and E^2 may not lie in
/// the h-orthogonal (k+1)-plane of any of them.
inline AvoidanceReport weight2_divisor_avoidance(int k, std::size_t n_samples, std::uint64_t seed = 0) {
    const Weight2Data d(k);
    AvoidanceReport r;
    RandomStream rng(seed, "weight2", static_cast<std::uint64_t>(k));
    while (r.lines_checked < n_samples) {
        Eigen::VectorXd u(2), w(k);
        u << rng.normal(), rng.normal();
        for (int i = 0; i < k; ++i) w(i) = rng.normal();
        if (u.norm() <= 1e-12 || w.norm() <= 1e-12) {
            ++r.rejected;
            continue;
        }
        u /= u.norm();
        w /= w.norm();
        detail::accumulate_avoidance(d, weight2_isotropic_line(d, std::atan2(u(1), u(0)), w), r);
    }
    return r;
}

/// k = 1: the real isotropic cone is two circles (w = +-1), scanned on a grid.
inline AvoidanceReport weight2_grid_k1(int n_angles) {
    const Weight2Data d(1);
    AvoidanceReport r;
    for (int s = -1; s <= 1; s += 2)
        for (int i = 0; i < n_angles; ++i) {
            Eigen::VectorXd w(1);
            w(0) = s;
            detail::accumulate_avoidance(d, weight2_isotropic_line(d, 2.0 * std::numbers::pi * i / n_angles, w), r);
        }
    return r;
}

/// Uniform random real vector of E^1 (resampled while its norm is below 1e-12).
inline CVector weight2_sample_e1(const Weight2Data& d, RandomStream& rng) {
    while (true) {
        CVector v = CVector::Zero(d.n());
        for (int i = 0; i < d.k; ++i) v(2 + i) = rng.normal();
        if (std::abs(d.h_norm(v)) > 1e-12) return v;
    }
}

// ---------------------------------------------------------------------------
// Exterior norm identity

/// |log(||L^r M|| / ||L^{r-1} M||) + log(||L^{n-r+1} M^-1|| / ||L^{n-r} M^-1||)|, L = exterior power.
inline double corrected_norm_identity_residual(const CMatrix& m, int r) {
    const int n = static_cast<int>(m.rows());
    if (r < 1 || r > n - 1) throw DomainError("corrected_norm_identity_residual: r must lie in [1, n-1]");
    Eigen::FullPivLU<CMatrix> lu(m);
    if (!lu.isInvertible()) throw NumericalDegeneracy("corrected_norm_identity_residual: singular matrix");
    const CMatrix inv = lu.inverse();
    auto ext_norm = [](const CMatrix& a, int k) { return k == 0 ? 1.0 : operator_norm(compound(a, k)); };
    const double lhs = std::log(ext_norm(m, r) / ext_norm(m, r - 1));
    const double rhs = std::log(ext_norm(inv, n - r + 1) / ext_norm(inv, n - r));
    return std::abs(lhs + rhs);
}

// ---------------------------------------------------------------------------
// Lagrangian orbit coverage

using IntMatrix4 = std::array<std::array<std::int64_t, 4>, 4>;
using IntBasis = std::array<std::array<std::int64_t, 2>, 4>;  ///< 4 x 2, columns span the plane

/// Standard symplectic form [[0, I], [-I, 0]] on Z^4.
inline IntMatrix4 standard_symplectic() {
    IntMatrix4 j{};
    j[0][2] = j[1][3] = 1;
    j[2][0] = j[3][1] = -1;
    return j;
}

inline IntMatrix4 int_multiply(const IntMatrix4& a, const IntMatrix4& b) {
    IntMatrix4 c{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline IntMatrix4 int_transpose(const IntMatrix4& a) {
    IntMatrix4 t{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t[i][j] = a[j][i];
    return t;
}

/// Elementary generators of Sp(4, Z): the form J and transvections [[I, S], [0, I]].
inline IntMatrix4 symplectic_transvection(int i, int j) {
    IntMatrix4 t{};
    for (int d = 0; d < 4; ++d) t[d][d] = 1;
    t[i][2 + j] += 1;
    if (i != j) t[j][2 + i] += 1;
    return t;
}

struct CoverageResult {
    double fraction = 0.0;
    std::size_t covered_cells = 0;
    std::size_t total_cells = 0;
    std::size_t orbit_points = 0;
};

/// Cell count of the (psi, theta, phi) angle net with spacing eps.
inline std::array<std::size_t, 3> lagrangian_net_shape(double eps) {
    const auto cells = [&](double range) { return static_cast<std::size_t>(std::ceil(range / eps)); };
    return {cells(std::numbers::pi), cells(std::numbers::pi), cells(2.0 * std::numbers::pi)};
}

/// Net cell of a real Lagrangian plane. With an orthonormal basis [X; Y] the
/// symmetric unitary W = (X + iY)(X + iY)^T depends only on the plane; writing
/// W = e^{i psi} W' with det W' = 1, psi in [0, pi), W' = [[a1 + i a2, i b], [i b, a1 - i a2]]
/// and (a1, a2, b) lies on the unit sphere.
inline std::size_t lagrangian_cell(const IntBasis& basis, double eps) {
    Eigen::Matrix<double, 4, 2> m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = static_cast<double>(basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    Eigen::HouseholderQR<Eigen::Matrix<double, 4, 2>> qr(m);
    const Eigen::Matrix<double, 4, 2> q = qr.householderQ() * Eigen::Matrix<double, 4, 2>::Identity();
    Eigen::Matrix2cd u;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) u(i, j) = Complex(q(i, j), q(2 + i, j));
    const Eigen::Matrix2cd w = u * u.transpose();
    double psi = 0.5 * std::arg(w.determinant());
    if (psi < 0.0) psi += std::numbers::pi;
    if (psi >= std::numbers::pi) psi -= std::numbers::pi;
    const Eigen::Matrix2cd wp = std::exp(Complex(0.0, -psi)) * w;
    const double a1 = wp(0, 0).real(), a2 = wp(0, 0).imag(), b = wp(0, 1).imag();
    const double theta = std::acos(std::clamp(b / std::sqrt(a1 * a1 + a2 * a2 + b * b), -1.0, 1.0));
    double phi = std::atan2(a2, a1);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    const auto shape = lagrangian_net_shape(eps);
    const auto bin = [](double v, double range, std::size_t n) {
        return std::min(n - 1, static_cast<std::size_t>(v / range * static_cast<double>(n)));
    };
    const std::size_t i0 = bin(psi, std::numbers::pi, shape[0]);
    const std::size_t i1 = bin(theta, std::numbers::pi, shape[1]);
    const std::size_t i2 = bin(phi, 2.0 * std::numbers::pi, shape[2]);
    return (i0 * shape[1] + i1) * shape[2] + i2;
}

namespace detail {

inline std::int64_t checked_mul_add(std::int64_t acc, std::int64_t a, std::int64_t b) {
    std::int64_t p = 0;
    if (__builtin_mul_overflow(a, b, &p) || __builtin_add_overflow(acc, p, &acc))
        throw ResourceLimit("lagrangian_orbit_coverage: 64-bit overflow in integer orbit");
    return acc;
}

/// Pluecker coordinates of the integer plane, gcd-reduced with a positive leading entry.
inline std::array<std::int64_t, 6> canonical_plucker(const IntBasis& b) {
    std::array<std::int64_t, 6> p{};
    int idx = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            std::int64_t v = checked_mul_add(0, b[static_cast<std::size_t>(i)][0], b[static_cast<std::size_t>(j)][1]);
            v = checked_mul_add(v, -b[static_cast<std::size_t>(j)][0], b[static_cast<std::size_t>(i)][1]);
            p[static_cast<std::size_t>(idx++)] = v;
        }
    std::int64_t g = 0;
    for (auto v : p) g = std::gcd(g, v);
    if (g == 0) throw NumericalDegeneracy("lagrangian_orbit_coverage: basis is not of rank 2");
    std::int64_t sign = 1;
    for (auto v : p)
        if (v != 0) {
            sign = v > 0 ? 1 : -1;
            break;
        }
    for (auto& v : p) v = v / g * sign;
    return p;
}

struct PluckerHash {
    std::size_t operator()(const std::array<std::int64_t, 6>& p) const noexcept {
        std::uint64_t h = 0;
        for (auto v : p) h = mix64(h ^ static_cast<std::uint64_t>(v));
        return static_cast<std::size_t>(h);
    }
};

}  // namespace detail

/// Breadth-first orbit of a Lagrangian plane under words of length <= depth in
/// the generators and their inverses; reports the fraction of net cells hit.
inline CoverageResult lagrangian_orbit_coverage(const std::vector<IntMatrix4>& generators, const IntBasis& start, int depth,
                                                double eps, std::size_t max_cells = 50'000'000,
                                                std::size_t max_orbit = 20'000'000) {
    if (depth < 0 || depth > 12) throw DomainError("lagrangian_orbit_coverage: depth must lie in [0, 12]");
    if (!(eps > 0.0)) throw DomainError("lagrangian_orbit_coverage: eps must be positive");
    const auto shape = lagrangian_net_shape(eps);
    const double total = static_cast<double>(shape[0]) * static_cast<double>(shape[1]) * static_cast<double>(shape[2]);
    if (total > static_cast<double>(max_cells)) throw ResourceLimit("lagrangian_orbit_coverage: net too fine");

    const IntMatrix4 j = standard_symplectic();
    std::vector<IntMatrix4> moves;
    for (const auto& g : generators) {
        if (int_multiply(int_multiply(int_transpose(g), j), g) != j)
            throw DomainError("lagrangian_orbit_coverage: generator is not integer symplectic");
        // g^-1 = -J g^T J
        IntMatrix4 inv = int_multiply(int_multiply(j, int_transpose(g)), j);
        for (auto& row : inv)
            for (auto& v : row) v = -v;
        moves.push_back(g);
        moves.push_back(inv);
    }
    std::int64_t omega = 0;
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 4; ++d) omega += start[c][0] * j[c][d] * start[d][1];
    if (omega != 0) throw DomainError("lagrangian_orbit_coverage: start plane is not Lagrangian");

    std::unordered_set<std::array<std::int64_t, 6>, detail::PluckerHash> seen;
    std::vector<bool> cells(static_cast<std::size_t>(total), false);
    CoverageResult out;
    out.total_cells = static_cast<std::size_t>(total);
    auto visit = [&](const IntBasis& b) {
        const std::size_t c = lagrangian_cell(b, eps);
        if (!cells[c]) {
            cells[c] = true;
            ++out.covered_cells;
        }
    };
    std::vector<IntBasis> frontier{start};
    seen.insert(detail::canonical_plucker(start));
    visit(start);
    for (int level = 0; level < depth; ++level) {
        std::vector<IntBasis> next;
        for (const IntBasis& b : frontier)
            for (const IntMatrix4& g : moves) {
                IntBasis nb{};
                for (int r = 0; r < 4; ++r)
                    for (int c = 0; c < 2; ++c) {
                        std::int64_t acc = 0;
                        for (int k = 0; k < 4; ++k) acc = detail::checked_mul_add(acc, g[r][k], b[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)]);
                        nb[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = acc;
                    }
                if (!seen.insert(detail::canonical_plucker(nb)).second) continue;
                if (seen.size() > max_orbit) throw ResourceLimit("lagrangian_orbit_coverage: orbit exceeds the point cap");
                visit(nb);
                next.push_back(nb);
            }
        frontier = std::move(next);
    }
    out.orbit_points = seen.size();
    out.fraction = static_cast<double>(out.covered_cells) / total;
    return out;
}

}  // namespace flatlyap
