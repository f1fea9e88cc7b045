#pragma once

// Monodromy representations and overflow-safe transport along deck words.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flatlyap/errors.hpp"
#include "flatlyap/geometry.hpp"
#include "flatlyap/linalg.hpp"
#include "flatlyap/rng.hpp"

namespace flatlyap {

enum class FormKind { none, hermitian, symplectic };

/// Form J preserved by every generator: g* J g = J (Hermitian) or g^T J g = J (symplectic).
struct PreservedForm {
    FormKind kind = FormKind::none;
    CMatrix matrix;
};

struct Signature {
    int positive = 0;
    int negative = 0;
    int zero = 0;
};

inline Signature hermitian_signature(const CMatrix& j, double tol = 1e-10) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(j);
    Signature s;
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double v = es.eigenvalues()(i);
        if (v > tol * scale) ++s.positive;
        else if (v < -tol * scale) ++s.negative;
        else ++s.zero;
    }
    return s;
}

/// Residual of form preservation for one matrix.
inline double form_residual(const CMatrix& g, const PreservedForm& form) {
    switch (form.kind) {
        case FormKind::hermitian: return (g.adjoint() * form.matrix * g - form.matrix).norm();
        case FormKind::symplectic: return (g.transpose() * form.matrix * g - form.matrix).norm();
        case FormKind::none: return 0.0;
    }
    return 0.0;
}

struct Representation {
    std::string name;
    int n = 0;
    std::vector<CMatrix> generators;
    std::vector<CMatrix> inverses;
    PreservedForm form;
    bool unitary = false;
    bool strongly_irreducible = false;  ///< user assertion, not verified
    std::vector<std::string> warnings;

    int generator_count() const noexcept { return static_cast<int>(generators.size()); }
    const CMatrix& matrix(Letter l) const {
        const auto i = static_cast<std::size_t>(l.generator);
        return l.inverse ? inverses.at(i) : generators.at(i);
    }
};

inline constexpr double kInverseTolerance = 1e-10;
inline constexpr double kFormTolerance = 1e-8;

/// Builds a representation, computing inverses and checking every declared invariant.
/// Throws InvariantViolation naming the first failing generator.
inline Representation make_representation(std::vector<CMatrix> generators, PreservedForm form = {}, bool unitary = false,
                                          bool strongly_irreducible = false, std::string name = {}) {
    Representation r;
    r.name = std::move(name);
    if (generators.empty()) throw DomainError("make_representation: no generators");
    r.n = static_cast<int>(generators.front().rows());
    for (std::size_t i = 0; i < generators.size(); ++i) {
        const CMatrix& g = generators[i];
        if (g.rows() != r.n || g.cols() != r.n) throw DomainError("make_representation: generator " + std::to_string(i) + " has the wrong shape");
        Eigen::FullPivLU<CMatrix> lu(g);
        if (!lu.isInvertible()) throw InvariantViolation("generator is singular", static_cast<int>(i), 0.0);
        CMatrix inv = lu.inverse();
        const double res = (g * inv - CMatrix::Identity(r.n, r.n)).norm();
        if (res > kInverseTolerance) throw InvariantViolation("generator inverse is inaccurate", static_cast<int>(i), res);
        r.inverses.push_back(std::move(inv));
    }
    if (form.kind != FormKind::none) {
        if (form.matrix.rows() != r.n || form.matrix.cols() != r.n) throw DomainError("make_representation: form has the wrong shape");
        if (form.kind == FormKind::hermitian && (form.matrix - form.matrix.adjoint()).norm() > 1e-12)
            throw DomainError("make_representation: Hermitian form is not self-adjoint");
        if (form.kind == FormKind::symplectic) {
            if ((form.matrix + form.matrix.transpose()).norm() > 1e-12)
                throw DomainError("make_representation: symplectic form is not antisymmetric");
            if (!Eigen::FullPivLU<CMatrix>(form.matrix).isInvertible())
                throw DomainError("make_representation: symplectic form is degenerate");
        }
        for (std::size_t i = 0; i < generators.size(); ++i) {
            const double res = form_residual(generators[i], form);
            if (res > kFormTolerance) throw InvariantViolation("generator does not preserve the form", static_cast<int>(i), res);
        }
    }
    if (unitary)
        for (std::size_t i = 0; i < generators.size(); ++i) {
            const double res = (generators[i].adjoint() * generators[i] - CMatrix::Identity(r.n, r.n)).norm();
            if (res > kFormTolerance) throw InvariantViolation("generator is not unitary", static_cast<int>(i), res);
        }
    r.generators = std::move(generators);
    r.form = std::move(form);
    r.unitary = unitary;
    r.strongly_irreducible = strongly_irreducible;
    return r;
}

/// Frobenius distance of rho(relation) from the identity; zero for an honest
/// representation of the surface group. Free groups (empty relation) give 0.
inline double relation_residual(const Representation& rep, const SurfaceModel& surface) {
    if (rep.generator_count() != surface.generator_count())
        throw DomainError("relation_residual: generator counts differ");
    CMatrix m = CMatrix::Identity(rep.n, rep.n);
    for (const Letter& l : surface.relation) m = m * rep.matrix(l);
    return (m - CMatrix::Identity(rep.n, rep.n)).norm();
}

/// Throws InvariantViolation (generator -1) when the relation fails beyond tol.
inline void check_relation(const Representation& rep, const SurfaceModel& surface, double tol = kFormTolerance) {
    const double r = relation_residual(rep, surface);
    if (!(r <= tol)) throw InvariantViolation("surface relation does not hold in the representation", -1, r);
}

/// Product exp(log_scale) * unit_matrix.
struct CocycleProduct {
    CMatrix unit_matrix;
    double log_scale = 0.0;
};

namespace detail {

inline void rescale(CocycleProduct& p) {
    const double s = operator_norm(p.unit_matrix);
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericalDegeneracy("transport: product norm underflow or overflow");
    p.unit_matrix /= s;
    p.log_scale += std::log(s);
}

}  // namespace detail

/// Right-multiplies an existing product by rho(w_1) ... rho(w_k), with the same
/// rescaling rule as transport.
inline void extend(CocycleProduct& p, const Representation& rep, std::span<const Letter> word) {
    CMatrix tmp(rep.n, rep.n);
    for (const Letter& l : word) {
        tmp.noalias() = p.unit_matrix * rep.matrix(l);
        p.unit_matrix.swap(tmp);
        const double f = p.unit_matrix.norm();
        if (f > 1e2 || f < 1e-2) detail::rescale(p);
    }
    if (!word.empty()) detail::rescale(p);
}

/// Left-to-right product rho(w_1) rho(w_2) ... rho(w_k). The running matrix is
/// rescaled whenever its Frobenius norm leaves [1e-2, 1e2]; the result is
/// normalized to operator norm 1.
inline CocycleProduct transport(const Representation& rep, std::span<const Letter> word) {
    CocycleProduct out;
    out.unit_matrix = CMatrix::Identity(rep.n, rep.n);
    extend(out, rep, word);
    return out;
}

inline CocycleProduct transport(const Representation& rep, const Word& word) {
    return transport(rep, std::span<const Letter>(word));
}

/// log of the operator norm of the transported product.
inline double cocycle_norm_log(const CocycleProduct& p) { return p.log_scale + std::log(operator_norm(p.unit_matrix)); }

/// k-th exterior power: each generator replaced by its k-th compound matrix.
/// A Hermitian form passes to its compound; a symplectic form passes only for odd k
/// (for even k the induced form is symmetric and is dropped with a warning).
inline Representation exterior_power_rep(const Representation& rep, int k) {
    if (k < 1 || k > rep.n) throw DomainError("exterior_power_rep: k must lie in [1, n]");
    Representation out;
    out.name = rep.name + "^" + std::to_string(k);
    out.n = static_cast<int>(binomial(static_cast<std::size_t>(rep.n), static_cast<std::size_t>(k)));
    for (std::size_t i = 0; i < rep.generators.size(); ++i) {
        out.generators.push_back(compound(rep.generators[i], k));
        out.inverses.push_back(compound(rep.inverses[i], k));
    }
    out.unitary = rep.unitary;
    out.warnings = rep.warnings;
    if (rep.form.kind == FormKind::hermitian) {
        out.form = {FormKind::hermitian, compound(rep.form.matrix, k)};
    } else if (rep.form.kind == FormKind::symplectic) {
        if (k % 2 == 1) out.form = {FormKind::symplectic, compound(rep.form.matrix, k)};
        else out.warnings.push_back("exterior_power_rep: symplectic form dropped for even k (induced form is symmetric)");
    }
    if (rep.strongly_irreducible) out.warnings.push_back("exterior_power_rep: strong irreducibility is not inherited");
    return out;
}

struct NormBound {
    double max_ratio = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;  ///< words acting trivially on the basepoint
};

/// Empirical constant C in |log ||rho(w)||| <= C d(b, w.b) over random words with
/// lengths uniform in [1, max_length].
inline NormBound distance_norm_bound_check(const Representation& rep, const SurfaceModel& surface, std::size_t n_samples,
                                           int max_length = 12, std::uint64_t seed = 0) {
    if (rep.generator_count() != surface.generator_count())
        throw DomainError("distance_norm_bound_check: generator counts differ");
    NormBound out;
    const int m = rep.generator_count();
    for (std::size_t s = 0; s < n_samples; ++s) {
        RandomStream rng(seed, "norm_bound", s);
        const int len = 1 + static_cast<int>(rng() % static_cast<std::uint32_t>(max_length));
        Word w;
        for (int i = 0; i < len; ++i) {
            const std::uint32_t r = rng() % static_cast<std::uint32_t>(2 * m);
            w.push_back({static_cast<int>(r / 2), (r % 2) == 1});
        }
        const double d = hyperbolic_distance(surface.basepoint, mobius_apply(surface.word_mobius(w), surface.basepoint));
        if (d < 1e-9) {
            ++out.skipped;
            continue;
        }
        out.max_ratio = std::max(out.max_ratio, std::abs(cocycle_norm_log(transport(rep, w))) / d);
        ++out.used;
    }
    return out;
}

}  // namespace flatlyap
