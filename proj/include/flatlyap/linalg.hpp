#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "flatlyap/errors.hpp"

namespace flatlyap {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Largest dimension C(n,k) accepted for exterior powers.
inline constexpr std::size_t kExteriorDimensionCap = 4096;

inline std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<std::size_t>(r);
}

/// All k-subsets of {0..n-1} as sorted index lists, in lexicographic order.
/// This ordering indexes both compound matrices and Pluecker coordinates.
inline std::vector<std::vector<int>> k_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> s(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(s);
        int i = k - 1;
        while (i >= 0 && s[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++s[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

inline Eigen::VectorXd singular_values(const CMatrix& m) {
    if (m.rows() <= 16 && m.cols() <= 16) return Eigen::JacobiSVD<CMatrix>(m).singularValues();
    return Eigen::BDCSVD<CMatrix>(m).singularValues();
}

/// Spectral (largest singular value) norm.
inline double operator_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 || m.cols() == 1) return m.norm();
    return singular_values(m)(0);
}

/// Determinant of the square submatrix with the given rows and columns.
inline Complex minor_det(const CMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    const auto k = static_cast<Eigen::Index>(rows.size());
    if (k == 0) return Complex(1.0);
    CMatrix sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = m(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
    if (k == 1) return sub(0, 0);
    if (k == 2) return sub(0, 0) * sub(1, 1) - sub(0, 1) * sub(1, 0);
    return sub.partialPivLu().determinant();
}

/// k-th compound matrix: entry (I, J) is the minor with rows I and columns J,
/// I and J running over k-subsets in lexicographic order. Square input only.
inline CMatrix compound(const CMatrix& m, int k) {
    const int n = static_cast<int>(m.rows());
    if (m.cols() != m.rows()) throw DomainError("compound: matrix must be square");
    if (k < 0 || k > n) throw DomainError("compound: k out of range");
    const std::size_t dim = binomial(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
    if (dim > kExteriorDimensionCap) throw ResourceLimit("compound: C(n,k) exceeds the exterior dimension cap");
    if (k == 0) return CMatrix::Identity(1, 1);
    const auto subsets = k_subsets(n, k);
    CMatrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < subsets.size(); ++i)
        for (std::size_t j = 0; j < subsets.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = minor_det(m, subsets[i], subsets[j]);
    return out;
}

/// Orthonormal basis of the column span (thin Householder Q); throws on rank deficiency.
inline CMatrix orthonormal_columns(const CMatrix& basis, double rel_tol = 1e-12) {
    Eigen::ColPivHouseholderQR<CMatrix> qr(basis);
    qr.setThreshold(rel_tol);
    if (qr.rank() < basis.cols()) throw NumericalDegeneracy("orthonormal_columns: basis is rank deficient");
    CMatrix q = qr.householderQ() * CMatrix::Identity(basis.rows(), basis.cols());
    return q;
}

/// Orthonormal basis of the Hermitian orthogonal complement of span(basis).
inline CMatrix orthogonal_complement(const CMatrix& orthonormal_basis) {
    const Eigen::Index n = orthonormal_basis.rows();
    const Eigen::Index m = orthonormal_basis.cols();
    if (m == 0) return CMatrix::Identity(n, n);
    Eigen::HouseholderQR<CMatrix> qr(orthonormal_basis);
    CMatrix full = qr.householderQ();
    return full.rightCols(n - m);
}

inline Complex bilinear(const CVector& a, const CVector& b) { return (a.transpose() * b)(0, 0); }

}  // namespace flatlyap
