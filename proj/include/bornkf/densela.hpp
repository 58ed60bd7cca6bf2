#ifndef BORNKF_DENSELA_HPP
#define BORNKF_DENSELA_HPP

// Dense complex linear algebra used by the estimators. Storage and the
// factorizations themselves come from Eigen; this layer pins down the
// preconditions (Hermitian, positive definite, finite) and the error codes.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "bornkf/error.hpp"

namespace bornkf {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Largest |H - H^H| entry accepted by hermitian_solve.
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kDefaultRankTolerance = 1e-10;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
    return a.adjoint();
}

/// max_{i,j} |H(i,j) - conj(H(j,i))|
inline double hermitian_deviation(const ComplexMatrix& h) {
    if (h.rows() != h.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "hermitian_deviation: matrix is not square");
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = i; j < h.cols(); ++j) {
            worst = std::max(worst, std::abs(h(i, j) - std::conj(h(j, i))));
        }
    }
    return worst;
}

/// (H + H^H) / 2
inline ComplexMatrix hermitian_part(const ComplexMatrix& h) {
    ComplexMatrix out = 0.5 * (h + h.adjoint());
    return out;
}

/// Solves H X = rhs for Hermitian positive definite H by Cholesky
/// factorization of the symmetrized matrix. H is never inverted.
inline ComplexMatrix hermitian_solve(const ComplexMatrix& h, const ComplexMatrix& rhs) {
    if (h.rows() != h.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "hermitian_solve: matrix is not square");
    }
    if (rhs.rows() != h.rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "hermitian_solve: rhs has " + std::to_string(rhs.rows()) + " rows, expected " +
                        std::to_string(h.rows()));
    }
    if (!all_finite(h) || !all_finite(rhs)) {
        throw Error(ErrorCode::NonFinite, "hermitian_solve: non-finite input");
    }
    const double deviation = hermitian_deviation(h);
    if (deviation > kHermitianTolerance) {
        throw Error(ErrorCode::NotHermitian,
                    "hermitian_solve: |H - H^H| = " + std::to_string(deviation));
    }
    Eigen::LLT<ComplexMatrix> llt(hermitian_part(h));
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NotPositiveDefinite, "hermitian_solve: non-positive pivot");
    }
    ComplexMatrix x = llt.solve(rhs);
    if (!all_finite(x)) {
        throw Error(ErrorCode::NonFinite, "hermitian_solve: non-finite solution");
    }
    return x;
}

inline ComplexVector hermitian_solve(const ComplexMatrix& h, const ComplexVector& rhs) {
    const ComplexMatrix x = hermitian_solve(h, ComplexMatrix(rhs));
    return x.col(0);
}

/// Number of singular values strictly above rel_tol * sigma_max.
inline std::size_t svd_rank(const ComplexMatrix& a, double rel_tol = kDefaultRankTolerance) {
    if (!(rel_tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "svd_rank: rel_tol must be positive");
    }
    if (a.size() == 0) return 0;
    if (!all_finite(a)) {
        throw Error(ErrorCode::NonFinite, "svd_rank: non-finite input");
    }
    Eigen::BDCSVD<ComplexMatrix> svd(a);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (!sv.allFinite()) {
        throw Error(ErrorCode::SvdFailure, "svd_rank: singular values did not converge");
    }
    const double largest = sv.size() > 0 ? sv.maxCoeff() : 0.0;
    if (largest == 0.0) return 0;
    const double cutoff = rel_tol * largest;
    return static_cast<std::size_t>((sv.array() > cutoff).count());
}

inline ComplexMatrix vstack(std::span<const ComplexMatrix> blocks) {
    if (blocks.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "vstack: no blocks");
    }
    const Eigen::Index cols = blocks.front().cols();
    Eigen::Index rows = 0;
    for (const auto& b : blocks) {
        if (b.cols() != cols) {
            throw Error(ErrorCode::DimensionMismatch,
                        "vstack: block with " + std::to_string(b.cols()) + " columns, expected " +
                            std::to_string(cols));
        }
        rows += b.rows();
    }
    ComplexMatrix out(rows, cols);
    Eigen::Index offset = 0;
    for (const auto& b : blocks) {
        out.middleRows(offset, b.rows()) = b;
        offset += b.rows();
    }
    return out;
}

inline ComplexVector vstack(std::span<const ComplexVector> blocks) {
    if (blocks.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "vstack: no blocks");
    }
    Eigen::Index rows = 0;
    for (const auto& b : blocks) rows += b.size();
    ComplexVector out(rows);
    Eigen::Index offset = 0;
    for (const auto& b : blocks) {
        out.segment(offset, b.size()) = b;
        offset += b.size();
    }
    return out;
}

} // namespace bornkf

#endif // BORNKF_DENSELA_HPP
