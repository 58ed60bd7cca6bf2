#ifndef BORNKF_ESTIMATORS_HPP
#define BORNKF_ESTIMATORS_HPP

// Regularized reconstruction of phi from linear measurements f_n = A_n phi.
//
// Full-data Tikhonov minimizes
//   alpha |phi - phi0|^2 + sum_n (f_n - A_n phi)^H R^{-1} (f_n - A_n phi)
// in one shot over the stacked system. The Kalman filter absorbs one
// (A_n, f_n) at a time starting from phi0 and B_0 = I / alpha; after the
// last step its estimate equals the Tikhonov minimizer.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bornkf/densela.hpp"

namespace bornkf {

struct KalmanState {
    ComplexVector phi;
    ComplexMatrix covariance;
    std::size_t step = 0;
};

struct RegularizationConfig {
    double alpha = 1.0;
    ComplexMatrix observation_weight; // R, J x J

    /// R = r^2 I
    static RegularizationConfig isotropic(double alpha, Eigen::Index observations, double r = 1.0) {
        return {alpha, ComplexMatrix::Identity(observations, observations) * Complex(r * r, 0.0)};
    }
};

namespace detail {

inline void require_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::InvalidAlpha, "alpha must be positive and finite, got " + std::to_string(alpha));
    }
}

inline void require_same(Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": got " + std::to_string(got) + ", expected " + std::to_string(want));
    }
}

} // namespace detail

/// (alpha I + A^H A)^{-1} A^H f
inline ComplexVector tikhonov_single(const ComplexMatrix& a, const ComplexVector& f, double alpha) {
    detail::require_alpha(alpha);
    detail::require_same(f.size(), a.rows(), "tikhonov_single: data length");
    ComplexMatrix normal = hermitian_part(a.adjoint() * a);
    normal.diagonal().array() += alpha;
    return hermitian_solve(normal, ComplexVector(a.adjoint() * f));
}

/// phi0 + (alpha I + Abar^H Rbar^{-1} Abar)^{-1} Abar^H Rbar^{-1} (fbar - Abar phi0)
/// with Abar, fbar the stacked operators and data and Rbar = diag(R, ..., R).
inline ComplexVector full_tikhonov(std::span<const ComplexMatrix> ops, std::span<const ComplexVector> data,
                                   const ComplexVector& phi0, const RegularizationConfig& config) {
    detail::require_alpha(config.alpha);
    if (ops.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "full_tikhonov: no measurements");
    }
    detail::require_same(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(ops.size()),
                         "full_tikhonov: data count");
    const ComplexMatrix& weight = config.observation_weight;
    const Eigen::Index m = phi0.size();
    std::vector<ComplexVector> residuals;
    residuals.reserve(ops.size());
    for (std::size_t n = 0; n < ops.size(); ++n) {
        detail::require_same(ops[n].cols(), m, "full_tikhonov: operator columns");
        detail::require_same(ops[n].rows(), weight.rows(), "full_tikhonov: operator rows");
        detail::require_same(data[n].size(), ops[n].rows(), "full_tikhonov: data length");
        residuals.push_back(data[n] - ops[n] * phi0);
    }

    const ComplexMatrix stacked = vstack(ops);
    const ComplexVector residual = vstack(std::span<const ComplexVector>(residuals));

    // Rbar^{-1} applied block by block.
    ComplexMatrix weighted_ops(stacked.rows(), m);
    ComplexVector weighted_residual(stacked.rows());
    const Eigen::Index block = weight.rows();
    for (Eigen::Index offset = 0; offset < stacked.rows(); offset += block) {
        weighted_ops.middleRows(offset, block) = hermitian_solve(weight, ComplexMatrix(stacked.middleRows(offset, block)));
        weighted_residual.segment(offset, block) = hermitian_solve(weight, ComplexVector(residual.segment(offset, block)));
    }

    ComplexMatrix normal = hermitian_part(stacked.adjoint() * weighted_ops);
    normal.diagonal().array() += config.alpha;
    const ComplexVector rhs = stacked.adjoint() * weighted_residual;
    return phi0 + hermitian_solve(normal, rhs);
}

inline KalmanState kf_init(const ComplexVector& phi0, double alpha) {
    detail::require_alpha(alpha);
    const Eigen::Index m = phi0.size();
    return {phi0, ComplexMatrix::Identity(m, m) * Complex(1.0 / alpha, 0.0), 0};
}

/// K = B A^H (R + A B A^H)^{-1}, via a Hermitian solve with the J x J
/// innovation matrix: K^H = (R + A B A^H)^{-1} A B^H.
inline ComplexMatrix kf_gain(const ComplexMatrix& covariance, const ComplexMatrix& a, const ComplexMatrix& weight) {
    detail::require_same(covariance.rows(), covariance.cols(), "kf_gain: covariance columns");
    detail::require_same(a.cols(), covariance.rows(), "kf_gain: operator columns");
    detail::require_same(weight.rows(), a.rows(), "kf_gain: weight rows");
    detail::require_same(weight.cols(), a.rows(), "kf_gain: weight columns");
    if (hermitian_deviation(covariance) > kHermitianTolerance) {
        throw Error(ErrorCode::NotHermitian, "kf_gain: covariance is not Hermitian");
    }
    const ComplexMatrix ab = a * covariance.adjoint();
    // A B A^H is Hermitian for Hermitian B; only its roundoff asymmetry is dropped.
    const ComplexMatrix innovation = weight + hermitian_part(ab * a.adjoint());
    return hermitian_solve(innovation, ab).adjoint();
}

inline KalmanState kf_update(const KalmanState& state, const ComplexMatrix& a, const ComplexVector& f,
                             const ComplexMatrix& weight) {
    const Eigen::Index m = state.phi.size();
    detail::require_same(state.covariance.rows(), m, "kf_update: covariance rows");
    detail::require_same(a.cols(), m, "kf_update: operator columns");
    detail::require_same(f.size(), a.rows(), "kf_update: data length");

    const ComplexMatrix gain = kf_gain(state.covariance, a, weight);
    KalmanState next;
    next.phi = state.phi + gain * (f - a * state.phi);
    // B_n = (I - K A) B_{n-1}
    const ComplexMatrix contracted = state.covariance - gain * (a * state.covariance);
    next.covariance = hermitian_part(contracted);
    next.step = state.step + 1;
    if (!all_finite(next.phi) || !all_finite(next.covariance)) {
        throw Error(ErrorCode::NonFinite, "kf_update: non-finite state at step " + std::to_string(next.step));
    }
    return next;
}

} // namespace bornkf

#endif // BORNKF_ESTIMATORS_HPP
