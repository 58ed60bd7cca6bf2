#ifndef BORNKF_EXPERIMENTS_HPP
#define BORNKF_EXPERIMENTS_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bornkf/densela.hpp"
#include "bornkf/estimators.hpp"
#include "bornkf/forward.hpp"

namespace bornkf {

enum class Method { KF, FT, Both };

inline bool runs_kf(Method m) { return m != Method::FT; }
inline bool runs_ft(Method m) { return m != Method::KF; }

struct Scenario {
    std::string name = "scenario";
    Scatterer scatterer = Scatterer::disk_b1();
    double k = 3.0;
    double alpha = 1.0;
    double sigma = 0.0;
    int N = 30;
    int J = 30;
    int M = 8;
    double S = 3.0;
    double r = 1.0;
    Complex phi0{0.0, 0.0}; // constant initial guess
    std::uint64_t seed = 0;
    int oversample = 1;
    Method method = Method::KF;
    std::vector<int> snapshots{4, 20};

    void validate() const {
        if (N < 1 || J < 1 || M < 1 || oversample < 1) {
            throw Error(ErrorCode::InvalidArgument, "scenario '" + name + "': counts must be >= 1");
        }
        if (!(k > 0.0) || !std::isfinite(k)) {
            throw Error(ErrorCode::InvalidWavenumber, "scenario '" + name + "': k must be positive");
        }
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw Error(ErrorCode::InvalidAlpha, "scenario '" + name + "': alpha must be positive");
        }
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
            throw Error(ErrorCode::InvalidArgument, "scenario '" + name + "': sigma must be >= 0");
        }
        if (!(S > 0.0) || !(r > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "scenario '" + name + "': S and r must be positive");
        }
    }
};

/// Per-step record of one scenario. `states`/`mse` follow the Kalman filter
/// when it runs and the prefix Tikhonov solutions otherwise.
struct ReconstructionTrace {
    ComplexVector truth;
    double initial_mse = 0.0; // |q_true - phi0|^2
    std::vector<ComplexVector> states;
    std::vector<double> mse;

    // Filled when the method includes full-data Tikhonov: the solution using
    // the first n measurements, n = 1..N.
    std::vector<ComplexVector> ft_states;
    std::vector<double> ft_mse;
    std::optional<ComplexVector> ft_final;

    // Filled when both methods run.
    std::vector<double> step_gaps;
    std::optional<double> equivalence_gap;
};

/// |truth - estimate|^2, the plain squared norm (no division by the cell count).
inline double mse(const ComplexVector& truth, const ComplexVector& estimate) {
    if (truth.size() != estimate.size()) {
        throw Error(ErrorCode::DimensionMismatch, "mse: vectors differ in length");
    }
    return (truth - estimate).squaredNorm();
}

inline double relative_gap(const ComplexVector& estimate, const ComplexVector& reference) {
    const double denom = reference.norm();
    const double diff = (estimate - reference).norm();
    return denom > 0.0 ? diff / denom : diff;
}

inline ReconstructionTrace run_reconstruction(const Scenario& sc) {
    sc.validate();
    const Grid grid(sc.S, sc.M);
    const DirectionSet dirs(sc.J, sc.N);
    const NoiseModel noise{sc.sigma, sc.seed};
    const auto R = RegularizationConfig::isotropic(sc.alpha, sc.J, sc.r);

    ReconstructionTrace trace;
    trace.truth = rasterize(grid, sc.scatterer);
    const ComplexVector phi0 = ComplexVector::Constant(grid.cell_count(), sc.phi0);
    trace.initial_mse = mse(trace.truth, phi0);

    std::vector<ComplexMatrix> ops;
    std::vector<ComplexVector> data;
    ops.reserve(sc.N);
    data.reserve(sc.N);
    for (int n = 1; n <= sc.N; ++n) {
        ops.push_back(assemble_operator(grid, dirs, n, sc.k));
        data.push_back(synthesize(grid, dirs, n, sc.k, sc.scatterer, noise, sc.oversample));
    }

    auto step_failure = [&](int n, const Error& e) {
        return Error(e.code(), "scenario '" + sc.name + "', step " + std::to_string(n) + ": " + e.what());
    };

    if (runs_kf(sc.method)) {
        KalmanState state = kf_init(phi0, sc.alpha);
        for (int n = 1; n <= sc.N; ++n) {
            try {
                state = kf_update(state, ops[n - 1], data[n - 1], R.observation_weight);
            } catch (const Error& e) {
                throw step_failure(n, e);
            }
            trace.mse.push_back(mse(trace.truth, state.phi));
            trace.states.push_back(state.phi);
        }
    }

    if (runs_ft(sc.method)) {
        for (int n = 1; n <= sc.N; ++n) {
            try {
                trace.ft_states.push_back(full_tikhonov(std::span(ops).first(n), std::span(data).first(n), phi0, R));
            } catch (const Error& e) {
                throw step_failure(n, e);
            }
            trace.ft_mse.push_back(mse(trace.truth, trace.ft_states.back()));
        }
        trace.ft_final = trace.ft_states.back();
        if (!runs_kf(sc.method)) {
            trace.states = trace.ft_states;
            trace.mse = trace.ft_mse;
        }
    }

    if (sc.method == Method::Both) {
        for (int n = 0; n < sc.N; ++n) {
            trace.step_gaps.push_back(relative_gap(trace.states[n], trace.ft_states[n]));
        }
        trace.equivalence_gap = trace.step_gaps.back();
    }
    return trace;
}

/// Stacked operator [F_1; ...; F_N] at wavenumber k.
inline ComplexMatrix stacked_operator(const Grid& grid, const DirectionSet& dirs, double k) {
    std::vector<ComplexMatrix> ops;
    ops.reserve(dirs.incident_count());
    for (int n = 1; n <= dirs.incident_count(); ++n) ops.push_back(assemble_operator(grid, dirs, n, k));
    return vstack(ops);
}

inline std::vector<std::pair<double, std::size_t>> rank_sweep(const std::vector<double>& ks, const Grid& grid,
                                                              const DirectionSet& dirs,
                                                              double rel_tol = kDefaultRankTolerance) {
    if (ks.empty()) {
        throw Error(ErrorCode::InvalidArgument, "rank_sweep: no wavenumbers");
    }
    std::vector<std::pair<double, std::size_t>> out;
    out.reserve(ks.size());
    for (double k : ks) {
        out.emplace_back(k, svd_rank(stacked_operator(grid, dirs, k), rel_tol));
    }
    return out;
}

} // namespace bornkf

#endif // BORNKF_EXPERIMENTS_HPP
