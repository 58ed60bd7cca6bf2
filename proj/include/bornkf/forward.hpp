#ifndef BORNKF_FORWARD_HPP
#define BORNKF_FORWARD_HPP

// Discretized Born far-field model on the square [-S, S]^2.
//
// The square is split into (2M)^2 cells of side S/M with centers
//   y_{i,l} = ((2i+1) S / (2M), (2l+1) S / (2M)),   -M <= i, l <= M-1,
// flattened as p = (i+M)(2M) + (l+M). Directions on the unit circle are
//   xhat_j  = (cos 2 pi j / J, sin 2 pi j / J),  j = 1..J  (observation)
//   theta_n = (cos 2 pi n / N, sin 2 pi n / N),  n = 1..N  (incidence)
// and the operator for incidence n is
//   F_n(j, p) = k^2 S^2 / (4 pi M^2) * exp(i k (theta_n - xhat_j) . y_p).

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bornkf/densela.hpp"

namespace bornkf {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

class Grid {
public:
    Grid(double half_width, int subdivisions) : half_width_(half_width), subdivisions_(subdivisions) {
        if (!(half_width > 0.0) || !std::isfinite(half_width)) {
            throw Error(ErrorCode::InvalidArgument, "Grid: half width must be positive");
        }
        if (subdivisions < 1) {
            throw Error(ErrorCode::InvalidArgument, "Grid: subdivisions must be >= 1");
        }
    }

    double half_width() const { return half_width_; }
    int subdivisions() const { return subdivisions_; }
    int side() const { return 2 * subdivisions_; }
    Eigen::Index cell_count() const { return Eigen::Index(side()) * side(); }
    double cell_width() const { return half_width_ / subdivisions_; }

    /// i, l in [-M, M-1]
    Eigen::Index index(int i, int l) const {
        return Eigen::Index(i + subdivisions_) * side() + (l + subdivisions_);
    }
    std::pair<int, int> cell(Eigen::Index p) const {
        return {static_cast<int>(p / side()) - subdivisions_, static_cast<int>(p % side()) - subdivisions_};
    }
    Point center(int i, int l) const {
        const double h = half_width_ / (2.0 * subdivisions_);
        return {(2 * i + 1) * h, (2 * l + 1) * h};
    }
    Point center(Eigen::Index p) const {
        const auto [i, l] = cell(p);
        return center(i, l);
    }

private:
    double half_width_;
    int subdivisions_;
};

class DirectionSet {
public:
    DirectionSet(int observations, int incidences) : observations_(observations), incidences_(incidences) {
        if (observations < 1 || incidences < 1) {
            throw Error(ErrorCode::InvalidArgument, "DirectionSet: counts must be >= 1");
        }
    }

    int observation_count() const { return observations_; }
    int incident_count() const { return incidences_; }

    /// j = 1..J
    Point observation(int j) const { return on_circle(j, observations_); }
    /// n = 1..N
    Point incident(int n) const {
        if (n < 1 || n > incidences_) {
            throw Error(ErrorCode::InvalidArgument,
                        "incident index " + std::to_string(n) + " outside 1.." + std::to_string(incidences_));
        }
        return on_circle(n, incidences_);
    }

private:
    static Point on_circle(int idx, int count) {
        const double angle = 2.0 * std::numbers::pi * (static_cast<double>(idx) / count);
        return {std::cos(angle), std::sin(angle)};
    }

    int observations_;
    int incidences_;
};

/// Open disk (x - cx)^2 + (y - cy)^2 < radius_squared.
struct Disk {
    Point center;
    double radius_squared = 0.0;
};

/// Open rectangle x_min < x < x_max, y_min < y < y_max.
struct Box {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
};

using Indicator = std::function<bool(Point)>;
using Shape = std::variant<Disk, Box, Indicator>;

inline bool contains(const Shape& shape, Point p) {
    struct Visitor {
        Point p;
        bool operator()(const Disk& d) const {
            const double dx = p.x - d.center.x;
            const double dy = p.y - d.center.y;
            return dx * dx + dy * dy < d.radius_squared;
        }
        bool operator()(const Box& b) const {
            return b.x_min < p.x && p.x < b.x_max && b.y_min < p.y && p.y < b.y_max;
        }
        bool operator()(const Indicator& f) const { return f(p); }
    };
    return std::visit(Visitor{p}, shape);
}

/// Piecewise-constant contrast: `value` on the union of `parts`, zero elsewhere.
struct Scatterer {
    std::vector<Shape> parts;
    Complex value{1.0, 0.0};

    bool contains(Point p) const {
        for (const auto& s : parts) {
            if (bornkf::contains(s, p)) return true;
        }
        return false;
    }

    /// x1^2 + x2^2 < 1.5
    static Scatterer disk_b1(Complex value = {1.0, 0.0}) {
        return Scatterer{{Disk{{0.0, 0.0}, 1.5}}, value};
    }

    /// Disk around (-1.5, -1.5) plus a vertical and a horizontal bar.
    static Scatterer composite_b2(Complex value = {1.0, 0.0}) {
        return Scatterer{{Disk{{-1.5, -1.5}, 1.0}, Box{1.0, 2.0, -2.0, 2.0}, Box{-2.0, 2.0, -2.0, -1.0}}, value};
    }
};

struct NoiseModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// exp(i k (theta - xhat) . y)
inline Complex born_kernel(double k, Point theta, Point xhat, Point y) {
    const double phase = k * ((theta.x - xhat.x) * y.x + (theta.y - xhat.y) * y.y);
    return {std::cos(phase), std::sin(phase)};
}

inline double operator_prefactor(double k, const Grid& grid) {
    const double s = grid.half_width();
    const double m = grid.subdivisions();
    return k * k * s * s / (4.0 * std::numbers::pi * m * m);
}

inline ComplexMatrix assemble_operator(const Grid& grid, const DirectionSet& dirs, int n, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw Error(ErrorCode::InvalidWavenumber, "wavenumber must be positive, got " + std::to_string(k));
    }
    const Point theta = dirs.incident(n);
    const double scale = operator_prefactor(k, grid);
    const int rows = dirs.observation_count();
    ComplexMatrix op(rows, grid.cell_count());
    for (int j = 1; j <= rows; ++j) {
        const Point xhat = dirs.observation(j);
        for (Eigen::Index p = 0; p < op.cols(); ++p) {
            op(j - 1, p) = scale * born_kernel(k, theta, xhat, grid.center(p));
        }
    }
    return op;
}

inline ComplexVector rasterize(const Grid& grid, const Scatterer& scatterer) {
    ComplexVector q = ComplexVector::Zero(grid.cell_count());
    for (Eigen::Index p = 0; p < q.size(); ++p) {
        if (scatterer.contains(grid.center(p))) q(p) = scatterer.value;
    }
    return q;
}

// Noise streams: substream s of seed S is a std::mt19937_64 seeded through
// std::seed_seq{lo32(S), hi32(S), lo32(s), hi32(s)}. Both algorithms are fixed
// by the standard, so a (seed, substream) pair names the same draws on every
// platform. Synthesis uses the incident index n as substream.
inline std::mt19937_64 noise_engine(std::uint64_t seed, std::uint64_t substream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)};
    return std::mt19937_64(seq);
}

/// Complex Gaussian noise with independent N(0, sigma^2) real and imaginary
/// parts (total complex variance 2 sigma^2). Box-Muller on 53-bit uniforms;
/// std::normal_distribution is avoided because its output is library-specific.
inline ComplexVector sample_noise(Eigen::Index len, const NoiseModel& model, std::uint64_t substream = 0) {
    if (!(model.sigma >= 0.0) || !std::isfinite(model.sigma)) {
        throw Error(ErrorCode::InvalidArgument, "noise sigma must be finite and >= 0");
    }
    ComplexVector eps = ComplexVector::Zero(len);
    if (model.sigma == 0.0) return eps;
    auto engine = noise_engine(model.seed, substream);
    constexpr double kScale = 0x1.0p-53;
    for (Eigen::Index i = 0; i < len; ++i) {
        const double u1 = (static_cast<double>(engine() >> 11) + 1.0) * kScale; // (0, 1]
        const double u2 = static_cast<double>(engine() >> 11) * kScale;         // [0, 1)
        const double radius = model.sigma * std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        eps(i) = Complex(radius * std::cos(angle), radius * std::sin(angle));
    }
    return eps;
}

/// F_n q + eps_n with the coarse operator and a rasterized truth.
inline ComplexVector synthesize(const Grid& grid, const DirectionSet& dirs, int n, double k,
                                const ComplexVector& truth, const NoiseModel& model) {
    if (truth.size() != grid.cell_count()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "synthesize: truth has " + std::to_string(truth.size()) + " entries, expected " +
                        std::to_string(grid.cell_count()));
    }
    ComplexVector u = assemble_operator(grid, dirs, n, k) * truth;
    u += sample_noise(u.size(), model, static_cast<std::uint64_t>(n));
    return u;
}

/// Born far field of the exact indicator, integrated by the midpoint rule on
/// the grid refined `oversample` times. oversample = 1 reduces to the coarse
/// operator applied to the rasterized scatterer.
inline ComplexVector synthesize(const Grid& grid, const DirectionSet& dirs, int n, double k,
                                const Scatterer& scatterer, const NoiseModel& model, int oversample) {
    if (oversample < 1) {
        throw Error(ErrorCode::InvalidArgument, "oversample must be >= 1");
    }
    if (oversample == 1) {
        return synthesize(grid, dirs, n, k, rasterize(grid, scatterer), model);
    }
    const Grid fine(grid.half_width(), grid.subdivisions() * oversample);
    ComplexVector u = assemble_operator(fine, dirs, n, k) * rasterize(fine, scatterer);
    u += sample_noise(u.size(), model, static_cast<std::uint64_t>(n));
    return u;
}

} // namespace bornkf

#endif // BORNKF_FORWARD_HPP
