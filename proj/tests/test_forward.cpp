#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "bornkf/forward.hpp"
#include "test_support.hpp"

using namespace bornkf;

namespace {

// Frozen from tests/oracles/born_oracle.py (mpmath / numpy).
constexpr double kPrefactorK3S3M8 = 0.1007152374253400171662468;
constexpr int kB1Cells = 32;
constexpr int kB2Cells = 52;
constexpr double kOversampleDiscrepancyB1K3 = 0.07015188737598041;

const Grid kStandardGrid(3.0, 8);
const DirectionSet kStandardDirs(30, 30);

} // namespace

TEST(Grid, CentersAndFlattening) {
    const Grid g = kStandardGrid;
    EXPECT_EQ(g.cell_count(), 256);
    const double extreme = 3.0 - 3.0 / 16.0;
    double lo = 0.0, hi = 0.0;
    std::set<Eigen::Index> seen;
    for (int i = -8; i <= 7; ++i) {
        for (int l = -8; l <= 7; ++l) {
            const Eigen::Index p = g.index(i, l);
            EXPECT_TRUE(seen.insert(p).second);
            EXPECT_EQ(g.cell(p), std::make_pair(i, l));
            const Point c = g.center(i, l);
            EXPECT_LT(std::abs(c.x), 3.0);
            EXPECT_LT(std::abs(c.y), 3.0);
            lo = std::min({lo, c.x, c.y});
            hi = std::max({hi, c.x, c.y});
        }
    }
    EXPECT_EQ(*seen.begin(), 0);
    EXPECT_EQ(*seen.rbegin(), 255);
    EXPECT_EQ(hi, extreme);
    EXPECT_EQ(lo, -extreme);
}

TEST(DirectionSet, UnitVectorsAndIndexing) {
    for (int j = 1; j <= 30; ++j) {
        const Point x = kStandardDirs.observation(j);
        EXPECT_NEAR(std::hypot(x.x, x.y), 1.0, 1e-14);
    }
    const Point last = kStandardDirs.incident(30);
    EXPECT_EQ(last.x, 1.0);
    EXPECT_NEAR(last.y, 0.0, 1e-15);
    EXPECT_THROW(kStandardDirs.incident(0), Error);
    EXPECT_THROW(kStandardDirs.incident(31), Error);
}

TEST(AssembleOperator, PrefactorMatchesHighPrecisionValue) {
    EXPECT_NEAR(operator_prefactor(3.0, kStandardGrid), kPrefactorK3S3M8, 1e-16);
    EXPECT_NEAR(operator_prefactor(3.0, kStandardGrid), 81.0 / (256.0 * std::numbers::pi), 1e-16);
}

TEST(AssembleOperator, ShapeModulusAndZeroPhase) {
    const double k = 3.0;
    const double scale = operator_prefactor(k, kStandardGrid);
    for (int n : {1, 7, 30}) {
        const ComplexMatrix a = assemble_operator(kStandardGrid, kStandardDirs, n, k);
        ASSERT_EQ(a.rows(), 30);
        ASSERT_EQ(a.cols(), 256);
        EXPECT_NEAR((a.cwiseAbs().array() - scale).abs().maxCoeff(), 0.0, 1e-15);
        // J = N, so theta_n coincides with xhat_n: zero phase on that row.
        for (Eigen::Index p = 0; p < a.cols(); ++p) {
            EXPECT_EQ(a(n - 1, p), Complex(scale, 0.0));
        }
    }
}

TEST(AssembleOperator, EntryFormula) {
    const ComplexMatrix a = assemble_operator(kStandardGrid, kStandardDirs, 4, 5.0);
    const double scale = 25.0 * 9.0 / (4.0 * std::numbers::pi * 64.0);
    for (int j : {1, 13, 30}) {
        for (int i : {-8, 0, 7}) {
            for (int l : {-8, 3, 7}) {
                const double y1 = (2 * i + 1) * 3.0 / 16.0, y2 = (2 * l + 1) * 3.0 / 16.0;
                const double t = 2 * std::numbers::pi * 4 / 30, x = 2 * std::numbers::pi * j / 30;
                const double phase = 5.0 * ((std::cos(t) - std::cos(x)) * y1 + (std::sin(t) - std::sin(x)) * y2);
                const Complex want = scale * std::exp(Complex(0.0, phase));
                EXPECT_NEAR(std::abs(a(j - 1, kStandardGrid.index(i, l)) - want), 0.0, 1e-14);
            }
        }
    }
}

TEST(AssembleOperator, RejectsNonPositiveWavenumber) {
    for (double k : {0.0, -1.0, std::nan("")}) {
        try {
            assemble_operator(kStandardGrid, kStandardDirs, 1, k);
            ADD_FAILURE() << "k=" << k;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidWavenumber);
        }
    }
}

TEST(BornKernel, Reciprocity) {
    bornkf::testing::Random rng(20);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = rng.uniform(0, 2 * std::numbers::pi), b = rng.uniform(0, 2 * std::numbers::pi);
        const Point theta{std::cos(a), std::sin(a)}, xhat{std::cos(b), std::sin(b)};
        const Point y{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const double k = rng.uniform(0.1, 6);
        const Complex forward = born_kernel(k, theta, xhat, y);
        const Complex swapped = born_kernel(k, xhat, theta, y);
        EXPECT_NEAR(std::abs(forward - std::conj(swapped)), 0.0, 1e-14);
    }
}

TEST(AssembleOperator, InvariantUnderQuarterTurns) {
    // J = N = 8: a quarter turn maps direction index d to d + 2 and the cell
    // (i, l) to (-l-1, i).
    const Grid g(3.0, 4);
    const DirectionSet d(8, 8);
    const double k = 2.5;
    for (int n = 1; n <= 8; ++n) {
        const ComplexMatrix a = assemble_operator(g, d, n, k);
        const ComplexMatrix b = assemble_operator(g, d, (n + 1) % 8 + 1, k);
        for (int j = 1; j <= 8; ++j) {
            const int jr = (j + 1) % 8 + 1;
            for (int i = -4; i < 4; ++i)
                for (int l = -4; l < 4; ++l)
                    EXPECT_NEAR(std::abs(a(j - 1, g.index(i, l)) - b(jr - 1, g.index(-l - 1, i))), 0.0, 1e-13);
        }
    }
}

TEST(Rasterize, PointInSetExamples) {
    const ComplexVector q = rasterize(kStandardGrid, Scatterer::disk_b1());
    // (0.1875, 0.1875) is cell (0, 0); (2.8125, 2.8125) is cell (7, 7).
    EXPECT_EQ(q(kStandardGrid.index(0, 0)), Complex(1.0, 0.0));
    EXPECT_EQ(q(kStandardGrid.index(7, 7)), Complex(0.0, 0.0));
}

TEST(Rasterize, InteriorCountsMatchBruteForceScan) {
    int b1 = 0, b2 = 0;
    for (int i = -8; i < 8; ++i) {
        for (int l = -8; l < 8; ++l) {
            const double x = (2 * i + 1) * 0.1875, y = (2 * l + 1) * 0.1875;
            b1 += (x * x + y * y < 1.5);
            b2 += ((x + 1.5) * (x + 1.5) + (y + 1.5) * (y + 1.5) < 1.0) || (1 < x && x < 2 && -2 < y && y < 2) ||
                  (-2 < x && x < 2 && -2 < y && y < -1);
        }
    }
    EXPECT_EQ(b1, kB1Cells);
    EXPECT_EQ(b2, kB2Cells);
    EXPECT_EQ(rasterize(kStandardGrid, Scatterer::disk_b1()).cwiseAbs().sum(), kB1Cells);
    EXPECT_EQ(rasterize(kStandardGrid, Scatterer::composite_b2()).cwiseAbs().sum(), kB2Cells);
}

TEST(Rasterize, ValueAndCustomIndicator) {
    Scatterer half{{Indicator([](Point p) { return p.x > 0.0; })}, Complex(0.5, -2.0)};
    const ComplexVector q = rasterize(kStandardGrid, half);
    for (Eigen::Index p = 0; p < q.size(); ++p) {
        EXPECT_EQ(q(p), kStandardGrid.center(p).x > 0 ? Complex(0.5, -2.0) : Complex(0.0, 0.0));
    }
}

TEST(SampleNoise, ZeroSigmaGivesZeros) {
    EXPECT_EQ(sample_noise(30, {0.0, 7}).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleNoise, DeterministicPerSeedAndSubstream) {
    const NoiseModel m{0.3, 42};
    EXPECT_EQ(sample_noise(50, m, 3), sample_noise(50, m, 3));
    EXPECT_NE(sample_noise(50, m, 3), sample_noise(50, m, 4));
    EXPECT_NE(sample_noise(50, m, 3), sample_noise(50, {0.3, 43}, 3));
    // Shorter requests are prefixes of longer ones.
    EXPECT_EQ(sample_noise(10, m, 1), ComplexVector(sample_noise(50, m, 1).head(10)));
}

TEST(SampleNoise, RejectsNegativeSigma) {
    EXPECT_THROW(sample_noise(3, {-1.0, 0}), Error);
}

TEST(SampleNoise, CircularGaussianMoments) {
    constexpr int kSamples = 100000;
    const double sigma = 0.5;
    const ComplexVector eps = sample_noise(kSamples, {sigma, 2024});
    // Monte-Carlo standard errors estimated from the samples themselves.
    auto mean_and_se = [](const Eigen::VectorXd& v) {
        const double mean = v.mean();
        const double var = (v.array() - mean).square().sum() / (v.size() - 1);
        return std::make_pair(mean, std::sqrt(var / v.size()));
    };
    const Eigen::VectorXd re = eps.real(), im = eps.imag();
    for (const Eigen::VectorXd& part : {re, im}) {
        const auto [m, se] = mean_and_se(part);
        EXPECT_LE(std::abs(m), 3 * se);
        const auto [var, var_se] = mean_and_se(part.array().square().matrix());
        EXPECT_LE(std::abs(var - sigma * sigma), 3 * var_se);
    }
    const ComplexVector sq = eps.array().square();
    const auto [sr, sr_se] = mean_and_se(sq.real());
    const auto [si, si_se] = mean_and_se(sq.imag());
    EXPECT_LE(std::abs(sr), 3 * sr_se);
    EXPECT_LE(std::abs(si), 3 * si_se);
}

TEST(Synthesize, ZeroTruthNoNoise) {
    const ComplexVector u = synthesize(kStandardGrid, kStandardDirs, 5, 3.0, ComplexVector::Zero(256), {0.0, 1});
    EXPECT_EQ(u, ComplexVector::Zero(30));
}

TEST(Synthesize, OversampleOneIsOperatorTimesTruth) {
    const ComplexVector truth = rasterize(kStandardGrid, Scatterer::composite_b2());
    for (int n : {1, 12, 30}) {
        const ComplexVector want = assemble_operator(kStandardGrid, kStandardDirs, n, 3.0) * truth;
        EXPECT_EQ(synthesize(kStandardGrid, kStandardDirs, n, 3.0, truth, {0.0, 1}), want);
        EXPECT_EQ(synthesize(kStandardGrid, kStandardDirs, n, 3.0, Scatterer::composite_b2(), {0.0, 1}, 1), want);
    }
}

TEST(Synthesize, AddsIncidentIndexedNoiseStream) {
    const ComplexVector truth = rasterize(kStandardGrid, Scatterer::disk_b1());
    const NoiseModel model{0.1, 99};
    const ComplexVector clean = assemble_operator(kStandardGrid, kStandardDirs, 6, 3.0) * truth;
    const ComplexVector noisy = synthesize(kStandardGrid, kStandardDirs, 6, 3.0, truth, model);
    EXPECT_LE((noisy - clean - sample_noise(30, model, 6)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Synthesize, RejectsWrongTruthLength) {
    try {
        synthesize(kStandardGrid, kStandardDirs, 1, 3.0, ComplexVector::Zero(255), {0.0, 1});
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
    EXPECT_THROW(synthesize(kStandardGrid, kStandardDirs, 1, 3.0, Scatterer::disk_b1(), {0.0, 1}, 0), Error);
}

TEST(Synthesize, RefinedQuadratureDiscrepancy) {
    ComplexVector coarse(30 * 30), fine(30 * 30);
    for (int n = 1; n <= 30; ++n) {
        coarse.segment(30 * (n - 1), 30) = synthesize(kStandardGrid, kStandardDirs, n, 3.0, Scatterer::disk_b1(), {0.0, 1}, 1);
        fine.segment(30 * (n - 1), 30) = synthesize(kStandardGrid, kStandardDirs, n, 3.0, Scatterer::disk_b1(), {0.0, 1}, 4);
    }
    const double discrepancy = (fine - coarse).norm() / coarse.norm();
    EXPECT_NEAR(discrepancy, kOversampleDiscrepancyB1K3, 1e-10);
}

TEST(StandardConfiguration, MoreMeasurementsThanUnknowns) {
    EXPECT_GT(kStandardDirs.observation_count() * kStandardDirs.incident_count(), kStandardGrid.cell_count());
}
