// test_dynamics.cpp — Engines, settle, g2 and coherence pipelines, grids, CSV

#include <gtest/gtest.h>

#include <filesystem>

#include "coopem/analytic_models.hpp"
#include "coopem/dynamics.hpp"

using namespace coopem;
using namespace coopem::dyn;

namespace {

constexpr double kGamma = 1.0 / 1760.0;  // ps^-1

Scenario markov(Geometry g, double ratio) {
    Scenario sc;
    sc.geometry = g;
    sc.lindblad.gamma = kGamma;
    sc.lindblad.gamma_p = ratio * kGamma;
    sc.lindblad.decay_mode = g == Geometry::Superradiant ? core::DecayMode::Superradiant : core::DecayMode::Independent;
    sc.grids.dt = 1.0;
    sc.grids.tau_max = 6000.0;
    sc.grids.coarse_points = 120;
    return sc;
}

// Coarse phonon numerics, shared cache across test binaries
Scenario with_phonons(Scenario sc, double dt = 0.25) {
    sc.phonons = bath::SpectralDensity::inGaAs_deformation(4.0);
    sc.grids.dt = dt;
    sc.numerics.t_mem = 4.0;
    sc.numerics.svd_threshold = 1e-7;
    sc.numerics.jump_prior = 0.01;
    sc.numerics.cache_dir = COOPEM_TEST_CACHE;
    return sc;
}

}  // namespace

struct MarkovCase {
    Geometry geometry;
    double ratio;
};

class MarkovCrossValidation : public ::testing::TestWithParam<MarkovCase> {};

TEST_P(MarkovCrossValidation, PipelineEqualsRegression) {
    const auto c = GetParam();
    Scenario sc = markov(c.geometry, c.ratio);
    // window spans the slowest relaxation so g2 returns to 1
    sc.grids.tau_max = 15.0 / std::min(sc.lindblad.gamma, sc.lindblad.gamma_p);
    const G2Curve a = g2_curve(sc);
    const G2Curve b = g2_regression(sc, a.tau);
    ASSERT_EQ(a.tau.size(), b.tau.size());
    double err = 0.0;
    for (std::size_t i = 0; i < a.tau.size(); ++i) err = std::max(err, std::abs(a.g2[i] - b.g2[i]));
    EXPECT_LT(err, 1e-8);
    EXPECT_NEAR(a.I0, b.I0, 1e-12);
    EXPECT_NEAR(a.g2.back(), 1.0, 1e-3);
    EXPECT_LT(a.numerics.stationarity_residual, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(GeometriesAndPumps, MarkovCrossValidation,
                         ::testing::Values(MarkovCase{Geometry::MeasurementInduced, 0.1}, MarkovCase{Geometry::MeasurementInduced, 1.0},
                                           MarkovCase{Geometry::MeasurementInduced, 10.0}, MarkovCase{Geometry::Superradiant, 0.1},
                                           MarkovCase{Geometry::Superradiant, 1.0}, MarkovCase{Geometry::Superradiant, 10.0}));

TEST(PpdExactness, LindbladMatchesClosedForm) {
    Scenario sc = markov(Geometry::MeasurementInduced, 1.0);
    sc.ppd_extra = 1.0 / 3900.0;
    const G2Curve c = g2_curve(sc);
    double err = 0.0;
    for (std::size_t i = 0; i < c.tau.size(); ++i)
        err = std::max(err, std::abs(c.g2[i] - analytic::g2_ppd(c.tau[i], kGamma, kGamma, sc.ppd_extra)));
    EXPECT_LT(err, 1e-8);
}

TEST(Engines, JointAndProductAgreeWithoutPhonons) {
    Scenario sc = markov(Geometry::MeasurementInduced, 2.0);
    sc.lindblad.gamma_d = 1e-3;
    sc.grids.tau_max = 500.0;
    sc.numerics.engine = EngineKind::Joint;
    const G2Curve a = g2_curve(sc);
    sc.numerics.engine = EngineKind::Product;
    const G2Curve b = g2_curve(sc);
    for (std::size_t i = 0; i < a.tau.size(); ++i) EXPECT_NEAR(a.g2[i], b.g2[i], 1e-12);
    EXPECT_EQ(a.numerics.engine, "joint");
    EXPECT_EQ(b.numerics.engine, "product");
}

TEST(Engines, ProductRejectsCollectiveDecay) {
    Scenario sc = markov(Geometry::Superradiant, 1.0);
    sc.numerics.engine = EngineKind::Product;
    EXPECT_THROW(g2_curve(sc), InvalidArgument);
}

TEST(Engines, JointAndProductAgreeWithPhonons) {
    Scenario sc = with_phonons(markov(Geometry::MeasurementInduced, 1.0), 0.5);
    sc.lindblad.gamma = sc.lindblad.gamma_p = 0.02;
    sc.grids.tau_max = 20.0;
    const core::DensityMatrix rho0 = core::DensityMatrix::pure(core::ops::psi_S());
    sc.numerics.engine = EngineKind::Joint;
    const auto a = coherence_trajectory(sc, rho0, 10.0);
    sc.numerics.engine = EngineKind::Product;
    const auto b = coherence_trajectory(sc, rho0, 10.0);
    ASSERT_EQ(a.c.size(), b.c.size());
    for (std::size_t i = 0; i < a.c.size(); ++i) EXPECT_LT(std::abs(a.c[i] - b.c[i]), 1e-12);
}

TEST(Coherence, TwoProcessTensorsReproduceDoubledIbm) {
    Scenario sc = with_phonons(Scenario{}, 0.25);
    const core::DensityMatrix rho0 = core::DensityMatrix::pure(core::ops::psi_S());
    const auto c = coherence_trajectory(sc, rho0, 20.0);
    const auto ibm = bath::ibm_decoherence(*sc.phonons, true, c.t);
    double err = 0.0;
    for (std::size_t i = 0; i < c.t.size(); ++i) err = std::max(err, std::abs(std::abs(c.c[i] / c.c[0]) - std::abs(ibm.values[i])));
    EXPECT_LT(err, 1e-4);
    const double plateau = std::abs(c.c.back() / c.c[0]);
    EXPECT_GT(plateau, 0.0);
    EXPECT_LT(plateau, 1.0);
    EXPECT_NEAR(plateau, bath::ibm_plateau(*sc.phonons, true), 1e-3);
    EXPECT_LT(c.numerics.trace_drift, 1e-6);
}

TEST(Coherence, CompositeGridSampling) {
    Scenario sc;
    sc.lindblad.gamma_d = 1e-3;
    sc.grids.dt = 1.0;
    sc.grids.tau_fine = 10.0;
    sc.grids.tau_max = 1000.0;
    sc.grids.coarse_points = 30;
    const auto c = coherence_curve(sc, core::DensityMatrix::pure(core::ops::psi_S()));
    EXPECT_EQ(c.t.size(), tau_steps(sc.grids, 1.0).size());
    for (std::size_t i = 0; i < c.t.size(); ++i) EXPECT_NEAR(std::abs(c.c[i]), 0.5 * std::exp(-1e-3 * c.t[i]), 1e-12);
}

TEST(Cache, WarmAndColdProcessTensorsIdentical) {
    namespace fs = std::filesystem;
    Scenario sc = with_phonons(Scenario{}, 0.5);
    sc.numerics.cache_dir = (fs::temp_directory_path() / "coopem_warm_cold").string();
    fs::remove_all(sc.numerics.cache_dir);
    const auto cold = detail::make_pt_uncached(*sc.phonons, 0.5, sc.numerics);
    const auto warm = detail::make_pt_uncached(*sc.phonons, 0.5, sc.numerics);
    ASSERT_EQ(cold.pt->bond(), warm.pt->bond());
    for (int a = 0; a < 4; ++a) EXPECT_LE((cold.pt->Q[a] - warm.pt->Q[a]).cwiseAbs().maxCoeff(), 1e-12);
    fs::remove_all(sc.numerics.cache_dir);
}

TEST(Cache, InProcessMemoSharesTensor) {
    Scenario sc = with_phonons(Scenario{}, 0.5);
    const auto a = make_pt(*sc.phonons, 0.5, sc.numerics);
    const auto b = make_pt(*sc.phonons, 0.5, sc.numerics);
    EXPECT_EQ(a.pt.get(), b.pt.get());
}

TEST(PhononG2, StationaryAndNormalized) {
    Scenario sc = with_phonons(markov(Geometry::MeasurementInduced, 1.0), 0.5);
    sc.lindblad.gamma = sc.lindblad.gamma_p = 0.01;
    sc.grids.tau_max = 600.0;
    sc.grids.coarse_points = 40;
    const G2Curve c = g2_curve(sc);
    EXPECT_LT(c.numerics.stationarity_residual, 1e-9);
    EXPECT_GT(c.numerics.bond, 1u);
    EXPECT_NEAR(c.g2.front(), 1.0, 1e-2);
    EXPECT_NEAR(c.g2.back(), 1.0, 1e-2);
    // polaron dressing produces a drop below one at short delays
    double lo = 1.0;
    for (std::size_t i = 0; i < c.tau.size() && c.tau[i] < 10.0; ++i) lo = std::min(lo, c.g2[i]);
    EXPECT_LT(lo, 0.99);
}

TEST(Grids, CompositeGridProperties) {
    Grids g;
    g.tau_fine = 5.0;
    g.tau_max = 3000.0;
    g.coarse_points = 50;
    g.max_spacing = 20.0;
    const auto s = tau_steps(g, 0.1);
    ASSERT_FALSE(s.empty());
    EXPECT_EQ(s.front(), 0u);
    EXPECT_EQ(s.back(), 30000u);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        EXPECT_LT(s[i], s[i + 1]);
        EXPECT_LE((s[i + 1] - s[i]) * 0.1, 20.0 + 0.1 + 1e-9);
    }
    g.tau_explicit = {0.0, 0.3, 1.25};
    EXPECT_THROW(tau_steps(g, 0.1), GridMismatch);
}

TEST(Scenario, ValidationAndIntensityErrors) {
    Scenario sc = markov(Geometry::Superradiant, 1.0);
    sc.lindblad.decay_mode = core::DecayMode::Independent;
    EXPECT_THROW(g2_curve(sc), InvalidArgument);
    Scenario dark = markov(Geometry::MeasurementInduced, 0.0);
    EXPECT_THROW(g2_curve(dark), ZeroIntensity);
    EXPECT_THROW(g2_regression(with_phonons(markov(Geometry::MeasurementInduced, 1.0)), {0.0}), InvalidArgument);
}

TEST(Csv, FingerprintDeterministicAndReadable) {
    namespace fs = std::filesystem;
    const Scenario sc = markov(Geometry::MeasurementInduced, 1.0);
    const auto c = g2_regression(sc, {0.0, 10.0, 100.0});
    const std::string a = csv::g2_text(c), b = csv::g2_text(c);
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("# fingerprint="), std::string::npos);
    const fs::path f = fs::temp_directory_path() / "coopem_csv_test.csv";
    csv::write_text(f, a);
    const auto t = csv::read_two_column(f);
    ASSERT_EQ(t.x.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(t.y[i], c.g2[i]);
    fs::remove(f);
}
