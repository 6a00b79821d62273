// test_analytic_models.cpp — Closed forms, least-squares fits, superradiant reference curves

#include <gtest/gtest.h>

#include <random>

#include "coopem/analytic_models.hpp"

using namespace coopem;
using namespace coopem::analytic;

namespace {

constexpr double kGamma = 1.0 / 1760.0;

dyn::G2Curve synthetic(const std::function<double(double)>& f, double noise = 0.0, unsigned seed = 1) {
    dyn::G2Curve c;
    c.scenario.lindblad.gamma = kGamma;
    c.scenario.lindblad.gamma_p = kGamma;
    std::mt19937 g(seed);
    std::normal_distribution<double> n(0.0, noise > 0 ? noise : 1.0);
    for (double t = 0.0; t <= 6000.0; t += 25.0) {
        c.tau.push_back(t);
        c.g2.push_back(f(t) + (noise > 0 ? n(g) : 0.0));
    }
    return c;
}

}  // namespace

TEST(ClosedForms, PpdLimitsAndSymmetry) {
    EXPECT_DOUBLE_EQ(g2_ppd(0.0, kGamma, kGamma, 1e-3), 1.0);
    EXPECT_DOUBLE_EQ(g2_ppd(300.0, kGamma, kGamma, 0.0), 1.0);
    EXPECT_NEAR(g2_ppd(1e6, kGamma, kGamma, 1e-3), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(g2_ppd(-40.0, kGamma, kGamma, 1e-3), g2_ppd(40.0, kGamma, kGamma, 1e-3));
    // infinite dephasing: 1 - exp(-2 gamma tau)/2
    EXPECT_NEAR(g2_ppd(500.0, kGamma, kGamma, 1e6), 1.0 - 0.5 * std::exp(-2.0 * kGamma * 500.0), 1e-14);
    EXPECT_THROW(g2_ppd(1.0, kGamma, 2.0 * kGamma, 0.0), DomainError);
}

TEST(ClosedForms, InitialDrop) {
    EXPECT_DOUBLE_EQ(g2_initial_drop(0.0, 0.2, kGamma, kGamma), 0.8);
    EXPECT_THROW(g2_initial_drop(0.0, 1.5, kGamma, kGamma), InvalidArgument);
}

class PpdFitRecovery : public ::testing::TestWithParam<double> {};

TEST_P(PpdFitRecovery, RecoversDephasingRate) {
    const double gd = 1.0 / GetParam();
    const auto c = synthetic([&](double t) { return g2_ppd(t, kGamma, kGamma, gd); });
    const auto r = fit_model(c, FitModel::PpdModel, {0.0, 6000.0});
    EXPECT_NEAR(r.params.at("gamma_d") / gd, 1.0, 1e-6);
    EXPECT_LT(r.rms, 1e-10);
    EXPECT_EQ(r.samples, c.tau.size());
}

INSTANTIATE_TEST_SUITE_P(Lifetimes, PpdFitRecovery, ::testing::Values(199.0, 221.0, 1000.0, 3900.0, 20000.0));

TEST(Fits, InitialDropRecoversAmplitudeUnderNoise) {
    const auto c = synthetic([](double t) { return g2_initial_drop(t, 0.0854, kGamma, kGamma); }, 1e-4, 3);
    const auto r = fit_model(c, FitModel::InitialDropModel, {1.0, 6000.0});
    EXPECT_NEAR(r.params.at("a"), 0.0854, 2e-3);
    EXPECT_NEAR(r.rms, 1e-4, 3e-5);
    ASSERT_EQ(r.covariance_diag.size(), 1u);
    EXPECT_GT(r.covariance_diag[0], 0.0);
    EXPECT_NE(r.to_text().find("model=InitialDropModel"), std::string::npos);
}

TEST(Fits, FittedCurveEvaluatesModel) {
    const auto c = synthetic([](double t) { return g2_ppd(t, kGamma, kGamma, 1e-3); });
    const auto r = fit_model(c, FitModel::PpdModel, {0.0, 6000.0});
    const auto f = fitted_curve(c, r);
    for (std::size_t i = 0; i < c.tau.size(); ++i) EXPECT_NEAR(f.g2[i], c.g2[i], 1e-9);
}

TEST(Fits, Errors) {
    const auto c = synthetic([](double) { return 1.0; });
    EXPECT_THROW(fit_model(c, FitModel::PpdModel, {0.0, 100.0}), InvalidArgument);
    auto bad = c;
    bad.scenario.lindblad.gamma_p = 2.0 * kGamma;
    EXPECT_THROW(fit_model(bad, FitModel::PpdModel, {0.0, 6000.0}), DomainError);
}

TEST(Superradiant, PumpRatioOrdersZeroDelayValue) {
    auto g0 = [](double ratio, double gd) {
        core::LindbladSpec s{kGamma, ratio * kGamma, gd, core::DecayMode::Superradiant};
        return superradiant_g2_lindblad(s, {0.0}).g2[0];
    };
    EXPECT_GT(g0(0.1, 0.0), 1.0);
    EXPECT_NEAR(g0(1.0, 0.0), 1.0, 1e-6);
    EXPECT_LT(g0(10.0, 0.0), 1.0);
    for (double r : {0.1, 1.0, 10.0}) {
        const double a = g0(r, 0.0), b = g0(r, 1.0 / 199.0);
        if (std::abs(a - 1.0) > 1e-6) EXPECT_LT(std::abs(b - 1.0), std::abs(a - 1.0)) << "ratio " << r;
    }
    EXPECT_THROW(superradiant_g2_lindblad({kGamma, kGamma, 0.0, core::DecayMode::Independent}, {0.0}), InvalidArgument);
}
