// test_postprocess.cpp — Gaussian IRF convolution and curve comparison

#include <gtest/gtest.h>

#include "coopem/analytic_models.hpp"
#include "coopem/postprocess.hpp"

using namespace coopem;
using namespace coopem::post;

namespace {

constexpr double kGamma = 1.0 / 1760.0;

dyn::G2Curve sample(const std::function<double(double)>& f, double tmax = 6000.0, double h = 10.0) {
    dyn::G2Curve c;
    for (double t = 0.0; t <= tmax + 1e-9; t += h) {
        c.tau.push_back(t);
        c.g2.push_back(f(t));
    }
    return c;
}

// Direct two-sided Simpson quadrature of f(|s|) G(t - s)
double reference(const std::function<double(double)>& f, double t, double fwhm) {
    const InstrumentResponse irf{fwhm};
    const double a = t - 8.0 * fwhm, b = t + 8.0 * fwhm;
    const int n = 20000;
    const double h = (b - a) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = a + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * f(std::abs(x)) * irf(t - x);
    }
    return s * h / 3.0;
}

}  // namespace

TEST(Irf, UnitArea) {
    const InstrumentResponse irf{240.0};
    double s = 0.0;
    for (double t = -2000.0; t <= 2000.0; t += 0.5) s += irf(t) * 0.5;
    EXPECT_NEAR(s, 1.0, 1e-10);
    EXPECT_NEAR(irf.sigma() * 2.0 * std::sqrt(2.0 * std::log(2.0)), 240.0, 1e-12);
}

TEST(Convolution, ConstantCurveUnchanged) {
    const auto c = sample([](double) { return 0.7; });
    const auto out = convolve_irf(c, {240.0});
    for (double v : out.g2) EXPECT_NEAR(v, 0.7, 1e-12);
}

TEST(Convolution, PreservesMeanOverWideWindow) {
    auto f = [](double t) { return analytic::g2_ppd(t, kGamma, kGamma, 1.0 / 221.0); };
    const auto c = sample(f, 20000.0, 10.0);
    const auto out = convolve_irf(c, {240.0});
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i + 1 < c.tau.size(); ++i) {
        const double h = c.tau[i + 1] - c.tau[i];
        a += 0.5 * h * (c.g2[i] + c.g2[i + 1]);
        b += 0.5 * h * (out.g2[i] + out.g2[i + 1]);
    }
    // mirrored two-sided mean: mass near tau = 0 folds back symmetrically
    EXPECT_NEAR(a / c.tau.back(), b / c.tau.back(), 1e-6);
}

TEST(Convolution, Linearity) {
    auto f = [](double t) { return analytic::g2_ppd(t, kGamma, kGamma, 1.0 / 199.0); };
    auto g = [](double t) { return std::exp(-t / 300.0); };
    const auto cf = sample(f), cg = sample(g), cs = sample([&](double t) { return f(t) + 2.0 * g(t); });
    const auto of = convolve_irf(cf, {240.0}), og = convolve_irf(cg, {240.0}), os = convolve_irf(cs, {240.0});
    for (std::size_t i = 0; i < os.g2.size(); ++i) EXPECT_NEAR(os.g2[i], of.g2[i] + 2.0 * og.g2[i], 1e-12);
}

TEST(Convolution, MatchesDirectTwoSidedQuadrature) {
    auto f = [](double t) { return analytic::g2_ppd(t, kGamma, kGamma, 1.0 / 221.0); };
    // trapezoid nodes: error ~ h^2 g2''/12, second order in the spacing
    auto max_err = [&](double h) {
        const auto c = sample(f, 6000.0, h);
        const auto out = convolve_irf(c, {240.0});
        double e = 0.0;
        for (double t : {0.0, 100.0, 800.0}) {
            const auto i = static_cast<std::size_t>(std::lround(t / h));
            e = std::max(e, std::abs(out.g2[i] - reference(f, c.tau[i], 240.0)));
        }
        return e;
    };
    const double coarse = max_err(2.0), fine = max_err(1.0);
    EXPECT_LT(fine, 2e-6);
    EXPECT_GT(coarse / fine, 3.0);
    EXPECT_LT(coarse / fine, 5.0);
}

TEST(Convolution, SlowDipSurvivesNarrowNotchWashesOut) {
    // slow PPD dip keeps an interior minimum below g2(0)
    auto slow = [](double t) { return analytic::g2_ppd(t, kGamma, kGamma, 1.0 / 3900.0); };
    const auto a = convolve_irf(sample(slow), {240.0});
    EXPECT_LT(*std::min_element(a.g2.begin() + 1, a.g2.end()), a.g2.front() - 1e-4);
    // a notch a few ps wide is reduced by more than an order of magnitude
    auto notch = [](double t) { return 1.0 - 0.2 * std::exp(-t / 2.0); };
    const auto b = convolve_irf(sample(notch, 6000.0, 1.0), {240.0});
    EXPECT_GT(*std::min_element(b.g2.begin(), b.g2.end()), 1.0 - 0.02);
}

TEST(Convolution, Errors) {
    const auto coarse = sample([](double) { return 1.0; }, 6000.0, 50.0);
    EXPECT_THROW(convolve_irf(coarse, {240.0}), GridTooCoarse);
    EXPECT_THROW(convolve_irf(sample([](double) { return 1.0; }), {0.0}), InvalidArgument);
}

TEST(Compare, MetricsAndDisjointSupport) {
    const auto a = sample([](double t) { return t; }, 100.0, 10.0);
    auto b = sample([](double t) { return t + 0.5; }, 100.0, 5.0);
    const auto m = compare_curves(a, b, {0.0, 100.0});
    EXPECT_NEAR(m.max_abs, 0.5, 1e-12);
    EXPECT_NEAR(m.rms, 0.5, 1e-12);
    EXPECT_EQ(m.samples, 11u);
    EXPECT_THROW(compare_curves(a, b, {200.0, 300.0}), DisjointSupport);
}
