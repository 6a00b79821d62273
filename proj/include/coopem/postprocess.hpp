// postprocess.hpp — Gaussian instrument-response convolution and curve comparison

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "coopem/dynamics.hpp"
#include "coopem/errors.hpp"

namespace coopem::post {

struct InstrumentResponse {
    double fwhm = 240.0;  // ps

    double sigma() const { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }
    void validate() const {
        if (!(fwhm > 0.0)) throw InvalidArgument("InstrumentResponse: fwhm must be positive");
    }
    double operator()(double t) const {
        const double s = sigma();
        return std::exp(-0.5 * t * t / (s * s)) / (s * std::sqrt(2.0 * M_PI));
    }
};

namespace detail {

inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

}  // namespace detail

// (g2 * G)(tau) by trapezoid over the mirrored grid g2(-tau) = g2(tau); the kernel is renormalised on the nodes
inline dyn::G2Curve convolve_irf(const dyn::G2Curve& curve, const InstrumentResponse& irf) {
    irf.validate();
    const auto& tau = curve.tau;
    if (tau.size() < 2) throw InvalidArgument("convolve_irf: curve needs at least two points");
    for (std::size_t i = 0; i + 1 < tau.size(); ++i)
        if (!(tau[i + 1] > tau[i])) throw InvalidArgument("convolve_irf: tau must be strictly increasing");
    if (tau.front() < 0.0) throw InvalidArgument("convolve_irf: expects a non-negative tau grid");
    const double cap = irf.fwhm / 10.0;
    for (std::size_t i = 0; i + 1 < tau.size(); ++i)
        if (tau[i + 1] - tau[i] > cap * (1.0 + 1e-12))
            throw GridTooCoarse("convolve_irf: spacing " + std::to_string(tau[i + 1] - tau[i]) + " ps exceeds fwhm/10 at tau = " +
                                std::to_string(tau[i]) + " ps");

    // nodes: mirrored negative side, the grid, and a constant tail past tau_max
    std::vector<double> x, y;
    const std::size_t first = tau.front() == 0.0 ? 1 : 0;
    for (std::size_t i = tau.size(); i-- > first;) {
        x.push_back(-tau[i]);
        y.push_back(curve.g2[i]);
    }
    for (std::size_t i = 0; i < tau.size(); ++i) {
        x.push_back(tau[i]);
        y.push_back(curve.g2[i]);
    }
    const double reach = 5.0 * irf.fwhm;
    const double tail = curve.g2.back();
    for (double t = tau.back() + cap; t <= tau.back() + reach + cap; t += cap) {
        x.push_back(t);
        y.push_back(tail);
        x.insert(x.begin(), -t);
        y.insert(y.begin(), tail);
    }
    const auto w = detail::trapezoid_weights(x);

    dyn::G2Curve out = curve;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = tau[i] - x[j];
            if (std::abs(d) > reach) continue;
            const double k = w[j] * irf(d);
            num += k * y[j];
            den += k;
        }
        out.g2[i] = num / den;
    }
    return out;
}

struct CurveMetrics {
    double max_abs = 0.0;
    double rms = 0.0;
    std::size_t samples = 0;
};

// Differences on a's nodes inside the window, b interpolated linearly
inline CurveMetrics compare_curves(const dyn::G2Curve& a, const dyn::G2Curve& b, std::pair<double, double> window) {
    if (b.tau.size() < 1 || a.tau.empty()) throw DisjointSupport("compare_curves: empty curve");
    const double lo = std::max({window.first, b.tau.front()});
    const double hi = std::min({window.second, b.tau.back()});
    CurveMetrics m;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.tau.size(); ++i) {
        const double t = a.tau[i];
        if (t < lo || t > hi) continue;
        const auto it = std::lower_bound(b.tau.begin(), b.tau.end(), t);
        double bv;
        if (it == b.tau.end()) continue;
        const std::size_t j = static_cast<std::size_t>(it - b.tau.begin());
        if (*it == t || j == 0) {
            bv = b.g2[j];
        } else {
            const double f = (t - b.tau[j - 1]) / (b.tau[j] - b.tau[j - 1]);
            bv = (1.0 - f) * b.g2[j - 1] + f * b.g2[j];
        }
        const double d = std::abs(a.g2[i] - bv);
        m.max_abs = std::max(m.max_abs, d);
        ss += d * d;
        ++m.samples;
    }
    if (m.samples == 0) throw DisjointSupport("compare_curves: no common samples in window");
    m.rms = std::sqrt(ss / static_cast<double>(m.samples));
    return m;
}

}  // namespace coopem::post
