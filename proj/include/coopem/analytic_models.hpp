// analytic_models.hpp — Closed-form g2 references, least-squares fits, Markovian superradiant curves

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "coopem/dynamics.hpp"
#include "coopem/errors.hpp"

namespace coopem::analytic {

// Pure dephasing, gamma_p = gamma; first exponent is (gamma + gamma_p)
inline double g2_ppd(double tau, double gamma, double gamma_p, double gamma_d) {
    if (std::abs(gamma_p - gamma) > 1e-12 * std::max(std::abs(gamma), std::abs(gamma_p)))
        throw DomainError("g2_ppd: requires gamma_p = gamma");
    if (gamma < 0.0 || gamma_d < 0.0) throw DomainError("g2_ppd: negative rate");
    const double t = std::abs(tau);
    return 1.0 - 0.5 * (std::exp(-(gamma + gamma_p) * t) - std::exp(-(gamma + gamma_p + gamma_d) * t));
}

inline double g2_initial_drop(double tau, double a, double gamma, double gamma_p) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("g2_initial_drop: a must lie in [0,1]");
    return 1.0 - a * std::exp(-(gamma + gamma_p) * std::abs(tau));
}

enum class FitModel { PpdModel, InitialDropModel };

inline const char* to_string(FitModel m) { return m == FitModel::PpdModel ? "PpdModel" : "InitialDropModel"; }

struct FitResult {
    FitModel model = FitModel::PpdModel;
    std::map<std::string, double> params;
    double residual_norm = 0.0;  // sqrt of the sum of squared residuals
    double rms = 0.0;
    std::vector<double> covariance_diag;
    std::pair<double, double> window{0.0, 0.0};
    std::size_t samples = 0;
    int iterations = 0;

    double evaluate(double tau) const {
        if (model == FitModel::PpdModel)
            return g2_ppd(tau, params.at("gamma"), params.at("gamma_p"), params.at("gamma_d"));
        return g2_initial_drop(tau, params.at("a"), params.at("gamma"), params.at("gamma_p"));
    }

    std::string to_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "model=" << to_string(model) << "\n";
        for (const auto& [k, v] : params) os << k << "=" << v << "\n";
        if (model == FitModel::PpdModel) os << "gamma_d_inverse_ps=" << 1.0 / params.at("gamma_d") << "\n";
        os << "residual_norm=" << residual_norm << "\nrms=" << rms << "\nsamples=" << samples << "\n";
        os << "window_ps=" << window.first << " " << window.second << "\n";
        for (std::size_t i = 0; i < covariance_diag.size(); ++i) os << "covariance_diag_" << i << "=" << covariance_diag[i] << "\n";
        return os.str();
    }
};

struct FitOptions {
    int max_iterations = 400;
    double xtol = 1e-12;
    double ftol = 1e-14;
};

namespace detail {

// One free parameter p; the model value and derivative at tau
struct Residuals {
    const std::vector<double>* tau;
    const std::vector<double>* y;
    FitModel model;
    double rate;  // gamma + gamma_p

    int inputs() const { return 1; }
    int values() const { return static_cast<int>(tau->size()); }

    // PpdModel: p = log gamma_d (positivity); InitialDropModel: p = a
    double value(double t, double p) const {
        const double e1 = std::exp(-rate * t);
        if (model == FitModel::PpdModel) return 1.0 - 0.5 * (e1 - std::exp(-(rate + std::exp(p)) * t));
        return 1.0 - p * e1;
    }
    double deriv(double t, double p) const {
        if (model == FitModel::PpdModel) {
            const double gd = std::exp(p);
            return -0.5 * t * gd * std::exp(-(rate + gd) * t);
        }
        return -std::exp(-rate * t);
    }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        for (std::size_t i = 0; i < tau->size(); ++i) f(i) = value((*tau)[i], x(0)) - (*y)[i];
        return 0;
    }
    int df(const Eigen::VectorXd& x, Eigen::MatrixXd& J) const {
        for (std::size_t i = 0; i < tau->size(); ++i) J(i, 0) = deriv((*tau)[i], x(0));
        return 0;
    }
};

}  // namespace detail

// Least squares of the PPD model (free gamma_d) or the drop model (free a) with gamma, gamma_p taken from the curve's scenario
inline FitResult fit_model(const dyn::G2Curve& curve, FitModel model, std::pair<double, double> tau_window,
                           const FitOptions& opt = {}) {
    std::vector<double> t, y;
    for (std::size_t i = 0; i < curve.tau.size(); ++i)
        if (curve.tau[i] >= tau_window.first && curve.tau[i] <= tau_window.second) {
            t.push_back(std::abs(curve.tau[i]));
            y.push_back(curve.g2[i]);
        }
    if (t.size() < 10) throw InvalidArgument("fit_model: fewer than 10 samples in window");
    const double gamma = curve.scenario.lindblad.gamma, gamma_p = curve.scenario.lindblad.gamma_p;
    if (model == FitModel::PpdModel && std::abs(gamma - gamma_p) > 1e-12 * std::max(gamma, gamma_p))
        throw DomainError("fit_model: PpdModel requires gamma_p = gamma");
    detail::Residuals res{&t, &y, model, gamma + gamma_p};

    std::vector<double> starts;
    if (model == FitModel::PpdModel) {
        for (double f : {0.1, 1.0, 10.0}) starts.push_back(std::log(f * gamma));
    } else {
        const double a0 = std::clamp(1.0 - y.front(), 0.0, 1.0);
        starts = {a0, 0.5};
    }

    FitResult best;
    best.model = model;
    double best_ss = std::numeric_limits<double>::infinity();
    bool any = false;
    int iters = 0;
    for (double s : starts) {
        Eigen::VectorXd x(1);
        x(0) = s;
        Eigen::LevenbergMarquardt<detail::Residuals> lm(res);
        lm.parameters.maxfev = opt.max_iterations;
        lm.parameters.xtol = opt.xtol;
        lm.parameters.ftol = opt.ftol;
        const auto status = lm.minimize(x);
        iters += static_cast<int>(lm.iter);
        if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) continue;
        if (!std::isfinite(x(0))) continue;
        if (model == FitModel::InitialDropModel) x(0) = std::clamp(x(0), 0.0, 1.0);
        Eigen::VectorXd f(t.size());
        res(x, f);
        const double ss = f.squaredNorm();
        const bool ok = status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation;
        if (ok && ss < best_ss) {
            any = true;
            best_ss = ss;
            Eigen::MatrixXd J(t.size(), 1);
            res.df(x, J);
            const double sigma2 = t.size() > 1 ? ss / static_cast<double>(t.size() - 1) : 0.0;
            const double jtj = J.squaredNorm();
            best.params.clear();
            best.params["gamma"] = gamma;
            best.params["gamma_p"] = gamma_p;
            if (model == FitModel::PpdModel) {
                const double gd = std::exp(x(0));
                best.params["gamma_d"] = gd;
                // variance of gamma_d from that of log gamma_d
                best.covariance_diag = {jtj > 0 ? sigma2 / jtj * gd * gd : INFINITY};
            } else {
                best.params["a"] = x(0);
                best.covariance_diag = {jtj > 0 ? sigma2 / jtj : INFINITY};
            }
        }
    }
    if (!any) throw NonConvergence("fit_model: no start converged");
    best.residual_norm = std::sqrt(best_ss);
    best.rms = std::sqrt(best_ss / static_cast<double>(t.size()));
    best.window = tau_window;
    best.samples = t.size();
    best.iterations = iters;
    return best;
}

// Model evaluated on the curve's grid, for export and comparison
inline dyn::G2Curve fitted_curve(const dyn::G2Curve& like, const FitResult& fit) {
    dyn::G2Curve c;
    c.scenario = like.scenario;
    c.I0 = like.I0;
    c.numerics.engine = std::string("fit:") + to_string(fit.model);
    c.tau = like.tau;
    for (double t : c.tau) c.g2.push_back(fit.evaluate(t));
    return c;
}

// Markovian superradiant g2 by steady state plus quantum regression
inline dyn::G2Curve superradiant_g2_lindblad(const core::LindbladSpec& spec, const std::vector<double>& taus) {
    if (spec.decay_mode != core::DecayMode::Superradiant)
        throw InvalidArgument("superradiant_g2_lindblad: decay mode must be Superradiant");
    dyn::Scenario sc;
    sc.lindblad = spec;
    sc.geometry = dyn::Geometry::Superradiant;
    return dyn::g2_regression(sc, taus);
}

}  // namespace coopem::analytic
