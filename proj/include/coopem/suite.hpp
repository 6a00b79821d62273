// suite.hpp — Figure suites: job lists, worker pool, fits, IRF convolution, CSV export

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "coopem/analytic_models.hpp"
#include "coopem/config.hpp"
#include "coopem/dynamics.hpp"
#include "coopem/postprocess.hpp"

namespace coopem::suite {

namespace fs = std::filesystem;

enum class JobKind { G2, Coherence, Regression };

struct Job {
    std::string name;  // output stem
    JobKind kind = JobKind::G2;
    dyn::Scenario scenario;
    core::DensityMatrix rho0;  // coherence only
};

using Result = std::variant<std::monostate, dyn::G2Curve, dyn::CoherenceTrajectory>;

struct JobReport {
    std::string name;
    bool ok = false;
    std::string error;
    double seconds = 0.0;
};

struct RunOptions {
    std::size_t workers = 1;
    std::string cache_dir;
    bool quiet = false;
};

struct SuiteReport {
    std::string figure;
    fs::path directory;
    std::vector<JobReport> jobs;
    std::vector<std::string> files;
    std::vector<std::string> failures;  // post-processing steps

    bool ok() const {
        for (const auto& j : jobs)
            if (!j.ok) return false;
        return failures.empty();
    }
    std::string summary() const {
        std::ostringstream os;
        os << "figure=" << figure << "\n";
        for (const auto& j : jobs)
            os << "job " << j.name << " " << (j.ok ? "ok" : "FAILED: " + j.error) << " " << j.seconds << " s\n";
        for (const auto& f : failures) os << "post FAILED: " << f << "\n";
        for (const auto& f : files) os << "file " << f << "\n";
        return os.str();
    }
};

namespace detail {

inline constexpr double kPpd221 = 1.0 / 221.0;   // ps^-1
inline constexpr double kPpd199 = 1.0 / 199.0;   // ps^-1
inline constexpr double kPpd3900 = 1.0 / 3900.0; // ps^-1

struct Builder {
    const cfg::ExperimentConfig& c;
    std::vector<Job> jobs;

    dyn::Scenario base(dyn::Geometry g, double gamma, double gamma_p) const {
        cfg::ExperimentConfig x = c;
        x.geometry = g;
        x.gamma = gamma;
        x.gamma_p = gamma_p;
        x.gamma_d = 0.0;
        x.ppd_extra = 0.0;
        return x.scenario();
    }
    std::optional<bath::SpectralDensity> model(const std::string& m) const {
        cfg::ExperimentConfig x = c;
        x.phonon_model = m;
        return x.spectral_density();
    }
    void g2(const std::string& name, dyn::Scenario sc, const std::string& phonons, double ppd) {
        sc.phonons = model(phonons);
        sc.ppd_extra = ppd;
        jobs.push_back({name, JobKind::G2, std::move(sc), {}});
    }
    void coherence(const std::string& name, const std::string& phonons, double ppd) {
        dyn::Scenario sc = base(dyn::Geometry::MeasurementInduced, 0.0, 0.0);
        sc.phonons = model(phonons);
        sc.ppd_extra = ppd;
        jobs.push_back({name, JobKind::Coherence, std::move(sc), initial_state(c.initial_state)});
    }

    static core::DensityMatrix initial_state(const std::string& s) {
        if (s == "psi_A") return core::DensityMatrix::pure(core::ops::psi_A());
        if (s == "ee") return core::DensityMatrix::basis(core::ee);
        if (s == "eg") return core::DensityMatrix::basis(core::eg);
        return core::DensityMatrix::pure(core::ops::psi_S());
    }
};

inline std::string ratio_tag(double r) {
    std::ostringstream os;
    os << r;
    std::string s = os.str();
    for (auto& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

}  // namespace detail

inline const std::vector<double>& fig4_ratios() {
    static const std::vector<double> r = {0.1, 1.0, 10.0};
    return r;
}

// Jobs for the configured figure; scenario sections of presets are fixed, numerics and grids follow the config
inline std::vector<Job> build_jobs(const cfg::ExperimentConfig& c) {
    using dyn::Geometry;
    detail::Builder b{c, {}};
    const std::string& f = c.figure;
    const std::string so = "inGaAs-deformation";
    const double g = c.gamma;
    if (f == "fig2a") {
        const auto sc = b.base(Geometry::MeasurementInduced, g, c.gamma_p);
        b.g2("markov", sc, "none", 0.0);
        b.g2("superohmic", sc, so, 0.0);
        b.g2("ohmic", sc, "ohmic", 0.0);
    } else if (f == "fig2b") {
        const auto sc = b.base(Geometry::MeasurementInduced, g, c.gamma_p);
        b.g2("superohmic", sc, so, 0.0);
        b.g2("superohmic_ppd221", sc, so, detail::kPpd221);
        b.g2("superohmic_ppd199", sc, so, detail::kPpd199);
        b.g2("ppd221", sc, "none", detail::kPpd221);
        b.g2("ppd199", sc, "none", detail::kPpd199);
    } else if (f == "fig2c") {
        b.coherence("superohmic", so, 0.0);
        b.coherence("ppd3900", "none", detail::kPpd3900);
        b.coherence("ohmic", "ohmic", 0.0);
    } else if (f == "fig2d") {
        b.coherence("superohmic", so, 0.0);
        b.coherence("superohmic_ppd221", so, detail::kPpd221);
        b.coherence("ppd221", "none", detail::kPpd221);
    } else if (f == "fig4") {
        for (double r : fig4_ratios()) {
            const auto sc = b.base(Geometry::Superradiant, g, r * g);
            const std::string t = "_r" + detail::ratio_tag(r);
            b.g2("none" + t, sc, "none", 0.0);
            b.g2("superohmic" + t, sc, so, 0.0);
            b.g2("ppd199" + t, sc, "none", detail::kPpd199);
        }
    } else if (f == "fig5") {
        const auto sc = b.base(Geometry::Superradiant, g, c.gamma_p);
        b.g2("none", sc, "none", 0.0);
        b.g2("superohmic", sc, so, 0.0);
        b.g2("ppd3900", sc, "none", detail::kPpd3900);
    } else if (f == "fig6") {
        const auto mi = b.base(Geometry::MeasurementInduced, g, c.gamma_p);
        b.g2("a_superohmic", mi, so, 0.0);
        b.g2("b_ppd221", mi, "none", detail::kPpd221);
        b.g2("b_superohmic_ppd221", mi, so, detail::kPpd221);
        for (double r : fig4_ratios())
            b.g2("c_none_r" + detail::ratio_tag(r), b.base(Geometry::Superradiant, g, r * g), "none", 0.0);
        const auto sr = b.base(Geometry::Superradiant, g, 2.0 * g);
        b.g2("d_superohmic", sr, so, 0.0);
        b.g2("d_ppd3900", sr, "none", detail::kPpd3900);
    } else if (f == "markov-check") {
        for (Geometry geo : {Geometry::MeasurementInduced, Geometry::Superradiant})
            for (double r : fig4_ratios()) {
                const auto sc = b.base(geo, g, r * g);
                const std::string t = std::string(geo == Geometry::Superradiant ? "sr" : "mi") + "_r" + detail::ratio_tag(r);
                b.g2("pipeline_" + t, sc, "none", 0.0);
                b.jobs.push_back({"regression_" + t, JobKind::Regression, sc, {}});
            }
    } else {
        cfg::ExperimentConfig x = c;
        dyn::Scenario sc = x.scenario();
        if (c.observable == "coherence")
            b.jobs.push_back({"coherence", JobKind::Coherence, sc, detail::Builder::initial_state(c.initial_state)});
        else
            b.jobs.push_back({"g2", JobKind::G2, sc, {}});
    }
    return b.jobs;
}

inline Result run_job(const Job& j, const std::vector<double>& regression_taus = {}) {
    switch (j.kind) {
        case JobKind::G2: return dyn::g2_curve(j.scenario);
        case JobKind::Coherence: return dyn::coherence_curve(j.scenario, j.rho0);
        case JobKind::Regression: {
            std::vector<double> taus = regression_taus;
            if (taus.empty())
                for (std::size_t s : dyn::tau_steps(j.scenario.grids, j.scenario.grids.dt))
                    taus.push_back(static_cast<double>(s) * j.scenario.grids.dt);
            return dyn::g2_regression(j.scenario, taus);
        }
    }
    return {};
}

// Runs fn(i) for i in [0, n) on `workers` threads
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    };
    if (workers == 1) {
        loop();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
}

inline SuiteReport run_suite(const cfg::ExperimentConfig& c, const RunOptions& opt = {}) {
    auto jobs = build_jobs(c);
    for (auto& j : jobs) j.scenario.numerics.cache_dir = opt.cache_dir;

    SuiteReport rep;
    rep.figure = c.figure;
    rep.directory = fs::path(c.out_dir) / (c.tag.empty() ? c.figure : c.figure + "_" + c.tag);
    fs::create_directories(rep.directory);
    rep.jobs.resize(jobs.size());
    std::vector<Result> results(jobs.size());
    std::mutex log;

    parallel_for(jobs.size(), opt.workers, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        JobReport& r = rep.jobs[i];
        r.name = jobs[i].name;
        try {
            results[i] = run_job(jobs[i]);
            r.ok = true;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!opt.quiet) {
            std::lock_guard<std::mutex> lk(log);
            std::cerr << "[" << c.figure << "] " << r.name << (r.ok ? " done" : " failed: " + r.error) << " (" << r.seconds
                      << " s)\n";
        }
    });

    const std::vector<std::pair<std::string, std::string>> tags = {{"figure", c.figure}};
    auto emit = [&](const std::string& stem, const std::string& text) {
        const fs::path p = rep.directory / stem;
        dyn::csv::write_text(p, text);
        rep.files.push_back(p.string());
    };
    std::map<std::string, const dyn::G2Curve*> g2;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (auto* curve = std::get_if<dyn::G2Curve>(&results[i])) {
            auto extra = tags;
            extra.emplace_back("job", jobs[i].name);
            emit(jobs[i].name + ".csv", dyn::csv::g2_text(*curve, extra));
            g2[jobs[i].name] = curve;
        } else if (auto* traj = std::get_if<dyn::CoherenceTrajectory>(&results[i])) {
            emit(jobs[i].name + ".csv", dyn::csv::coherence_text(*traj));
        }
    }

    const std::pair<double, double> window{c.fit_window_min, c.fit_window_max};
    auto fit = [&](const std::string& name, analytic::FitModel m, const std::string& suffix) -> std::optional<dyn::G2Curve> {
        const auto it = g2.find(name);
        if (it == g2.end()) return std::nullopt;
        try {
            const auto r = analytic::fit_model(*it->second, m, window);
            emit(name + "_fit_" + suffix + ".txt", r.to_text());
            auto curve = analytic::fitted_curve(*it->second, r);
            emit(name + "_fit_" + suffix + ".csv", dyn::csv::g2_text(curve, tags));
            return curve;
        } catch (const std::exception& e) {
            rep.failures.push_back("fit " + suffix + " of " + name + ": " + e.what());
            return std::nullopt;
        }
    };

    std::vector<std::pair<std::string, dyn::G2Curve>> to_convolve;
    if (c.figure == "fig2a") {
        fit("superohmic", analytic::FitModel::PpdModel, "ppd");
        fit("superohmic", analytic::FitModel::InitialDropModel, "drop");
        fit("ohmic", analytic::FitModel::PpdModel, "ppd");
    } else if (c.figure == "fig6") {
        if (auto f = fit("a_superohmic", analytic::FitModel::PpdModel, "ppd")) to_convolve.emplace_back("a_superohmic_fit_ppd", *f);
        for (const auto& [name, curve] : g2) to_convolve.emplace_back(name, *curve);
    } else if (c.figure == "markov-check") {
        std::ostringstream os;
        os << "case,max_abs_diff\n";
        for (const auto& [name, curve] : g2) {
            if (name.rfind("pipeline_", 0) != 0) continue;
            const auto ref = g2.find("regression_" + name.substr(9));
            if (ref == g2.end()) continue;
            os << name.substr(9) << "," << dyn::csv::fmt(post::compare_curves(*curve, *ref->second, {0.0, 1e300}).max_abs) << "\n";
        }
        emit("comparison.csv", os.str());
    } else if (c.figure == "custom" && c.observable == "g2" && g2.count("g2")) {
        const auto& sc = g2["g2"]->scenario.lindblad;
        if (sc.decay_mode == core::DecayMode::Independent && sc.gamma == sc.gamma_p && sc.gamma > 0.0) {
            fit("g2", analytic::FitModel::PpdModel, "ppd");
            fit("g2", analytic::FitModel::InitialDropModel, "drop");
        }
        to_convolve.emplace_back("g2", *g2["g2"]);
    }
    if (c.fwhm) {
        const post::InstrumentResponse irf{*c.fwhm};
        for (const auto& [name, curve] : to_convolve) {
            try {
                const auto conv = post::convolve_irf(curve, irf);
                auto extra = tags;
                extra.emplace_back("irf_fwhm_ps", dyn::csv::fmt(irf.fwhm));
                emit(name + "_irf.csv", dyn::csv::g2_text(conv, extra));
            } catch (const std::exception& e) {
                rep.failures.push_back("convolution of " + name + ": " + e.what());
            }
        }
    }
    emit("config.txt", cfg::to_text(c));
    dyn::csv::write_text(rep.directory / "run_summary.txt", rep.summary());
    return rep;
}

}  // namespace coopem::suite
