// bath_models.hpp — Spectral densities, bath correlations, influence-functional kernels, IBM decoherence

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "coopem/errors.hpp"
#include "coopem/units.hpp"

namespace coopem::bath {

using cd = std::complex<double>;

enum class SdKind { DeformationPotential, Ohmic, Tabulated };

struct DeformationParams {
    double mass_density = 5370.0;                       // kg/m^3
    double sound_speed = 5110.0;                        // m/s
    double D_e = 7.0;                                   // eV
    double D_h = -3.5;                                  // eV
    double omega_e = units::omega_of_meV(2.9);          // rad/ps
    double omega_h = units::omega_of_meV(4.4);          // rad/ps
};

struct OhmicParams {
    double alpha = 7.5e-5;
    double omega_c = units::omega_of_meV(4.0);  // rad/ps
};

struct TabulatedParams {
    std::vector<double> omega;  // rad/ps, ascending
    std::vector<double> J;      // ps^-1
};

struct SpectralDensity {
    SdKind kind = SdKind::DeformationPotential;
    DeformationParams deformation;
    OhmicParams ohmic;
    TabulatedParams table;
    double temperature = 4.0;  // K
    double scale = 1.0;        // overall multiplier (2 for the doubled two-bath density)

    static SpectralDensity inGaAs_deformation(double T = 4.0) {
        SpectralDensity s;
        s.kind = SdKind::DeformationPotential;
        s.temperature = T;
        return s;
    }
    static SpectralDensity ohmic_default(double T = 4.0) {
        SpectralDensity s;
        s.kind = SdKind::Ohmic;
        s.temperature = T;
        return s;
    }
    static SpectralDensity zero(double T = 4.0) {
        SpectralDensity s;
        s.kind = SdKind::Tabulated;
        s.table.omega = {0.0, 1.0};
        s.table.J = {0.0, 0.0};
        s.temperature = T;
        return s;
    }
    SpectralDensity doubled() const {
        SpectralDensity s = *this;
        s.scale *= 2.0;
        return s;
    }

    // FNV-1a over the defining parameters
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](const void* p, std::size_t n) {
            const auto* c = static_cast<const unsigned char*>(p);
            for (std::size_t i = 0; i < n; ++i) {
                h ^= c[i];
                h *= 1099511628211ull;
            }
        };
        const int k = static_cast<int>(kind);
        mix(&k, sizeof k);
        mix(&temperature, sizeof temperature);
        mix(&scale, sizeof scale);
        switch (kind) {
            case SdKind::DeformationPotential: mix(&deformation, sizeof deformation); break;
            case SdKind::Ohmic: mix(&ohmic, sizeof ohmic); break;
            case SdKind::Tabulated:
                mix(table.omega.data(), table.omega.size() * sizeof(double));
                mix(table.J.data(), table.J.size() * sizeof(double));
                break;
        }
        return h;
    }
};

namespace detail {

inline double deformation_J(const DeformationParams& p, double w) {
    const double wSI = w * 1e12;
    const double De = p.D_e * units::eV_SI, Dh = p.D_h * units::eV_SI;
    const double form = De * std::exp(-w * w / (p.omega_e * p.omega_e)) - Dh * std::exp(-w * w / (p.omega_h * p.omega_h));
    const double pref = 1.0 / (4.0 * units::pi * units::pi * p.mass_density * units::hbar_SI * std::pow(p.sound_speed, 5));
    return pref * wSI * wSI * wSI * form * form * 1e-12;
}

inline double tabulated_J(const TabulatedParams& t, double w) {
    if (t.omega.empty() || w <= t.omega.front() || w >= t.omega.back()) return 0.0;
    const auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
    const std::size_t i = static_cast<std::size_t>(it - t.omega.begin());
    const double x0 = t.omega[i - 1], x1 = t.omega[i];
    const double f = (w - x0) / (x1 - x0);
    return (1.0 - f) * t.J[i - 1] + f * t.J[i];
}

}  // namespace detail

inline double evaluate_sd(const SpectralDensity& sd, double w) {
    if (w < 0.0) throw NegativeFrequency("evaluate_sd: omega < 0");
    double J = 0.0;
    switch (sd.kind) {
        case SdKind::DeformationPotential: J = detail::deformation_J(sd.deformation, w); break;
        case SdKind::Ohmic: J = sd.ohmic.alpha * w * std::exp(-w * w / (sd.ohmic.omega_c * sd.ohmic.omega_c)); break;
        case SdKind::Tabulated: J = detail::tabulated_J(sd.table, w); break;
    }
    return sd.scale * J;
}

// coth(hbar w / 2 k_B T); series below hbar w < 1e-3 k_B T
inline double coth_factor(double w, double T) {
    if (T <= 0.0) return 1.0;
    const double x = units::hbar * w / (2.0 * units::k_B * T);
    if (2.0 * x < 1e-3) return 1.0 / x + x / 3.0 - x * x * x / 45.0;
    return 1.0 / std::tanh(x);
}

// J(w)/w^2 * coth; finite at w -> 0 for both built-in kinds
inline double J_over_w2(const SpectralDensity& sd, double w) { return evaluate_sd(sd, w) / (w * w); }

// Upper integration limit: largest w with J(w) >= 1e-14 max J
inline double omega_max(const SpectralDensity& sd) {
    double hi = 1.0;
    switch (sd.kind) {
        case SdKind::DeformationPotential: hi = 40.0 * std::max(sd.deformation.omega_e, sd.deformation.omega_h); break;
        case SdKind::Ohmic: hi = 40.0 * sd.ohmic.omega_c; break;
        case SdKind::Tabulated: return sd.table.omega.empty() ? 0.0 : sd.table.omega.back();
    }
    const int n = 40000;
    double jmax = 0.0;
    std::vector<double> vals(n + 1);
    for (int i = 0; i <= n; ++i) {
        vals[i] = evaluate_sd(sd, hi * i / n);
        jmax = std::max(jmax, vals[i]);
    }
    if (jmax == 0.0) return 0.0;
    for (int i = n; i >= 0; --i)
        if (vals[i] >= 1e-14 * jmax) return hi * std::min(n, i + 1) / n;
    return hi;
}

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

// Adaptive Gauss-Kronrod on [a,b] split into pieces that each hold a few oscillations of period 2pi/t_osc.
// Fails when the error estimate exceeds rel_tol * integral of |f|.
inline QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double t_osc,
                                  double rel_tol = 1e-8) {
    QuadratureResult r;
    if (b <= a) return r;
    const int pieces = std::max(4, static_cast<int>(std::ceil((b - a) * std::abs(t_osc) / units::pi)));
    const double h = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        double err = 0.0, l1 = 0.0;
        r.value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a + i * h, a + (i + 1) * h, 12,
                                                                                   rel_tol * 1e-2, &err, &l1);
        r.error += err;
        r.l1 += l1;
    }
    if (r.error > rel_tol * std::max(r.l1, 1e-300) && r.error > 1e-300)
        throw QuadratureFailure("integrate: error " + std::to_string(r.error) + " exceeds tolerance");
    return r;
}

// C(t) = int J(w) [coth cos wt - i sin wt] dw
inline cd bath_correlation(const SpectralDensity& sd, double t, double rel_tol = 1e-8) {
    if (t < 0.0) throw InvalidArgument("bath_correlation: t < 0");
    const double wm = omega_max(sd);
    const double T = sd.temperature;
    const auto re = integrate([&](double w) { return evaluate_sd(sd, w) * coth_factor(w, T) * std::cos(w * t); }, 0.0,
                              wm, t, rel_tol);
    const auto im = integrate([&](double w) { return -evaluate_sd(sd, w) * std::sin(w * t); }, 0.0, wm, t, rel_tol);
    return {re.value, im.value};
}

struct MemoryKernel {
    double dt = 0.0;
    std::size_t n_steps = 0;          // memory depth K; eta holds lags 0..K
    std::vector<cd> eta;
    std::vector<double> coupling_eigenvalues{0.0, 1.0};
    double truncation_error = 0.0;    // sum of |eta| over lags K+1 .. 2K
    std::uint64_t sd_hash = 0;
    double temperature = 0.0;

    // smallest depth whose dropped tail sum of |eta| stays below tol
    std::size_t effective_depth(double tol) const {
        double tail = truncation_error;
        std::size_t k = n_steps;
        while (k > 1 && tail + std::abs(eta[k]) < tol) {
            tail += std::abs(eta[k]);
            --k;
        }
        return k;
    }
    MemoryKernel truncated(std::size_t depth) const {
        MemoryKernel m = *this;
        depth = std::min(depth, n_steps);
        double tail = truncation_error;
        for (std::size_t k = depth + 1; k <= n_steps; ++k) tail += std::abs(eta[k]);
        m.eta.resize(depth + 1);
        m.n_steps = depth;
        m.truncation_error = tail;
        return m;
    }
};

namespace detail {

// 2(1 - cos x) = 4 sin^2(x/2)
inline double one_minus_cos2(double x) {
    const double s = std::sin(0.5 * x);
    return 4.0 * s * s;
}
inline double x_minus_sin(double x) {
    if (std::abs(x) < 1e-3) return x * x * x / 6.0 - x * x * x * x * x / 120.0;
    return x - std::sin(x);
}

inline cd eta_lag(const SpectralDensity& sd, double dt, std::size_t lag, double wm, double rel_tol) {
    const double T = sd.temperature;
    if (lag == 0) {
        const auto re = integrate([&](double w) { return J_over_w2(sd, w) * coth_factor(w, T) * 0.5 * one_minus_cos2(w * dt); },
                                  0.0, wm, dt, rel_tol);
        const auto im = integrate([&](double w) { return -J_over_w2(sd, w) * x_minus_sin(w * dt); }, 0.0, wm, dt, rel_tol);
        return {re.value, im.value};
    }
    const double t = static_cast<double>(lag) * dt;
    const auto re = integrate(
        [&](double w) { return J_over_w2(sd, w) * one_minus_cos2(w * dt) * coth_factor(w, T) * std::cos(w * t); }, 0.0, wm,
        t + dt, rel_tol);
    const auto im = integrate([&](double w) { return -J_over_w2(sd, w) * one_minus_cos2(w * dt) * std::sin(w * t); }, 0.0,
                              wm, t + dt, rel_tol);
    return {re.value, im.value};
}

}  // namespace detail

// eta_0 = int_{cell triangle} C, eta_D = int_{cell k} int_{cell k-D} C, both as single w-quadratures
inline MemoryKernel build_kernel(const SpectralDensity& sd, double dt, double t_mem, double rel_tol = 1e-8) {
    if (!(dt > 0.0)) throw InvalidArgument("build_kernel: dt must be positive");
    if (!(t_mem >= dt * (1.0 - 1e-12))) throw InvalidArgument("build_kernel: t_mem < dt");
    MemoryKernel k;
    k.dt = dt;
    k.n_steps = static_cast<std::size_t>(std::ceil(t_mem / dt - 1e-9));
    k.sd_hash = sd.hash();
    k.temperature = sd.temperature;
    k.eta.assign(k.n_steps + 1, cd(0.0, 0.0));
    const double wm = omega_max(sd);
    if (wm <= 0.0) return k;
    for (std::size_t d = 0; d <= k.n_steps; ++d) k.eta[d] = detail::eta_lag(sd, dt, d, wm, rel_tol);
    for (std::size_t d = k.n_steps + 1; d <= 2 * k.n_steps; ++d)
        k.truncation_error += std::abs(detail::eta_lag(sd, dt, d, wm, rel_tol));
    return k;
}

// Phi(t) = int J/w^2 [coth (1 - cos wt) + i sin wt]
inline cd decoherence_exponent(const SpectralDensity& sd, double t, double rel_tol = 1e-8) {
    const double wm = omega_max(sd);
    if (wm <= 0.0 || t == 0.0) return {0.0, 0.0};
    const double T = sd.temperature;
    const auto re = integrate([&](double w) { return J_over_w2(sd, w) * coth_factor(w, T) * 0.5 * detail::one_minus_cos2(w * t); },
                              0.0, wm, t, rel_tol);
    const auto im = integrate([&](double w) { return J_over_w2(sd, w) * std::sin(w * t); }, 0.0, wm, t, rel_tol);
    return {re.value, im.value};
}

struct IbmDecoherence {
    SpectralDensity J_eff;
    std::vector<double> times;
    std::vector<cd> values;  // c(t)/c(0)
};

inline IbmDecoherence ibm_decoherence(const SpectralDensity& sd, bool doubling, const std::vector<double>& grid,
                                      double rel_tol = 1e-8) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || (i > 0 && grid[i] < grid[i - 1]))
            throw InvalidArgument("ibm_decoherence: grid must be sorted and non-negative");
    }
    IbmDecoherence out;
    out.J_eff = doubling ? sd.doubled() : sd;
    out.times = grid;
    out.values.reserve(grid.size());
    for (double t : grid) out.values.push_back(std::exp(-decoherence_exponent(out.J_eff, t, rel_tol)));
    return out;
}

// |c(inf)/c0| = exp(-int J/w^2 coth)
inline double ibm_plateau(const SpectralDensity& sd, bool doubling, double rel_tol = 1e-8) {
    const SpectralDensity s = doubling ? sd.doubled() : sd;
    const double wm = omega_max(s);
    if (wm <= 0.0) return 1.0;
    const auto r = integrate([&](double w) { return J_over_w2(s, w) * coth_factor(w, s.temperature); }, 0.0, wm, 0.0, rel_tol);
    return std::exp(-r.value);
}

// Kernel cache: "CPEMKRN" magic, version, header (hash, dt, t_mem, T, K), then eta pairs
namespace cache {

inline constexpr char kKernelMagic[8] = {'C', 'P', 'E', 'M', 'K', 'R', 'N', '\0'};
inline constexpr std::uint32_t kKernelVersion = 1;

inline std::string kernel_key(std::uint64_t sd_hash, double dt, double t_mem, double T) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "kernel_%016llx_dt%.6g_tm%.6g_T%.6g.bin", static_cast<unsigned long long>(sd_hash), dt,
                  t_mem, T);
    return buf;
}

inline void save_kernel(const MemoryKernel& k, double t_mem, const std::filesystem::path& file) {
    const auto tmp = file.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw CacheError("cannot write " + tmp);
        const std::uint64_t n = k.eta.size();
        os.write(kKernelMagic, 8);
        os.write(reinterpret_cast<const char*>(&kKernelVersion), sizeof kKernelVersion);
        os.write(reinterpret_cast<const char*>(&k.sd_hash), sizeof k.sd_hash);
        os.write(reinterpret_cast<const char*>(&k.dt), sizeof k.dt);
        os.write(reinterpret_cast<const char*>(&t_mem), sizeof t_mem);
        os.write(reinterpret_cast<const char*>(&k.temperature), sizeof k.temperature);
        os.write(reinterpret_cast<const char*>(&k.truncation_error), sizeof k.truncation_error);
        os.write(reinterpret_cast<const char*>(&n), sizeof n);
        os.write(reinterpret_cast<const char*>(k.eta.data()), static_cast<std::streamsize>(n * sizeof(cd)));
    }
    std::filesystem::rename(tmp, file);
}

// Returns false on missing file or header mismatch
inline bool load_kernel(const std::filesystem::path& file, std::uint64_t sd_hash, double dt, double t_mem, double T,
                        MemoryKernel& out) {
    std::ifstream is(file, std::ios::binary);
    if (!is) return false;
    char magic[8];
    std::uint32_t version = 0;
    std::uint64_t h = 0, n = 0;
    double fdt = 0, ftm = 0, fT = 0, trunc = 0;
    is.read(magic, 8);
    is.read(reinterpret_cast<char*>(&version), sizeof version);
    is.read(reinterpret_cast<char*>(&h), sizeof h);
    is.read(reinterpret_cast<char*>(&fdt), sizeof fdt);
    is.read(reinterpret_cast<char*>(&ftm), sizeof ftm);
    is.read(reinterpret_cast<char*>(&fT), sizeof fT);
    is.read(reinterpret_cast<char*>(&trunc), sizeof trunc);
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!is || std::memcmp(magic, kKernelMagic, 8) != 0 || version != kKernelVersion) return false;
    if (h != sd_hash || fdt != dt || ftm != t_mem || fT != T || n == 0 || n > (1u << 24)) return false;
    out = MemoryKernel{};
    out.eta.resize(n);
    is.read(reinterpret_cast<char*>(out.eta.data()), static_cast<std::streamsize>(n * sizeof(cd)));
    if (!is) return false;
    out.dt = fdt;
    out.n_steps = n - 1;
    out.truncation_error = trunc;
    out.sd_hash = h;
    out.temperature = fT;
    return true;
}

}  // namespace cache

}  // namespace coopem::bath
