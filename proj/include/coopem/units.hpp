// units.hpp — Internal unit system (ps, ps^-1, meV) and conversions

#pragma once

#include <numbers>

namespace coopem::units {

inline constexpr double hbar = 0.6582119569;    // meV ps
inline constexpr double k_B = 0.08617333262;    // meV / K
inline constexpr double pi = std::numbers::pi;

inline constexpr double meV_per_eV = 1000.0;
inline constexpr double ps_per_ns = 1000.0;

// SI constants for the deformation-potential density
inline constexpr double hbar_SI = 1.054571817e-34;  // J s
inline constexpr double eV_SI = 1.602176634e-19;    // J

// angular frequency (rad/ps) of an energy quantum in meV
inline constexpr double omega_of_meV(double e_meV) { return e_meV / hbar; }
inline constexpr double meV_of_omega(double w) { return w * hbar; }

inline constexpr double rate_of_lifetime_ns(double t_ns) { return 1.0 / (t_ns * ps_per_ns); }
inline constexpr double rate_of_lifetime_ps(double t_ps) { return 1.0 / t_ps; }

}  // namespace coopem::units
