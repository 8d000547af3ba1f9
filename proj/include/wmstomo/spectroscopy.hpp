#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wmstomo/common.hpp"
#include "wmstomo/faddeeva.hpp"

namespace wmstomo {

// Physical constants (SI where applicable)
inline constexpr double k_boltzmann = 1.380649e-23;     // [J/K]
inline constexpr double c_light = 2.99792458e8;         // [m/s]
inline constexpr double avogadro = 6.02214076e23;       // [1/mol]
inline constexpr double c2_radiation = 1.4387768775039337;  // h*c/k_B [cm K]
inline constexpr double ln2 = 0.6931471805599453;

// Drive-signal description of the laser: a slow sinusoidal wavelength scan
// at f_s with a fast modulation at f_m superimposed, both appearing in the
// output intensity and in the instantaneous optical frequency.
struct LaserDriveConfig {
    double f_s = 0.0;  // scan frequency [Hz]
    double f_m = 0.0;  // modulation frequency [Hz]

    double i_bar = 0.0;  // mean relative intensity (dimensionless)
    double i1_s = 0.0, i2_s = 0.0;  // intensity-modulation amplitudes, scan
    double i1_m = 0.0, i2_m = 0.0;  // intensity-modulation amplitudes, modulation
    double phi1_s = 0.0, phi2_s = 0.0, phi1_m = 0.0, phi2_m = 0.0;  // intensity phases [rad]

    double nu_bar = 0.0;  // centre wavenumber [cm^-1]
    double a1_s = 0.0, a2_s = 0.0;  // frequency-tuning amplitudes, scan [cm^-1]
    double a1_m = 0.0, a2_m = 0.0;  // frequency-tuning amplitudes, modulation [cm^-1]
    double psi1_s = 0.0, psi2_s = 0.0, psi1_m = 0.0, psi2_m = 0.0;  // frequency phases [rad]

    void validate() const {
        if (!(f_s > 0.0) || !(f_m > f_s)) throw config_error("drive: require f_m > f_s > 0");
        const double ratio = f_m / f_s;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw config_error("drive: f_m / f_s must be a positive integer");
        if (!(i_bar > 0.0)) throw config_error("drive: i_bar must be positive");
        for (double a : {i1_s, i2_s, i1_m, i2_m, a1_s, a2_s, a1_m, a2_m})
            if (a < 0.0) throw config_error("drive: amplitudes must be non-negative");
        // intensity stays positive when the summed modulation depth is < 1
        if (i1_s + i2_s + i1_m + i2_m >= 1.0)
            throw config_error("drive: intensity modulation amplitudes sum to >= 1, intensity can go negative");
    }

    std::size_t periods_per_scan() const { return static_cast<std::size_t>(std::llround(f_m / f_s)); }
};

// Spectroscopic parameters of one absorption transition. Values are
// external inputs (see the bundled line-list file for units).
struct AbsorptionLine {
    double nu0 = 0.0;        // line-centre wavenumber [cm^-1]
    double S_ref = 0.0;      // line strength at T_ref [cm^-2 atm^-1]
    double gamma_air = 0.0;  // air-broadening half width [cm^-1 atm^-1]
    double gamma_self = 0.0; // self-broadening half width [cm^-1 atm^-1]
    double n_T = 0.0;        // temperature exponent of broadening
    double E_low = 0.0;      // lower-state energy [cm^-1]
    double molar_mass = 0.0; // [g/mol]
    double T_ref = 296.0;    // [K]

    void validate() const {
        if (!(nu0 > 0.0)) throw config_error("line: nu0 must be positive");
        if (!(S_ref > 0.0)) throw config_error("line: S_ref must be positive");
        if (gamma_air < 0.0 || gamma_self < 0.0) throw config_error("line: broadening widths must be >= 0");
        if (!(T_ref > 0.0)) throw config_error("line: T_ref must be positive");
        if (!(molar_mass > 0.0)) throw config_error("line: molar_mass must be positive");
    }
};

// Thermodynamic state along one beam (uniform along the path).
struct BeamGasState {
    double L = 0.0;  // path length [cm]
    double P = 0.0;  // pressure [atm]
    double T = 0.0;  // temperature [K]
    double X = 0.0;  // target-species mole fraction

    void validate() const {
        if (!(L > 0.0)) throw config_error("gas: path length must be positive");
        if (!(P > 0.0)) throw config_error("gas: pressure must be positive");
        if (!(T > 0.0)) throw config_error("gas: temperature must be positive");
        if (X < 0.0 || X > 1.0) throw config_error("gas: mole fraction must be in [0, 1]");
    }
};

// I0(t): sum of the scan and modulation intensity components.
inline double laser_intensity(double t, const LaserDriveConfig& d) {
    const double ws = 2.0 * pi * d.f_s * t;
    const double wm = 2.0 * pi * d.f_m * t;
    const double scan =
        d.i_bar * (0.5 + d.i1_s * std::cos(ws + d.phi1_s) + d.i2_s * std::cos(2.0 * ws + d.phi2_s));
    const double mod =
        d.i_bar * (0.5 + d.i1_m * std::cos(wm + d.phi1_m) + d.i2_m * std::cos(2.0 * wm + d.phi2_m));
    return scan + mod;
}

// nu(t): centre wavenumber plus scanned and modulated tuning terms [cm^-1].
inline double laser_frequency(double t, const LaserDriveConfig& d) {
    const double ws = 2.0 * pi * d.f_s * t;
    const double wm = 2.0 * pi * d.f_m * t;
    return d.nu_bar + d.a1_s * std::cos(ws + d.psi1_s) + d.a2_s * std::cos(2.0 * ws + d.psi2_s) +
           d.a1_m * std::cos(wm + d.psi1_m) + d.a2_m * std::cos(2.0 * wm + d.psi2_m);
}

// Doppler half width at half maximum [cm^-1].
inline double doppler_hwhm(const AbsorptionLine& line, double T) {
    const double m_kg = line.molar_mass * 1e-3 / avogadro;
    return line.nu0 * std::sqrt(2.0 * ln2 * k_boltzmann * T / (m_kg * c_light * c_light));
}

// Collisional half width at half maximum [cm^-1].
inline double collision_hwhm(const AbsorptionLine& line, const BeamGasState& gas) {
    return gas.P * (gas.X * line.gamma_self + (1.0 - gas.X) * line.gamma_air) *
           std::pow(line.T_ref / gas.T, line.n_T);
}

// Line strength at temperature T [cm^-2 atm^-1]; partition sum approximated
// by the water-vapour power law (T_ref/T)^1.5.
inline double line_strength(const AbsorptionLine& line, double T) {
    const double q_ratio = std::pow(line.T_ref / T, 1.5);
    const double boltz =
        std::exp(-c2_radiation * line.E_low / T) / std::exp(-c2_radiation * line.E_low / line.T_ref);
    const double stim = (1.0 - std::exp(-c2_radiation * line.nu0 / T)) /
                        (1.0 - std::exp(-c2_radiation * line.nu0 / line.T_ref));
    return line.S_ref * q_ratio * boltz * stim;
}

// Area-normalized Voigt profile [cm].
inline double lineshape(double nu, const AbsorptionLine& line, const BeamGasState& gas) {
    const double alpha_d = doppler_hwhm(line, gas.T);
    const double gamma_l = collision_hwhm(line, gas);
    const double sqrt_ln2 = std::sqrt(ln2);
    const double x = sqrt_ln2 * (nu - line.nu0) / alpha_d;
    const double y = sqrt_ln2 * gamma_l / alpha_d;
    return std::sqrt(ln2 / pi) / alpha_d * faddeeva_real(x, y);
}

// alpha(nu) = L * phi(nu) * P * S(T) * X  (dimensionless).
inline double absorbance(double nu, const BeamGasState& gas, const AbsorptionLine& line) {
    if (gas.X == 0.0) return 0.0;
    return gas.L * lineshape(nu, line, gas) * gas.P * line_strength(line, gas.T) * gas.X;
}

// Beer-Lambert transmission.
inline double transmit(double intensity0, double alpha) { return intensity0 * std::exp(-alpha); }

// Per-sample building blocks of a synthesized beam over whole scans:
// the incident intensity and the absorbance per unit mole fraction, so
// that I_t[d] = intensity0[d] * exp(-alpha_per_x[d] * X).
struct BeamComponents {
    double f_d = 0.0;
    std::vector<double> intensity0;
    std::vector<double> alpha_per_x;  // L * phi(nu(t)) * P * S(T)
};

namespace detail {

inline void check_sampling(const LaserDriveConfig& drive, double f_d, int n_scans) {
    drive.validate();
    if (n_scans < 1) throw config_error("synthesize: n_scans must be >= 1");
    if (!(f_d >= 4.0 * drive.f_m))
        throw config_error("synthesize: f_d below 2x the 2f Nyquist rate (4*f_m)");
    const double spp = f_d / drive.f_s;
    if (std::abs(spp - std::round(spp)) > 1e-6)
        throw config_error("synthesize: f_d / f_s must be an integer number of samples per scan");
}

}  // namespace detail

inline BeamComponents synthesize_components(const LaserDriveConfig& drive, const BeamGasState& gas,
                                            const AbsorptionLine& line, double f_d, int n_scans) {
    detail::check_sampling(drive, f_d, n_scans);
    gas.validate();
    line.validate();
    const std::size_t n =
        static_cast<std::size_t>(n_scans) * static_cast<std::size_t>(std::llround(f_d / drive.f_s));
    BeamComponents out;
    out.f_d = f_d;
    out.intensity0.resize(n);
    out.alpha_per_x.resize(n);
    const double k_scale = gas.L * gas.P * line_strength(line, gas.T);
    const double alpha_d = doppler_hwhm(line, gas.T);
    const double gamma_l = collision_hwhm(line, gas);
    const double sqrt_ln2 = std::sqrt(ln2);
    const double y = sqrt_ln2 * gamma_l / alpha_d;
    const double norm = std::sqrt(ln2 / pi) / alpha_d;
    for (std::size_t d = 0; d < n; ++d) {
        const double t = static_cast<double>(d) / f_d;
        out.intensity0[d] = laser_intensity(t, drive);
        const double x = sqrt_ln2 * (laser_frequency(t, drive) - line.nu0) / alpha_d;
        out.alpha_per_x[d] = k_scale * norm * faddeeva_real(x, y);
    }
    return out;
}

// Transmitted-intensity waveform for one beam over n_scans wavelength scans.
inline SampledWaveform synthesize_beam(const LaserDriveConfig& drive, const BeamGasState& gas,
                                       const AbsorptionLine& line, double f_d, int n_scans) {
    BeamComponents c = synthesize_components(drive, gas, line, f_d, n_scans);
    SampledWaveform w;
    w.f_d = f_d;
    w.samples.resize(c.intensity0.size());
    for (std::size_t d = 0; d < w.samples.size(); ++d)
        w.samples[d] = transmit(c.intensity0[d], c.alpha_per_x[d] * gas.X);
    return w;
}

}  // namespace wmstomo
