#include <doctest.h>

#include <cmath>
#include <vector>

#include "wmstomo/spectroscopy.hpp"

using namespace wmstomo;

namespace {

// water line used across the suite (same values as the bundled list file)
AbsorptionLine water_line() {
    AbsorptionLine l;
    l.nu0 = 7185.5966;
    l.S_ref = 1.969e-2;
    l.gamma_air = 0.0396;
    l.gamma_self = 0.1950;
    l.n_T = 0.69;
    l.E_low = 1045.0583;
    l.molar_mass = 18.010565;
    l.T_ref = 296.0;
    return l;
}

LaserDriveConfig reference_drive() {
    LaserDriveConfig d;
    d.f_s = 31.25;
    d.f_m = 62500.0;
    d.i_bar = 0.5;
    d.i1_s = 0.2;
    d.i1_m = 0.1;
    d.nu_bar = 7185.6;
    d.a1_s = 0.25;
    d.a1_m = 0.006;
    return d;
}

// quadrature oracle for the Voigt kernel, independent of the rational
// approximation used by the implementation
double voigt_kernel_oracle(double x, double y) {
    const double lo = -9.0, hi = 9.0;
    const double h = std::min(0.004, y / 40.0);
    const std::size_t n = static_cast<std::size_t>((hi - lo) / h) + 1;
    double acc = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        const double f = std::exp(-t * t) / ((x - t) * (x - t) + y * y);
        acc += (i == 0 || i == n) ? 0.5 * f : f;
    }
    return acc * (hi - lo) / static_cast<double>(n) * y / pi;
}

// Olivero-Longbothum estimate of the Voigt half width, used only to scale grids
double voigt_hwhm(const AbsorptionLine& l, const BeamGasState& g) {
    const double gl = collision_hwhm(l, g);
    const double gd = doppler_hwhm(l, g.T);
    return 0.5346 * gl + std::sqrt(0.2166 * gl * gl + gd * gd);
}

}  // namespace

TEST_CASE("laser intensity closed forms") {
    LaserDriveConfig d = reference_drive();

    SUBCASE("zero modulation gives the mean intensity") {
        d.i1_s = d.i1_m = 0.0;
        for (double t : {0.0, 1e-4, 0.013, 0.031})
            CHECK(laser_intensity(t, d) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("reference amplitudes at t = 0") {
        CHECK(laser_intensity(0.0, d) == doctest::Approx(0.65).epsilon(1e-15));
    }
    SUBCASE("periodic in the scan period when f_m/f_s is an integer") {
        for (double t : {0.0, 1.23e-4, 7.7e-3})
            CHECK(laser_intensity(t + 1.0 / d.f_s, d) ==
                  doctest::Approx(laser_intensity(t, d)).epsilon(1e-12));
    }
    SUBCASE("equals the sum of its scan and modulation components") {
        for (double t : {0.0, 3.3e-5, 2.9e-3, 0.02}) {
            const double ws = 2.0 * pi * d.f_s * t, wm = 2.0 * pi * d.f_m * t;
            const double scan = d.i_bar * (0.5 + d.i1_s * std::cos(ws));
            const double mod = d.i_bar * (0.5 + d.i1_m * std::cos(wm));
            CHECK(laser_intensity(t, d) == scan + mod);
        }
    }
    SUBCASE("strictly positive over a scan") {
        for (int i = 0; i < 2000; ++i) CHECK(laser_intensity(i * 1.6e-5, d) > 0.0);
    }
    SUBCASE("rejects modulation depth that can push intensity negative") {
        d.i1_s = 0.6;
        d.i1_m = 0.5;
        CHECK_THROWS_AS(d.validate(), config_error);
    }
}

TEST_CASE("laser frequency closed forms") {
    LaserDriveConfig d = reference_drive();

    SUBCASE("zero tuning keeps the centre wavenumber") {
        d.a1_s = d.a1_m = 0.0;
        for (double t : {0.0, 1e-4, 0.01}) CHECK(laser_frequency(t, d) == d.nu_bar);
    }
    SUBCASE("reference amplitudes at t = 0") {
        CHECK(laser_frequency(0.0, d) == doctest::Approx(7185.6 + 0.256).epsilon(1e-15));
    }
    SUBCASE("bounded by the amplitude sum") {
        const double bound = d.a1_s + d.a2_s + d.a1_m + d.a2_m;
        for (int i = 0; i < 5000; ++i) {
            const double t = i * 6.4e-6;
            CHECK(std::abs(laser_frequency(t, d) - d.nu_bar) <= bound + 1e-12);
        }
    }
}

TEST_CASE("lineshape limits and symmetry") {
    const AbsorptionLine line = water_line();
    BeamGasState gas{36.0, 1.0, 296.0, 0.008};

    SUBCASE("doppler width -> 0 approaches the lorentzian peak") {
        AbsorptionLine heavy = line;
        heavy.molar_mass = 1e9;  // quenches the doppler width
        const double gamma = collision_hwhm(heavy, gas);
        const double want = 1.0 / (pi * gamma);
        CHECK(lineshape(heavy.nu0, heavy, gas) == doctest::Approx(want).epsilon(1e-3));
    }
    SUBCASE("collisional width -> 0 approaches the gaussian peak") {
        AbsorptionLine narrow = line;
        narrow.gamma_air = narrow.gamma_self = 0.0;
        const double ad = doppler_hwhm(narrow, gas.T);
        const double want = std::sqrt(ln2 / pi) / ad;
        CHECK(lineshape(narrow.nu0, narrow, gas) == doctest::Approx(want).epsilon(1e-3));
    }
    SUBCASE("symmetric about the line centre") {
        for (double delta : {0.001, 0.01, 0.05, 0.3}) {
            CHECK(lineshape(line.nu0 + delta, line, gas) ==
                  doctest::Approx(lineshape(line.nu0 - delta, line, gas)).epsilon(1e-12));
        }
    }
}

TEST_CASE("lineshape area is one") {
    const AbsorptionLine line = water_line();
    for (double T : {250.0, 296.0, 400.0}) {
        for (double P : {0.5, 1.0, 2.0}) {
            BeamGasState gas{36.0, P, T, 0.008};
            const double w = voigt_hwhm(line, gas);
            // core: +-50 half-widths, trapezoid
            const double a = 50.0 * w;
            const std::size_t n = 20000;
            double integral = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                const double nu = line.nu0 - a + 2.0 * a * static_cast<double>(i) / static_cast<double>(n);
                const double f = lineshape(nu, line, gas);
                integral += (i == 0 || i == n) ? 0.5 * f : f;
            }
            integral *= 2.0 * a / static_cast<double>(n);
            // lorentzian wings carry ~1.3% of the area beyond 50 half-widths;
            // pick them up by log-spaced quadrature out to 10^5 half-widths
            const std::size_t m = 4000;
            const double u_hi = std::log(1e5);
            for (int side = 0; side < 2; ++side) {
                double wing = 0.0;
                for (std::size_t i = 0; i <= m; ++i) {
                    const double u = u_hi * static_cast<double>(i) / static_cast<double>(m);
                    const double delta = a * std::exp(u);
                    const double nu = side ? line.nu0 - delta : line.nu0 + delta;
                    const double f = lineshape(nu, line, gas) * delta;  // d(delta) = delta du
                    wing += (i == 0 || i == m) ? 0.5 * f : f;
                }
                integral += wing * u_hi / static_cast<double>(m);
            }
            CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
}

TEST_CASE("absorbance structure") {
    const AbsorptionLine line = water_line();
    const BeamGasState gas{36.0, 1.0, 296.0, 0.008};

    SUBCASE("zero concentration means zero absorbance") {
        BeamGasState empty = gas;
        empty.X = 0.0;
        for (double nu : {line.nu0, line.nu0 + 0.1}) CHECK(absorbance(nu, empty, line) == 0.0);
    }
    SUBCASE("linear in path length") {
        BeamGasState twice = gas;
        twice.L = 2.0 * gas.L;
        const double r = absorbance(line.nu0, twice, line) / absorbance(line.nu0, gas, line);
        CHECK(r == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("linear in mole fraction at fixed broadening") {
        AbsorptionLine even = line;
        even.gamma_self = even.gamma_air;  // widths independent of X
        BeamGasState a = gas, b = gas;
        b.X = 2.0 * a.X;
        const double r = absorbance(even.nu0, b, even) / absorbance(even.nu0, a, even);
        CHECK(r == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("linear in line strength") {
        AbsorptionLine strong = line;
        strong.S_ref = 2.0 * line.S_ref;
        const double r = absorbance(line.nu0, gas, strong) / absorbance(line.nu0, gas, line);
        CHECK(r == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("peak value against the quadrature oracle") {
        // T = T_ref so the line-strength scaling is exactly one
        const double ad = doppler_hwhm(line, gas.T);
        const double gl = collision_hwhm(line, gas);
        const double sqrt_ln2 = std::sqrt(ln2);
        const double phi_oracle =
            std::sqrt(ln2 / pi) / ad * voigt_kernel_oracle(0.0, sqrt_ln2 * gl / ad);
        const double want = gas.L * phi_oracle * gas.P * line.S_ref * gas.X;
        const double got = absorbance(line.nu0, gas, line);
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("line strength temperature scaling") {
    const AbsorptionLine line = water_line();
    CHECK(line_strength(line, line.T_ref) == doctest::Approx(line.S_ref).epsilon(1e-15));
    CHECK(line_strength(line, 250.0) > 0.0);
    CHECK(line_strength(line, 400.0) > 0.0);
}

TEST_CASE("beer-lambert transmission") {
    CHECK(transmit(0.65, 0.0) == 0.65);
    CHECK(transmit(1.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
    SUBCASE("exponent additivity") {
        const double a = 0.12, b = 0.05;
        CHECK(transmit(transmit(0.7, a), b) == doctest::Approx(transmit(0.7, a + b)).epsilon(1e-15));
    }
    SUBCASE("strictly decreasing in absorbance") {
        double prev = transmit(0.65, 0.0);
        for (double alpha = 0.01; alpha < 0.5; alpha += 0.01) {
            const double cur = transmit(0.65, alpha);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("beam synthesis") {
    const LaserDriveConfig drive = reference_drive();
    const AbsorptionLine line = water_line();
    const BeamGasState gas{36.0, 1.0, 293.0, 0.008};

    SUBCASE("reference rates give 500000 samples per scan") {
        const SampledWaveform w = synthesize_beam(drive, gas, line, 15.625e6, 1);
        CHECK(w.size() == 500000);
    }
    SUBCASE("no absorption reproduces the laser intensity exactly") {
        BeamGasState empty = gas;
        empty.X = 0.0;
        const double f_d = 312500.0;
        const SampledWaveform w = synthesize_beam(drive, empty, line, f_d, 1);
        for (std::size_t d = 0; d < w.size(); d += 97)
            CHECK(w.samples[d] == laser_intensity(static_cast<double>(d) / f_d, drive));
    }
    SUBCASE("more gas absorbs more at the line-centre crossing") {
        const double f_d = 312500.0;
        const SampledWaveform lo = synthesize_beam(drive, gas, line, f_d, 1);
        BeamGasState denser = gas;
        denser.X = 0.012;
        const SampledWaveform hi = synthesize_beam(drive, denser, line, f_d, 1);
        // locate the closest approach to the line centre within the scan
        std::size_t at = 0;
        double best = 1e9;
        for (std::size_t d = 0; d < lo.size(); ++d) {
            const double miss = std::abs(laser_frequency(static_cast<double>(d) / f_d, drive) - line.nu0);
            if (miss < best) {
                best = miss;
                at = d;
            }
        }
        CHECK(hi.samples[at] < lo.samples[at]);
    }
    SUBCASE("sub-nyquist sampling is rejected") {
        CHECK_THROWS_AS(synthesize_beam(drive, gas, line, 3.0 * drive.f_m, 1), config_error);
    }
}
