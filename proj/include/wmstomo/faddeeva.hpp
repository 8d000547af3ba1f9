#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "wmstomo/common.hpp"

namespace wmstomo {

namespace detail {

// Weideman rational-approximation coefficients for the Faddeeva function,
// computed once from the tangent-grid samples of exp(-t^2)*(L^2+t^2).
template <int N>
struct WeidemanCoeffs {
    double L;
    std::array<double, N> a;  // ascending powers of the Moebius variable

    WeidemanCoeffs() {
        constexpr int M = 2 * N;
        constexpr int M2 = 4 * N;
        L = std::sqrt(static_cast<double>(N) / std::sqrt(2.0));
        // g holds [0, f(k=-M+1..M-1)] after an fftshift of the length-2M vector
        std::array<double, static_cast<std::size_t>(M2)> g{};
        std::array<double, static_cast<std::size_t>(M2)> v{};
        v[0] = 0.0;
        for (int k = -M + 1; k <= M - 1; ++k) {
            const double theta = static_cast<double>(k) * pi / static_cast<double>(M);
            const double t = L * std::tan(0.5 * theta);
            v[static_cast<std::size_t>(k + M)] = std::exp(-t * t) * (L * L + t * t);
        }
        for (int j = 0; j < M2; ++j) g[static_cast<std::size_t>((j + M) % M2)] = v[static_cast<std::size_t>(j)];
        for (int n = 1; n <= N; ++n) {
            double acc = 0.0;
            for (int m = 0; m < M2; ++m)
                acc += g[static_cast<std::size_t>(m)] *
                       std::cos(2.0 * pi * static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(M2));
            a[static_cast<std::size_t>(n - 1)] = acc / static_cast<double>(M2);
        }
    }
};

inline std::complex<double> faddeeva_weideman(std::complex<double> z) {
    static const WeidemanCoeffs<36> c;
    const std::complex<double> iz(-z.imag(), z.real());
    const std::complex<double> den = c.L - iz;
    const std::complex<double> zz = (c.L + iz) / den;
    // polynomial in ascending powers, Horner from the top
    std::complex<double> p(0.0, 0.0);
    for (int n = 36; n >= 1; --n) p = p * zz + c.a[static_cast<std::size_t>(n - 1)];
    constexpr double inv_sqrt_pi = 0.56418958354775628695;
    return 2.0 * p / (den * den) + inv_sqrt_pi / den;
}

}  // namespace detail

// Real part of the Faddeeva function w(x + i y) for y >= 0; this is the
// Voigt kernel K(x, y).
inline double faddeeva_real(double x, double y) {
    if (y == 0.0) {
        const double x2 = x * x;
        return x2 > 708.0 ? 0.0 : std::exp(-x2);
    }
    const std::complex<double> z(x, y);
    if (x * x + y * y >= 256.0) {
        // w(z) = (i/sqrt(pi)) / (z - 1/2/(z - 1/(z - 3/2/(z - ...))))
        std::complex<double> r(0.0, 0.0);
        for (int k = 10; k >= 1; --k) r = (0.5 * static_cast<double>(k)) / (z - r);
        constexpr double inv_sqrt_pi = 0.56418958354775628695;
        const std::complex<double> w = std::complex<double>(0.0, inv_sqrt_pi) / (z - r);
        return w.real();
    }
    return detail::faddeeva_weideman(z).real();
}

}  // namespace wmstomo
