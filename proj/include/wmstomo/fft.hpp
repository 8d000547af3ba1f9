#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "wmstomo/common.hpp"

namespace wmstomo::fft {

using cplx = std::complex<double>;

namespace detail {

inline int small_factor(std::size_t n) {
    if (n % 2 == 0) return 2;
    if (n % 3 == 0) return 3;
    if (n % 5 == 0) return 5;
    return 0;
}

inline bool smooth235(std::size_t n) {
    while (n > 1) {
        const int p = small_factor(n);
        if (p == 0) return false;
        n /= static_cast<std::size_t>(p);
    }
    return true;
}

// Root tables are cached per length; building exp(-2*pi*i*j/N) dominates
// the cost of repeated transforms of one size otherwise.
inline std::shared_ptr<const std::vector<cplx>> root_table(std::size_t n) {
    static std::mutex mu;
    static std::unordered_map<std::size_t, std::shared_ptr<const std::vector<cplx>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto table = std::make_shared<std::vector<cplx>>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double ang = -2.0 * pi * static_cast<double>(j) / static_cast<double>(n);
        (*table)[j] = cplx(std::cos(ang), std::sin(ang));
    }
    cache[n] = table;
    return table;
}

// Recursive mixed-radix Cooley-Tukey (decimation in time). `x` is read with
// stride `s`; the length-n result lands in `out`. `scratch` must hold n
// elements and is reusable once the call returns. `roots` is the top-level
// table, walked with stride `rs` at this level.
inline void ct_step(const cplx* x, std::size_t s, cplx* out, cplx* scratch, std::size_t n,
                    const cplx* roots, std::size_t rs, std::size_t top_n) {
    if (n == 1) {
        out[0] = x[0];
        return;
    }
    const std::size_t p = static_cast<std::size_t>(small_factor(n));
    const std::size_t m = n / p;
    for (std::size_t q = 0; q < p; ++q)
        ct_step(x + q * s, s * p, scratch + q * m, out + q * m, m, roots, rs * p, top_n);

    // out[k + r*m] = sum_q roots[q*(k+r*m)*rs mod N] * scratch[q*m + k]
    std::size_t tw[5] = {0, 0, 0, 0, 0};
    std::size_t step[5];
    for (std::size_t q = 0; q < p; ++q) step[q] = (rs * q) % top_n;
    std::size_t k = 0;
    for (std::size_t idx = 0; idx < n; ++idx) {
        cplx acc = scratch[k];
        for (std::size_t q = 1; q < p; ++q) acc += roots[tw[q]] * scratch[q * m + k];
        out[idx] = acc;
        for (std::size_t q = 1; q < p; ++q) {
            tw[q] += step[q];
            if (tw[q] >= top_n) tw[q] -= top_n;
        }
        if (++k == m) k = 0;
    }
}

inline void transform_smooth(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    auto roots = root_table(n);
    if (inverse)
        for (auto& v : a) v = std::conj(v);
    std::vector<cplx> out(n), scratch(n);
    ct_step(a.data(), 1, out.data(), scratch.data(), n, roots->data(), 1, n);
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) a[j] = std::conj(out[j]) * inv;
    } else {
        a.swap(out);
    }
}

// Bluestein chirp-z for lengths with prime factors other than 2, 3, 5.
inline void transform_bluestein(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m *= 2;

    std::vector<cplx> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small and exact
        const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
        const double ang = pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cplx(std::cos(ang), inverse ? std::sin(ang) : -std::sin(ang));
    }

    std::vector<cplx> u(m, cplx(0.0, 0.0)), v(m, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) u[k] = a[k] * chirp[k];
    for (std::size_t k = 0; k < n; ++k) {
        v[k] = std::conj(chirp[k]);
        if (k > 0) v[m - k] = std::conj(chirp[k]);
    }
    transform_smooth(u, false);
    transform_smooth(v, false);
    for (std::size_t k = 0; k < m; ++k) u[k] *= v[k];
    transform_smooth(u, true);
    for (std::size_t k = 0; k < n; ++k) a[k] = u[k] * chirp[k];
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

}  // namespace detail

// In-place DFT of arbitrary length; the inverse includes the 1/N factor.
inline void transform(std::vector<cplx>& a, bool inverse) {
    if (a.empty()) return;
    if (detail::smooth235(a.size()))
        detail::transform_smooth(a, inverse);
    else
        detail::transform_bluestein(a, inverse);
}

}  // namespace wmstomo::fft
