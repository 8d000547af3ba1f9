#include <doctest.h>

#include <complex>
#include <vector>

#include "wmstomo/fft.hpp"
#include "wmstomo/rng.hpp"

using wmstomo::fft::cplx;

namespace {

// quadratic-cost reference DFT
std::vector<cplx> naive_dft(const std::vector<cplx>& x, bool inverse) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * wmstomo::pi * static_cast<double>(k * j) / static_cast<double>(n);
            acc += x[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

std::vector<cplx> random_signal(std::size_t n, std::uint64_t seed) {
    wmstomo::Rng rng(seed);
    std::vector<cplx> x(n);
    for (auto& v : x) v = cplx(rng.normal(), rng.normal());
    return x;
}

double max_err(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("mixed-radix transform matches the naive DFT") {
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 6u, 8u, 9u, 15u, 16u, 20u, 25u, 30u, 60u, 100u, 125u, 128u, 243u, 500u}) {
        std::vector<cplx> x = random_signal(n, 42 + n);
        std::vector<cplx> got = x;
        wmstomo::fft::transform(got, false);
        const auto want = naive_dft(x, false);
        CHECK(max_err(got, want) < 1e-9 * static_cast<double>(n));
    }
}

TEST_CASE("bluestein path matches the naive DFT for prime lengths") {
    for (std::size_t n : {7u, 11u, 13u, 17u, 31u, 97u, 101u}) {
        std::vector<cplx> x = random_signal(n, 7 * n);
        std::vector<cplx> got = x;
        wmstomo::fft::transform(got, false);
        const auto want = naive_dft(x, false);
        CHECK(max_err(got, want) < 1e-9 * static_cast<double>(n));
    }
}

TEST_CASE("forward then inverse is the identity") {
    for (std::size_t n : {12u, 37u, 250u, 500u, 1000u}) {
        const std::vector<cplx> x = random_signal(n, n);
        std::vector<cplx> y = x;
        wmstomo::fft::transform(y, false);
        wmstomo::fft::transform(y, true);
        CHECK(max_err(y, x) < 1e-10);
    }
}

TEST_CASE("single tone lands in a single bin") {
    const std::size_t n = 200;
    std::vector<cplx> x(n);
    for (std::size_t d = 0; d < n; ++d) {
        const double ang = 2.0 * wmstomo::pi * 9.0 * static_cast<double>(d) / static_cast<double>(n);
        x[d] = cplx(std::cos(ang), 0.0);
    }
    wmstomo::fft::transform(x, false);
    CHECK(std::abs(x[9] - cplx(100.0, 0.0)) < 1e-9);
    CHECK(std::abs(x[n - 9] - cplx(100.0, 0.0)) < 1e-9);
    CHECK(std::abs(x[10]) < 1e-9);
}
