#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wmstomo {

// Error taxonomy used throughout the toolkit. The CLI maps these to
// exit codes: config_error -> 2, numeric_error -> 3, io_error -> 4.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct config_error : error {
    using error::error;
};
struct numeric_error : error {
    using error::error;
};
struct io_error : error {
    using error::error;
};

inline constexpr double pi = 3.14159265358979323846;

// Uniformly sampled real-valued signal. Samples are relative intensity
// (dimensionless) unless stated otherwise at the point of use.
struct SampledWaveform {
    double f_d = 0.0;  // sample rate [Hz]
    double t0 = 0.0;   // time of samples[0] [s]
    std::vector<double> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

inline double rms(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace wmstomo
