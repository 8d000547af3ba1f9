#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wmstomo/common.hpp"
#include "wmstomo/fft.hpp"
#include "wmstomo/rng.hpp"

namespace wmstomo {

enum class NoiseKind { environmental, pink, white };

inline const char* to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::environmental: return "environmental";
        case NoiseKind::pink: return "pink";
        default: return "white";
    }
}

// One noise stage. snr_db is defined against the RMS of the waveform the
// stage is applied to: 20*log10(rms(input)/rms(noise)) == snr_db.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::white;
    double snr_db = 0.0;
    double cutoff_hz = 0.0;  // upper band edge, environmental only
    std::uint64_t seed = 0;

    void validate() const {
        if (!std::isfinite(snr_db)) throw config_error("noise: snr_db must be finite");
        if (kind == NoiseKind::environmental && !(cutoff_hz > 0.0))
            throw config_error("noise: environmental cutoff_hz must be positive");
    }
};

namespace detail {

// Zero-mean unit-scale noise with the requested spectral shape, synthesized
// from a Hermitian-symmetric spectrum so the inverse transform is real.
// Band edges are expressed on the waveform's own DFT grid.
inline std::vector<double> shaped_noise(std::size_t n, double f_d, const NoiseSpec& spec) {
    Rng rng(spec.seed);
    if (spec.kind == NoiseKind::white) {
        std::vector<double> out(n);
        for (auto& v : out) v = rng.normal();
        return out;
    }
    const double df = f_d / static_cast<double>(n);
    if (spec.kind == NoiseKind::environmental && spec.cutoff_hz < df)
        throw config_error("noise: environmental cutoff below the waveform's spectral resolution");
    std::vector<fft::cplx> spec_bins(n, fft::cplx(0.0, 0.0));
    const std::size_t half = n / 2;
    for (std::size_t k = 1; k <= half; ++k) {
        const double f = df * static_cast<double>(k);
        double mag;
        if (spec.kind == NoiseKind::environmental)
            mag = (f <= spec.cutoff_hz) ? 1.0 : 0.0;
        else
            mag = 1.0 / std::sqrt(f);  // 1/f power density
        if (mag == 0.0) {
            rng.normal();  // keep the stream position independent of the shape
            rng.normal();
            continue;
        }
        const double re = rng.normal() * mag;
        const double im = rng.normal() * mag;
        if (k == half && n % 2 == 0) {
            spec_bins[k] = fft::cplx(re, 0.0);
        } else {
            spec_bins[k] = fft::cplx(re, im);
            spec_bins[n - k] = std::conj(spec_bins[k]);
        }
    }
    fft::transform(spec_bins, true);
    std::vector<double> out(n);
    for (std::size_t d = 0; d < n; ++d) out[d] = spec_bins[d].real();
    return out;
}

}  // namespace detail

// Adds one noise stage to `clean`, scaled so the realized SNR equals
// spec.snr_db exactly; deterministic for a given seed.
inline SampledWaveform inject_noise(const SampledWaveform& clean, const NoiseSpec& spec) {
    spec.validate();
    if (clean.empty()) throw config_error("inject_noise: empty waveform");
    if (!all_finite(clean.samples)) throw numeric_error("inject_noise: non-finite input sample");
    std::vector<double> noise = detail::shaped_noise(clean.size(), clean.f_d, spec);
    const double clean_rms = rms(clean.samples);
    if (!(clean_rms > 0.0)) throw numeric_error("inject_noise: input RMS is zero, SNR undefined");
    const double noise_rms = rms(noise);
    if (!(noise_rms > 0.0)) throw numeric_error("inject_noise: degenerate noise realization");
    const double scale = clean_rms * std::pow(10.0, -spec.snr_db / 20.0) / noise_rms;
    SampledWaveform out = clean;
    for (std::size_t d = 0; d < out.size(); ++d) out.samples[d] += noise[d] * scale;
    return out;
}

// Three-stage chain: environmental noise enters during propagation, pink and
// white noise at detection and acquisition, in that order. Each stage draws
// from a sub-seed derived from its own spec seed.
inline SampledWaveform apply_noise_chain(const SampledWaveform& clean, const NoiseSpec& env,
                                         const NoiseSpec& pink, const NoiseSpec& white) {
    if (env.kind != NoiseKind::environmental || pink.kind != NoiseKind::pink ||
        white.kind != NoiseKind::white)
        throw config_error("apply_noise_chain: specs must be (environmental, pink, white)");
    NoiseSpec e = env, p = pink, w = white;
    e.seed = derive_seed(env.seed, 0);
    p.seed = derive_seed(pink.seed, 1);
    w.seed = derive_seed(white.seed, 2);
    return inject_noise(inject_noise(inject_noise(clean, e), p), w);
}

// Equal-power split of a combined SNR level across two stages.
inline double split_snr_db(double combined_db) { return combined_db + 10.0 * std::log10(2.0); }

}  // namespace wmstomo
