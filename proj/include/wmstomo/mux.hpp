#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wmstomo/common.hpp"

namespace wmstomo {

// Time-multiplexing schedule: N beams share one digitizer, each dwell
// lasting c modulation periods (D = c * f_d / f_m samples).
struct MuxSchedule {
    int n_beams = 1;          // N
    int periods_per_slot = 1; // c
    double f_m = 0.0;         // modulation frequency [Hz]
    double f_d = 0.0;         // sampling frequency [Hz]
    double t_mux = 0.0;       // multiplexer worst-case response time [s]

    void validate() const {
        if (n_beams < 1) throw config_error("schedule: N must be >= 1");
        if (periods_per_slot < 1) throw config_error("schedule: c must be >= 1");
        if (!(f_m > 0.0) || !(f_d > 0.0)) throw config_error("schedule: frequencies must be positive");
        const double spp = f_d / f_m;
        if (std::abs(spp - std::round(spp)) > 1e-9 * spp)
            throw config_error("schedule: non-integer samples per modulation period (f_d/f_m)");
        if (t_mux < 0.0) throw config_error("schedule: t_mux must be >= 0");
    }

    std::size_t samples_per_period() const {
        return static_cast<std::size_t>(std::llround(f_d / f_m));
    }
    // D
    std::size_t slot_samples() const {
        return static_cast<std::size_t>(periods_per_slot) * samples_per_period();
    }
};

// i = j - floor((j-1)/N) * N, cyclic over the beam count; j is 1-based.
inline int beam_index(long long j, int n_beams) {
    if (j < 1) throw config_error("beam_index: slot index must be >= 1");
    if (n_beams < 1) throw config_error("beam_index: beam count must be >= 1");
    const long long n = n_beams;
    return static_cast<int>(j - ((j - 1) / n) * n);
}

struct TimingReport {
    bool valid = false;
    double max_f_d = 0.0;  // 1 / t_mux, infinite for an instantaneous switch
    std::string message;
};

// Switch-settling constraint: the multiplexed signal must be stable between
// neighbouring ADC samples, i.e. t_mux < 1/f_d.
inline TimingReport validate_timing(const MuxSchedule& s) {
    TimingReport r;
    r.max_f_d = s.t_mux > 0.0 ? 1.0 / s.t_mux : std::numeric_limits<double>::infinity();
    r.valid = s.t_mux < 1.0 / s.f_d;
    if (r.valid)
        r.message = "ok";
    else
        r.message = "t_mux = " + std::to_string(s.t_mux * 1e9) + " ns does not settle within one sample (" +
                    std::to_string(1e9 / s.f_d) + " ns); maximum supported f_d = " +
                    std::to_string(r.max_f_d / 1e6) + " MHz";
    return r;
}

// Interleaves N time-aligned beams onto one stream at slot granularity.
// Output sample d is taken from beam beam_index(floor(d/D)+1, N) at the
// same index d, so the slot map is a bijection and demultiplexing is
// lossless.
inline SampledWaveform multiplex(std::span<const SampledWaveform> beams, const MuxSchedule& sched) {
    sched.validate();
    if (beams.size() != static_cast<std::size_t>(sched.n_beams))
        throw config_error("multiplex: expected " + std::to_string(sched.n_beams) + " beams, got " +
                           std::to_string(beams.size()));
    const TimingReport timing = validate_timing(sched);
    if (!timing.valid) throw config_error("multiplex: " + timing.message);
    const std::size_t n = beams[0].size();
    const std::size_t D = sched.slot_samples();
    if (n == 0 || n % D != 0)
        throw config_error("multiplex: waveform length must be a positive multiple of D = " +
                           std::to_string(D));
    for (const auto& b : beams) {
        if (b.size() != n) throw config_error("multiplex: waveform lengths differ");
        if (b.f_d != beams[0].f_d) throw config_error("multiplex: sample rates differ");
    }
    SampledWaveform out;
    out.f_d = beams[0].f_d;
    out.t0 = beams[0].t0;
    out.samples.resize(n);
    const std::size_t slots = n / D;
    for (std::size_t j = 0; j < slots; ++j) {
        const int beam = beam_index(static_cast<long long>(j) + 1, sched.n_beams);
        const double* src = beams[static_cast<std::size_t>(beam - 1)].samples.data() + j * D;
        double* dst = out.samples.data() + j * D;
        for (std::size_t d = 0; d < D; ++d) dst[d] = src[d];
    }
    return out;
}

}  // namespace wmstomo
