#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wmstomo/common.hpp"
#include "wmstomo/mux.hpp"

namespace wmstomo {

// Accumulated in-phase/quadrature values for one slot (plain sums over the
// slot's D samples, no averaging). slot is the 1-based multiplexing index j.
struct QuadratureFrame {
    double x1f = 0.0;
    double y1f = 0.0;
    double x2f = 0.0;
    double y2f = 0.0;
    std::size_t slot = 0;
};

// Demultiplexed 2f/1f spectrum of one beam; sample order follows the slot
// order, so the implicit index runs across the used portion of the scan.
struct HarmonicSpectrum {
    int beam = 0;
    std::vector<double> values;
};

enum class ScanPortion { falling, rising, full };

inline ScanPortion parse_portion(const std::string& s) {
    if (s == "falling") return ScanPortion::falling;
    if (s == "rising") return ScanPortion::rising;
    if (s == "full") return ScanPortion::full;
    throw config_error("unknown scan portion '" + s + "' (expected falling|rising|full)");
}

// Unit-amplitude quadrature references at f_m and 2*f_m, one slot long.
// Every slot starts at the same modulation phase (D is a whole number of
// periods), so one table serves the whole stream.
struct ReferenceSet {
    std::vector<double> i1f, q1f, i2f, q2f;
};

inline ReferenceSet make_references(double f_m, double f_d, std::size_t D, double phase) {
    const double spp = f_d / f_m;
    if (std::abs(spp - std::round(spp)) > 1e-9 * spp)
        throw config_error("references: non-integer samples per modulation period");
    const std::size_t period = static_cast<std::size_t>(std::llround(spp));
    if (D == 0 || D % period != 0)
        throw config_error("references: D must be a positive multiple of f_d/f_m");
    ReferenceSet r;
    r.i1f.resize(D);
    r.q1f.resize(D);
    r.i2f.resize(D);
    r.q2f.resize(D);
    for (std::size_t d = 0; d < D; ++d) {
        const double w = 2.0 * pi * f_m * static_cast<double>(d) / f_d;
        r.i1f[d] = std::cos(w + phase);
        r.q1f[d] = std::cos(w + phase + pi / 2.0);
        r.i2f[d] = std::cos(2.0 * w + phase);
        r.q2f[d] = std::cos(2.0 * w + phase + pi / 2.0);
    }
    return r;
}

inline QuadratureFrame demodulate_slot(const double* samples, const ReferenceSet& refs,
                                       std::size_t D, std::size_t slot) {
    QuadratureFrame f;
    f.slot = slot;
    for (std::size_t d = 0; d < D; ++d) {
        const double v = samples[d];
        f.x1f += v * refs.i1f[d];
        f.y1f += v * refs.q1f[d];
        f.x2f += v * refs.i2f[d];
        f.y2f += v * refs.q2f[d];
    }
    return f;
}

// One frame per slot: the dot product of the slot's samples with the four
// references. Accumulation is sequential so results are deterministic.
inline std::vector<QuadratureFrame> demodulate_stream(const SampledWaveform& stream,
                                                      const MuxSchedule& sched, double phase = 0.0) {
    sched.validate();
    const std::size_t D = sched.slot_samples();
    if (stream.empty() || stream.size() % D != 0)
        throw config_error("demodulate: stream length must be a positive multiple of D = " +
                           std::to_string(D));
    const ReferenceSet refs = make_references(sched.f_m, sched.f_d, D, phase);
    const std::size_t slots = stream.size() / D;
    std::vector<QuadratureFrame> out;
    out.reserve(slots);
    for (std::size_t j = 0; j < slots; ++j)
        out.push_back(demodulate_slot(stream.samples.data() + j * D, refs, D, j + 1));
    return out;
}

inline double r1f_magnitude(const QuadratureFrame& f) {
    return std::sqrt(f.x1f * f.x1f + f.y1f * f.y1f);
}

// 1f-normalized, background-corrected 2f magnitude for one slot.
inline double normalize_2f1f(const QuadratureFrame& sig, const QuadratureFrame& bg) {
    const double r1f = r1f_magnitude(sig);
    const double r1f0 = r1f_magnitude(bg);
    constexpr double floor = 1e-30;
    if (!(r1f > floor) || !(r1f0 > floor))
        throw numeric_error("slot " + std::to_string(sig.slot) +
                            ": vanishing 1f magnitude, cannot normalize");
    const double dx = sig.x2f / r1f - bg.x2f / r1f0;
    const double dy = sig.y2f / r1f - bg.y2f / r1f0;
    return std::sqrt(dx * dx + dy * dy);
}

// Routes the slot-ordered multiplexed spectrum to per-beam spectra.
// first_slot is the 1-based global index of values[0]; ordering within each
// beam is preserved.
inline std::vector<HarmonicSpectrum> demultiplex(std::span<const double> values,
                                                 std::span<const std::size_t> slots, int n_beams) {
    if (n_beams < 1) throw config_error("demultiplex: beam count must be >= 1");
    if (values.size() != slots.size()) throw config_error("demultiplex: value/slot size mismatch");
    if (values.empty() || values.size() % static_cast<std::size_t>(n_beams) != 0)
        throw config_error("demultiplex: slot count must be a positive multiple of N");
    std::vector<HarmonicSpectrum> out(static_cast<std::size_t>(n_beams));
    for (int b = 0; b < n_beams; ++b) out[static_cast<std::size_t>(b)].beam = b + 1;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const int beam = beam_index(static_cast<long long>(slots[k]), n_beams);
        out[static_cast<std::size_t>(beam - 1)].values.push_back(values[k]);
    }
    return out;
}

// 0-based slot indices selected by the scan portion, per scan. Slots are
// taken at whole-slot granularity; the falling half is the first half of
// each sinusoidal scan (wavenumber starts at its maximum for zero phases).
inline std::vector<std::size_t> portion_slots(std::size_t total_slots, std::size_t slots_per_scan,
                                              ScanPortion portion) {
    if (slots_per_scan == 0 || total_slots % slots_per_scan != 0)
        throw config_error("portion: slot count must be a whole number of scans");
    if (portion != ScanPortion::full && slots_per_scan % 2 != 0)
        throw config_error("portion: slots per scan must be even to take half a scan");
    std::vector<std::size_t> keep;
    const std::size_t scans = total_slots / slots_per_scan;
    const std::size_t half = slots_per_scan / 2;
    for (std::size_t s = 0; s < scans; ++s) {
        const std::size_t base = s * slots_per_scan;
        std::size_t lo = 0, hi = slots_per_scan;
        if (portion == ScanPortion::falling) hi = half;
        if (portion == ScanPortion::rising) lo = half;
        for (std::size_t j = lo; j < hi; ++j) keep.push_back(base + j);
    }
    return keep;
}

struct PipelineConfig {
    MuxSchedule sched;
    std::size_t slots_per_scan = 0;
    ScanPortion portion = ScanPortion::full;
    double phase = 0.0;
};

namespace detail {

inline std::vector<double> normalized_values(const std::vector<QuadratureFrame>& sig,
                                             const std::vector<QuadratureFrame>& bg) {
    if (sig.size() != bg.size()) throw config_error("pipeline: signal/background slot counts differ");
    std::vector<double> s(sig.size());
    for (std::size_t j = 0; j < sig.size(); ++j) s[j] = normalize_2f1f(sig[j], bg[j]);
    return s;
}

}  // namespace detail

// Quasi-parallel pipeline: multiplex -> demodulate -> normalize against the
// identically processed absorption-free backgrounds -> select the scan
// portion -> demultiplex. Yields one spectrum per beam with slots/N samples.
inline std::vector<HarmonicSpectrum> run_qp_pipeline(std::span<const SampledWaveform> beams,
                                                     std::span<const SampledWaveform> backgrounds,
                                                     const PipelineConfig& cfg) {
    const SampledWaveform mux = multiplex(beams, cfg.sched);
    const SampledWaveform bg_mux = multiplex(backgrounds, cfg.sched);
    const auto frames = demodulate_stream(mux, cfg.sched, cfg.phase);
    const auto bg_frames = demodulate_stream(bg_mux, cfg.sched, cfg.phase);
    const std::vector<double> s = detail::normalized_values(frames, bg_frames);
    const auto keep = portion_slots(s.size(), cfg.slots_per_scan, cfg.portion);
    std::vector<double> vals(keep.size());
    std::vector<std::size_t> slots(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        vals[k] = s[keep[k]];
        slots[k] = keep[k] + 1;
    }
    return demultiplex(vals, slots, cfg.sched.n_beams);
}

// Fully parallel reference pipeline: every beam demodulated over every slot
// with its own digitizer, giving N times the QP wavelength density. The QP
// output of a beam is exactly this spectrum restricted to the beam's slots.
inline std::vector<HarmonicSpectrum> run_fp_pipeline(std::span<const SampledWaveform> beams,
                                                     std::span<const SampledWaveform> backgrounds,
                                                     const PipelineConfig& cfg) {
    if (beams.size() != backgrounds.size())
        throw config_error("pipeline: beam/background counts differ");
    std::vector<HarmonicSpectrum> out;
    out.reserve(beams.size());
    for (std::size_t b = 0; b < beams.size(); ++b) {
        const auto frames = demodulate_stream(beams[b], cfg.sched, cfg.phase);
        const auto bg_frames = demodulate_stream(backgrounds[b], cfg.sched, cfg.phase);
        const std::vector<double> s = detail::normalized_values(frames, bg_frames);
        const auto keep = portion_slots(s.size(), cfg.slots_per_scan, cfg.portion);
        HarmonicSpectrum spec;
        spec.beam = static_cast<int>(b) + 1;
        spec.values.reserve(keep.size());
        for (std::size_t k : keep) spec.values.push_back(s[k]);
        out.push_back(std::move(spec));
    }
    return out;
}

// Global 1-based slot indices backing each sample of a pipeline output.
inline std::vector<std::size_t> spectrum_slots(std::size_t total_slots, std::size_t slots_per_scan,
                                               ScanPortion portion, int n_beams, int beam,
                                               bool qp_scheme) {
    const auto keep = portion_slots(total_slots, slots_per_scan, portion);
    std::vector<std::size_t> out;
    for (std::size_t k : keep) {
        const std::size_t j = k + 1;
        if (!qp_scheme || beam_index(static_cast<long long>(j), n_beams) == beam) out.push_back(j);
    }
    return out;
}

}  // namespace wmstomo
