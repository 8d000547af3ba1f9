#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wmstomo/dli.hpp"
#include "wmstomo/mux.hpp"

namespace wmstomo {

// Integer datapath description of the lock-in: two's-complement ADC samples
// multiplied by quantized sinusoidal references, accumulated over a slot,
// then right-shifted for export on a narrower bus.
struct FixedPointSpec {
    int adc_bits = 14;
    int ref_bits = 14;
    int acc_bits = 37;
    int shift = 5;
    int out_bits = 32;

    static int growth_bits(std::size_t D) {
        int g = 0;
        while ((std::size_t{1} << g) < D) ++g;
        return g;
    }

    void validate(std::size_t D) const {
        if (adc_bits < 2 || ref_bits < 2) throw config_error("fixed-point: widths must be >= 2 bits");
        if (acc_bits > 63 || out_bits > 63) throw config_error("fixed-point: widths above 63 bits unsupported");
        if (shift < 0) throw config_error("fixed-point: shift must be >= 0");
        const int needed = adc_bits + ref_bits + growth_bits(D);
        if (acc_bits < needed)
            throw config_error("fixed-point: accumulator needs >= " + std::to_string(needed) +
                               " bits for D = " + std::to_string(D));
        if (out_bits < acc_bits - shift)
            throw config_error("fixed-point: out_bits too narrow for acc_bits - shift");
    }
};

struct IntQuadratureFrame {
    std::int64_t x1f = 0;
    std::int64_t y1f = 0;
    std::int64_t x2f = 0;
    std::int64_t y2f = 0;
    std::size_t slot = 0;
};

struct QuantizedReferences {
    std::vector<std::int32_t> i1f, q1f, i2f, q2f;
    std::int32_t amplitude = 0;  // full-scale reference value, 2^(ref_bits-1) - 1
};

// References rounded to ref_bits the way a DDS lookup table would hold them.
inline QuantizedReferences make_quantized_references(double f_m, double f_d, std::size_t D,
                                                     double phase, int ref_bits) {
    const ReferenceSet refs = make_references(f_m, f_d, D, phase);
    QuantizedReferences q;
    q.amplitude = static_cast<std::int32_t>((std::int64_t{1} << (ref_bits - 1)) - 1);
    auto quantize = [&](const std::vector<double>& src, std::vector<std::int32_t>& dst) {
        dst.resize(src.size());
        for (std::size_t d = 0; d < src.size(); ++d)
            dst[d] = static_cast<std::int32_t>(std::llround(src[d] * q.amplitude));
    };
    quantize(refs.i1f, q.i1f);
    quantize(refs.q1f, q.q1f);
    quantize(refs.i2f, q.i2f);
    quantize(refs.q2f, q.q2f);
    return q;
}

// Integer demodulation with declared-width checking; any value exceeding
// the declared accumulator or export width raises instead of wrapping.
inline std::vector<IntQuadratureFrame> fixed_point_demodulate(std::span<const std::int32_t> stream,
                                                              const MuxSchedule& sched,
                                                              const FixedPointSpec& fmt,
                                                              double phase = 0.0) {
    sched.validate();
    const std::size_t D = sched.slot_samples();
    fmt.validate(D);
    if (stream.empty() || stream.size() % D != 0)
        throw config_error("fixed-point: stream length must be a positive multiple of D");
    const QuantizedReferences refs = make_quantized_references(sched.f_m, sched.f_d, D, phase, fmt.ref_bits);

    const std::int64_t adc_max = (std::int64_t{1} << (fmt.adc_bits - 1)) - 1;
    const std::int64_t adc_min = -(std::int64_t{1} << (fmt.adc_bits - 1));
    const std::int64_t acc_lim = std::int64_t{1} << (fmt.acc_bits - 1);
    const std::int64_t out_lim = std::int64_t{1} << (fmt.out_bits - 1);

    const std::size_t slots = stream.size() / D;
    std::vector<IntQuadratureFrame> out;
    out.reserve(slots);
    for (std::size_t j = 0; j < slots; ++j) {
        std::int64_t acc[4] = {0, 0, 0, 0};
        const std::int32_t* s = stream.data() + j * D;
        for (std::size_t d = 0; d < D; ++d) {
            const std::int64_t v = s[d];
            if (v > adc_max || v < adc_min)
                throw numeric_error("fixed-point: input sample exceeds adc_bits at slot " +
                                    std::to_string(j + 1));
            acc[0] += v * refs.i1f[d];
            acc[1] += v * refs.q1f[d];
            acc[2] += v * refs.i2f[d];
            acc[3] += v * refs.q2f[d];
            for (const std::int64_t a : acc)
                if (a >= acc_lim || a < -acc_lim)
                    throw numeric_error("fixed-point: accumulator overflow at slot " +
                                        std::to_string(j + 1));
        }
        IntQuadratureFrame f;
        f.slot = j + 1;
        // arithmetic shift: truncation toward negative infinity
        f.x1f = acc[0] >> fmt.shift;
        f.y1f = acc[1] >> fmt.shift;
        f.x2f = acc[2] >> fmt.shift;
        f.y2f = acc[3] >> fmt.shift;
        for (const std::int64_t v : {f.x1f, f.y1f, f.x2f, f.y2f})
            if (v >= out_lim || v < -out_lim)
                throw numeric_error("fixed-point: export overflow at slot " + std::to_string(j + 1));
        out.push_back(f);
    }
    return out;
}

}  // namespace wmstomo
