#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "wmstomo/dli.hpp"
#include "wmstomo/mux.hpp"
#include "wmstomo/spectroscopy.hpp"

namespace wmstomo {

enum class Scheme { qp, fp, both };

inline Scheme parse_scheme(const std::string& s) {
    if (s == "qp") return Scheme::qp;
    if (s == "fp") return Scheme::fp;
    if (s == "both") return Scheme::both;
    throw config_error("unknown scheme '" + s + "' (expected qp|fp|both)");
}

// Noise-free forward model of one beam's demodulated 2f/1f spectrum as a
// function of mole fraction X.
//
// I_t[d] = I0[d] * exp(-k[d] X) with k independent of X, so each slot's
// quadrature accumulation is expanded once into moments
//   M_n[q] = sum_d I0[d] * (-k[d])^n / n! * R_q[d]
// and any concentration is evaluated as the power series sum_n M_n X^n.
// The series is truncated where its tail is below double precision, so an
// evaluation reproduces the real pipeline's demodulation to rounding error
// at a tiny fraction of the cost; the fitting loop depends on this.
class ForwardModel {
  public:
    ForwardModel(const LaserDriveConfig& drive, const BeamGasState& gas, const AbsorptionLine& line,
                 const PipelineConfig& cfg, double x_max = 0.05)
        : n_beams_(cfg.sched.n_beams), x_max_(x_max) {
        cfg.sched.validate();
        const BeamComponents c = synthesize_components(drive, gas, line, cfg.sched.f_d, 1);
        const std::size_t D = cfg.sched.slot_samples();
        if (c.intensity0.size() % D != 0)
            throw config_error("model: scan length is not a whole number of slots");
        const std::size_t total_slots = c.intensity0.size() / D;
        if (cfg.slots_per_scan != total_slots)
            throw config_error("model: slots_per_scan does not match one scan of the drive");
        slots_ = portion_slots(total_slots, cfg.slots_per_scan, cfg.portion);

        double k_max = 0.0;
        for (double k : c.alpha_per_x) k_max = std::max(k_max, k);
        order_ = choose_order(k_max * x_max);

        const ReferenceSet refs = make_references(cfg.sched.f_m, cfg.sched.f_d, D, cfg.phase);
        moments_.assign(slots_.size() * static_cast<std::size_t>(order_ + 1), {0.0, 0.0, 0.0, 0.0});
        for (std::size_t s = 0; s < slots_.size(); ++s) {
            const std::size_t base = slots_[s] * D;
            for (std::size_t d = 0; d < D; ++d) {
                double term = c.intensity0[base + d];
                const double neg_k = -c.alpha_per_x[base + d];
                for (int n = 0; n <= order_; ++n) {
                    auto& m = moments_[s * static_cast<std::size_t>(order_ + 1) + static_cast<std::size_t>(n)];
                    m[0] += term * refs.i1f[d];
                    m[1] += term * refs.q1f[d];
                    m[2] += term * refs.i2f[d];
                    m[3] += term * refs.q2f[d];
                    term *= neg_k / static_cast<double>(n + 1);
                }
            }
        }
        // background ratios from the zero-concentration frame
        bg_ratio_.resize(slots_.size());
        for (std::size_t s = 0; s < slots_.size(); ++s) {
            const auto& m0 = moments_[s * static_cast<std::size_t>(order_ + 1)];
            const double r1f0 = std::sqrt(m0[0] * m0[0] + m0[1] * m0[1]);
            if (!(r1f0 > 1e-30))
                throw numeric_error("model: vanishing background 1f magnitude at slot " +
                                    std::to_string(slots_[s] + 1));
            bg_ratio_[s] = {m0[2] / r1f0, m0[3] / r1f0};
        }
    }

    // spectrum on the fully parallel grid (every selected slot)
    std::vector<double> fp_values(double X) const {
        check_x(X);
        std::vector<double> out(slots_.size());
        for (std::size_t s = 0; s < slots_.size(); ++s) out[s] = eval_slot(s, X);
        return out;
    }

    // spectrum on the quasi-parallel grid of one beam (that beam's slots)
    std::vector<double> qp_values(double X, int beam) const {
        check_x(X);
        std::vector<double> out;
        for (std::size_t s = 0; s < slots_.size(); ++s)
            if (beam_index(static_cast<long long>(slots_[s]) + 1, n_beams_) == beam)
                out.push_back(eval_slot(s, X));
        return out;
    }

    double peak(double X) const {
        const auto v = fp_values(X);
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    }

    const std::vector<std::size_t>& selected_slots() const { return slots_; }
    int order() const { return order_; }

  private:
    static int choose_order(double u) {
        // smallest order whose Taylor tail of exp(-u) is below ~1e-18
        double term = 1.0;
        int n = 0;
        while (term > 1e-18 && n < 60) {
            ++n;
            term *= u / static_cast<double>(n);
        }
        return std::max(n, 3);
    }

    void check_x(double X) const {
        if (X < 0.0 || X > x_max_ * (1.0 + 1e-12))
            throw config_error("model: concentration outside the prepared range [0, " +
                               std::to_string(x_max_) + "]");
    }

    double eval_slot(std::size_t s, double X) const {
        const auto* m = &moments_[s * static_cast<std::size_t>(order_ + 1)];
        double q[4] = {0.0, 0.0, 0.0, 0.0};
        for (int n = order_; n >= 0; --n)
            for (int c = 0; c < 4; ++c) q[c] = q[c] * X + m[static_cast<std::size_t>(n)][static_cast<std::size_t>(c)];
        const double r1f = std::sqrt(q[0] * q[0] + q[1] * q[1]);
        if (!(r1f > 1e-30))
            throw numeric_error("model: vanishing 1f magnitude at slot " + std::to_string(slots_[s] + 1));
        const double dx = q[2] / r1f - bg_ratio_[s][0];
        const double dy = q[3] / r1f - bg_ratio_[s][1];
        return std::sqrt(dx * dx + dy * dy);
    }

    int n_beams_;
    double x_max_;
    int order_ = 0;
    std::vector<std::size_t> slots_;                 // selected global slots, 0-based
    std::vector<std::array<double, 4>> moments_;     // [slot][order] flattened
    std::vector<std::array<double, 2>> bg_ratio_;    // X0_2f/R0_1f, Y0_2f/R0_1f
};

// Model spectrum on the measurement grid of `scheme`; `beam` selects the
// slot pattern for the QP grid.
inline HarmonicSpectrum model_spectrum(const ForwardModel& model, double X, Scheme scheme, int beam) {
    HarmonicSpectrum s;
    s.beam = beam;
    s.values = (scheme == Scheme::fp) ? model.fp_values(X) : model.qp_values(X, beam);
    return s;
}

}  // namespace wmstomo
