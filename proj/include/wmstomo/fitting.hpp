#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wmstomo/model.hpp"
#include "wmstomo/noise.hpp"

namespace wmstomo {

struct FitOptions {
    double x_lo = 0.0;
    double x_hi = 0.05;
    double x_tol = 1e-9;  // absolute tolerance in mole fraction
    int max_iter = 200;
};

struct FitResult {
    double X_hat = 0.0;
    std::vector<double> residuals;  // measured - fitted, signed
    double residual_mean = 0.0;     // mean |residual|
    double residual_std = 0.0;      // population std of signed residuals
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// Bounded scalar minimization, Brent style: golden-section fallback with
// parabolic steps when they are trustworthy.
template <typename Fn>
double brent_min(Fn&& f, double lo, double hi, double x_init, double tol, int max_iter,
                 int& iterations) {
    constexpr double golden = 0.3819660112501051;
    double a = lo, b = hi;
    double x = std::min(std::max(x_init, a + tol), b - tol);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double e = 0.0, d = 0.0;
    iterations = 0;
    while (iterations < max_iter) {
        ++iterations;
        const double m = 0.5 * (a + b);
        const double t2 = 2.0 * tol;
        if (std::abs(x - m) <= t2 - 0.5 * (b - a)) break;
        bool golden_step = true;
        if (std::abs(e) > tol) {
            // parabola through (v, fv), (w, fw), (x, fx)
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_old = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < t2 || b - u < t2) d = (x < m) ? tol : -tol;
                golden_step = false;
            }
        }
        if (golden_step) {
            e = (x < m) ? b - x : a - x;
            d = golden * e;
        }
        const double u = (std::abs(d) >= tol) ? x + d : x + ((d > 0.0) ? tol : -tol);
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x)
                b = x;
            else
                a = x;
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    return x;
}

inline double sse(std::span<const double> measured, const std::vector<double>& model) {
    double acc = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const double r = measured[i] - model[i];
        acc += r * r;
    }
    return acc;
}

}  // namespace detail

// Least-squares fit of the concentration against a model spectrum on the
// same wavelength grid. `model` maps X to the model values.
template <typename ModelFn>
FitResult fit_concentration(std::span<const double> measured, ModelFn&& model, double X0,
                            const FitOptions& opts = {}) {
    if (measured.empty()) throw config_error("fit: measured spectrum is empty");
    if (!(X0 > 0.0)) throw config_error("fit: initial guess must be positive");
    auto objective = [&](double X) {
        const std::vector<double> m = model(X);
        if (m.size() != measured.size()) throw config_error("fit: model grid does not match measurement");
        return detail::sse(measured, m);
    };
    const double x_init = std::min(std::max(X0, opts.x_lo), opts.x_hi);
    const double f_init = objective(x_init);
    FitResult res;
    res.X_hat = detail::brent_min(objective, opts.x_lo, opts.x_hi, x_init, opts.x_tol,
                                  opts.max_iter, res.iterations);
    const std::vector<double> fitted = model(res.X_hat);
    const double f_best = detail::sse(measured, fitted);
    res.converged = res.iterations < opts.max_iter && f_best <= f_init;
    res.residuals.resize(measured.size());
    double sum_abs = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        res.residuals[i] = measured[i] - fitted[i];
        sum_abs += std::abs(res.residuals[i]);
        sum += res.residuals[i];
    }
    const double n = static_cast<double>(measured.size());
    res.residual_mean = sum_abs / n;
    const double mean = sum / n;
    double var = 0.0;
    for (double r : res.residuals) var += (r - mean) * (r - mean);
    res.residual_std = std::sqrt(var / n);
    return res;
}

// Per-scheme aggregate over an ensemble: mean and run-to-run standard
// deviation of the per-run mean absolute fitting residual.
struct SchemeAggregate {
    double mean = 0.0;
    double stddev = 0.0;
};

struct BeamComparison {
    int beam = 0;
    SchemeAggregate fp, qp;
    double mean_diff_percent = 0.0;  // |FP - QP| / FP * 100
    double std_diff_percent = 0.0;
};

struct ComparisonStats {
    std::vector<BeamComparison> beams;
    double max_mean_diff_percent = 0.0;
    double max_std_diff_percent = 0.0;
};

// Everything compare_fp_qp needs to regenerate the measurement chain.
struct EnsembleScenario {
    LaserDriveConfig drive;
    AbsorptionLine line;
    std::vector<BeamGasState> beams;
    MuxSchedule sched;
    ScanPortion portion = ScanPortion::falling;
    bool noise_enabled = true;
    NoiseSpec env, pink, white;
    double phase = 0.0;
    FitOptions fit;
    double fit_x0 = 0.005;
};

namespace detail {

struct PreparedEnsemble {
    PipelineConfig cfg;
    std::vector<SampledWaveform> clean;        // transmission, no noise
    std::vector<SampledWaveform> backgrounds;  // absorption-free
    std::vector<ForwardModel> models;          // one per beam, when requested
};

inline PreparedEnsemble prepare_ensemble(const EnsembleScenario& sc, bool build_models = true) {
    if (sc.beams.size() != static_cast<std::size_t>(sc.sched.n_beams))
        throw config_error("ensemble: beam state count must equal the schedule's N");
    sc.sched.validate();
    const std::size_t periods = sc.drive.periods_per_scan();
    if (periods % static_cast<std::size_t>(sc.sched.periods_per_slot) != 0)
        throw config_error("ensemble: modulation periods per scan not divisible by c");
    PreparedEnsemble p;
    p.cfg.sched = sc.sched;
    p.cfg.slots_per_scan = periods / static_cast<std::size_t>(sc.sched.periods_per_slot);
    p.cfg.portion = sc.portion;
    p.cfg.phase = sc.phase;
    const std::size_t used =
        (sc.portion == ScanPortion::full) ? p.cfg.slots_per_scan : p.cfg.slots_per_scan / 2;
    if (used % static_cast<std::size_t>(sc.sched.n_beams) != 0)
        throw config_error("ensemble: used slots per scan not divisible by N, beams would get unequal coverage");
    for (const auto& gas : sc.beams) {
        const BeamComponents c =
            synthesize_components(sc.drive, gas, sc.line, sc.sched.f_d, 1);
        SampledWaveform clean, bg;
        clean.f_d = bg.f_d = sc.sched.f_d;
        clean.samples.resize(c.intensity0.size());
        bg.samples = c.intensity0;
        for (std::size_t d = 0; d < clean.samples.size(); ++d)
            clean.samples[d] = transmit(c.intensity0[d], c.alpha_per_x[d] * gas.X);
        p.clean.push_back(std::move(clean));
        p.backgrounds.push_back(std::move(bg));
        if (build_models) p.models.emplace_back(sc.drive, gas, sc.line, p.cfg, sc.fit.x_hi);
    }
    return p;
}

inline std::vector<SampledWaveform> noisy_run(const PreparedEnsemble& p, const EnsembleScenario& sc,
                                              std::uint64_t master_seed, int run) {
    std::vector<SampledWaveform> noisy;
    noisy.reserve(p.clean.size());
    for (std::size_t b = 0; b < p.clean.size(); ++b) {
        if (!sc.noise_enabled) {
            noisy.push_back(p.clean[b]);
            continue;
        }
        const std::uint64_t run_seed = derive_seed(master_seed, static_cast<std::uint64_t>(run));
        NoiseSpec env = sc.env, pink = sc.pink, white = sc.white;
        env.seed = derive_seed(run_seed, b, 0);
        pink.seed = derive_seed(run_seed, b, 1);
        white.seed = derive_seed(run_seed, b, 2);
        noisy.push_back(apply_noise_chain(p.clean[b], env, pink, white));
    }
    return noisy;
}

}  // namespace detail

// Runs the same noisy transmission signals through the FP and QP pipelines,
// fits every beam under both, and aggregates the per-run residual statistics.
inline ComparisonStats compare_fp_qp(int n_runs, const EnsembleScenario& sc,
                                     std::uint64_t master_seed) {
    if (n_runs < 2) throw config_error("compare: need at least 2 runs");
    const detail::PreparedEnsemble p = detail::prepare_ensemble(sc);
    const int n_beams = sc.sched.n_beams;
    std::vector<std::vector<double>> means_fp(static_cast<std::size_t>(n_beams)),
        means_qp(static_cast<std::size_t>(n_beams));

    for (int run = 0; run < n_runs; ++run) {
        const auto noisy = detail::noisy_run(p, sc, master_seed, run);
        const auto qp = run_qp_pipeline(noisy, p.backgrounds, p.cfg);
        const auto fp = run_fp_pipeline(noisy, p.backgrounds, p.cfg);
        for (int b = 0; b < n_beams; ++b) {
            const auto& model = p.models[static_cast<std::size_t>(b)];
            const auto fit_qp = fit_concentration(
                qp[static_cast<std::size_t>(b)].values,
                [&](double X) { return model.qp_values(X, b + 1); }, sc.fit_x0, sc.fit);
            const auto fit_fp = fit_concentration(
                fp[static_cast<std::size_t>(b)].values, [&](double X) { return model.fp_values(X); },
                sc.fit_x0, sc.fit);
            means_qp[static_cast<std::size_t>(b)].push_back(fit_qp.residual_mean);
            means_fp[static_cast<std::size_t>(b)].push_back(fit_fp.residual_mean);
        }
    }

    auto aggregate = [](const std::vector<double>& v) {
        SchemeAggregate a;
        for (double x : v) a.mean += x;
        a.mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - a.mean) * (x - a.mean);
        a.stddev = std::sqrt(var / static_cast<double>(v.size()));
        return a;
    };
    auto diff_percent = [](double fp, double qp) {
        if (fp == qp) return 0.0;
        if (fp == 0.0) return 0.0;
        return std::abs(fp - qp) / fp * 100.0;
    };

    ComparisonStats stats;
    for (int b = 0; b < n_beams; ++b) {
        BeamComparison c;
        c.beam = b + 1;
        c.fp = aggregate(means_fp[static_cast<std::size_t>(b)]);
        c.qp = aggregate(means_qp[static_cast<std::size_t>(b)]);
        c.mean_diff_percent = diff_percent(c.fp.mean, c.qp.mean);
        c.std_diff_percent = diff_percent(c.fp.stddev, c.qp.stddev);
        stats.max_mean_diff_percent = std::max(stats.max_mean_diff_percent, c.mean_diff_percent);
        stats.max_std_diff_percent = std::max(stats.max_std_diff_percent, c.std_diff_percent);
        stats.beams.push_back(c);
    }
    return stats;
}

}  // namespace wmstomo
