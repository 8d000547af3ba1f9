#pragma once

#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wmstomo/csv.hpp"
#include "wmstomo/scenario.hpp"

namespace wmstomo {

namespace detail {

inline std::string beam_file(int beam, const char* scheme) {
    std::ostringstream name;
    name << "beam_" << std::setw(2) << std::setfill('0') << beam << "_" << scheme << ".csv";
    return name.str();
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory: " + dir + " (" + ec.message() + ")");
}

}  // namespace detail

// Single-run simulation outputs for a beams-type scenario; when both schemes
// are requested they share one noise realization.
struct SimulateResult {
    PipelineConfig cfg;
    std::vector<HarmonicSpectrum> qp;
    std::vector<HarmonicSpectrum> fp;
    std::vector<QuadratureFrame> mux_frames;      // for the optional frame dump
    std::vector<QuadratureFrame> mux_bg_frames;
};

inline SimulateResult simulate_beams(const Scenario& sc) {
    const EnsembleScenario es = to_ensemble(sc);
    const detail::PreparedEnsemble p = detail::prepare_ensemble(es, false);
    const auto noisy = detail::noisy_run(p, es, sc.master_seed, 0);
    SimulateResult r;
    r.cfg = p.cfg;
    if (sc.scheme == Scheme::qp || sc.scheme == Scheme::both)
        r.qp = run_qp_pipeline(noisy, p.backgrounds, p.cfg);
    if (sc.scheme == Scheme::fp || sc.scheme == Scheme::both)
        r.fp = run_fp_pipeline(noisy, p.backgrounds, p.cfg);
    const SampledWaveform mux = multiplex(noisy, p.cfg.sched);
    const SampledWaveform bg_mux = multiplex(p.backgrounds, p.cfg.sched);
    r.mux_frames = demodulate_stream(mux, p.cfg.sched, p.cfg.phase);
    r.mux_bg_frames = demodulate_stream(bg_mux, p.cfg.sched, p.cfg.phase);
    return r;
}

inline void write_spectra(const std::string& out_dir, const std::vector<HarmonicSpectrum>& spectra,
                          const char* scheme_tag, const PipelineConfig& cfg, std::size_t total_slots) {
    for (const auto& spec : spectra) {
        const auto slots = spectrum_slots(total_slots, cfg.slots_per_scan, cfg.portion,
                                          cfg.sched.n_beams, spec.beam,
                                          std::string(scheme_tag) == "qp");
        if (slots.size() != spec.values.size())
            throw numeric_error("spectra: slot bookkeeping mismatch");
        CsvTable t;
        t.header = {"sample", "slot", "s2f1f"};
        for (std::size_t i = 0; i < spec.values.size(); ++i)
            t.rows.push_back({static_cast<double>(i), static_cast<double>(slots[i]), spec.values[i]});
        write_csv(out_dir + "/" + detail::beam_file(spec.beam, scheme_tag), t);
    }
}

inline void write_frames(const std::string& path, const std::vector<QuadratureFrame>& sig,
                         const std::vector<QuadratureFrame>& bg, int n_beams) {
    CsvTable t;
    t.header = {"slot", "beam", "x1f", "y1f", "x2f", "y2f", "s2f1f"};
    for (std::size_t j = 0; j < sig.size(); ++j) {
        const auto& f = sig[j];
        t.rows.push_back({static_cast<double>(f.slot),
                          static_cast<double>(beam_index(static_cast<long long>(f.slot), n_beams)),
                          f.x1f, f.y1f, f.x2f, f.y2f, normalize_2f1f(f, bg[j])});
    }
    write_csv(path, t);
}

// simulate: emit per-beam spectra (and optionally the quadrature frames).
inline void cmd_simulate(const Scenario& sc, const std::string& out_dir, bool dump_frames = false) {
    detail::ensure_dir(out_dir);
    const SimulateResult r = simulate_beams(sc);
    const std::size_t total_slots = r.mux_frames.size();
    if (!r.qp.empty()) write_spectra(out_dir, r.qp, "qp", r.cfg, total_slots);
    if (!r.fp.empty()) write_spectra(out_dir, r.fp, "fp", r.cfg, total_slots);
    if (dump_frames)
        write_frames(out_dir + "/frames_qp.csv", r.mux_frames, r.mux_bg_frames, r.cfg.sched.n_beams);
}

// compare: FP-vs-QP residual statistics over an ensemble, one CSV row per
// beam plus a final row (beam 0) holding the column-wise maxima.
inline ComparisonStats cmd_compare(const Scenario& sc, const std::string& out_dir,
                                   std::optional<int> runs_override = {},
                                   std::optional<std::uint64_t> seed_override = {}) {
    if (sc.scheme != Scheme::both)
        throw config_error("compare requires run.scheme = \"both\"");
    const int runs = runs_override.value_or(sc.runs);
    const std::uint64_t seed = seed_override.value_or(sc.master_seed);
    const ComparisonStats stats = compare_fp_qp(runs, to_ensemble(sc), seed);
    detail::ensure_dir(out_dir);
    CsvTable t;
    t.header = {"beam", "fp_mean", "fp_std", "qp_mean", "qp_std", "mean_diff_percent",
                "std_diff_percent"};
    double max_cols[6] = {0, 0, 0, 0, 0, 0};
    for (const auto& b : stats.beams) {
        t.rows.push_back({static_cast<double>(b.beam), b.fp.mean, b.fp.stddev, b.qp.mean, b.qp.stddev,
                          b.mean_diff_percent, b.std_diff_percent});
        const double vals[6] = {b.fp.mean, b.fp.stddev, b.qp.mean, b.qp.stddev,
                                b.mean_diff_percent, b.std_diff_percent};
        for (int c = 0; c < 6; ++c) max_cols[c] = std::max(max_cols[c], vals[c]);
    }
    t.rows.push_back({0.0, max_cols[0], max_cols[1], max_cols[2], max_cols[3], max_cols[4], max_cols[5]});
    write_csv(out_dir + "/compare_fp_qp.csv", t);
    return stats;
}

// Full tomographic chain for a phantom scenario.
struct TomoResult {
    BeamGeometry geom;
    PixelGrid grid;
    SystemMatrix matrix;
    ConcentrationImage phantom;
    std::vector<HarmonicSpectrum> spectra;  // QP spectrum per beam
    double kappa = 0.0;                     // absorbance per mole-fraction*cm
    double ref_absorbance = 0.0;            // A_s
    double ref_peak = 0.0;                  // P_s
    std::vector<double> absorbance;         // A_m per beam
    ConcentrationImage image;
};

// Synthesize per-beam transmission from the phantom's path integrals, run
// the QP chain hub by hub, extract peak absorbances, and reconstruct.
// `preloaded` substitutes previously emitted spectra for the synthesis step.
inline TomoResult run_tomo_chain(const Scenario& sc,
                                 const std::vector<HarmonicSpectrum>* preloaded = nullptr) {
    if (!sc.has_tomo) throw config_error("reconstruct requires a tomo section");
    TomoResult r;
    r.geom = build_geometry(sc.tomo.projections, sc.tomo.beams_per_projection, sc.tomo.spacing_cm,
                            sc.tomo.beam_length_cm);
    r.grid = PixelGrid::centered(sc.tomo.nx, sc.tomo.ny, sc.tomo.extent_cm);
    r.matrix = system_matrix(r.geom, r.grid);
    r.phantom = gaussian_phantom(r.grid, sc.tomo.phantom_center, sc.tomo.phantom_sigma_cm,
                                 sc.tomo.phantom_peak, sc.tomo.phantom_baseline);
    r.kappa = absorbance_factor(sc.line, sc.tomo.temperature_k, sc.tomo.pressure_atm);

    // peak-to-absorbance reference pair from a dilute-width simulation at the
    // reference state
    const std::size_t periods = sc.drive.periods_per_scan();
    PipelineConfig cfg;
    cfg.sched = sc.sched;
    cfg.slots_per_scan = periods / static_cast<std::size_t>(sc.sched.periods_per_slot);
    cfg.portion = sc.portion;
    const BeamGasState ref_gas{sc.tomo.ref_path_length_cm, sc.tomo.pressure_atm,
                               sc.tomo.temperature_k, 0.0};
    const ForwardModel ref_model(sc.drive, ref_gas, sc.line, cfg,
                                 std::max(0.05, sc.tomo.ref_mole_fraction));
    r.ref_peak = ref_model.peak(sc.tomo.ref_mole_fraction);
    r.ref_absorbance = r.kappa * sc.tomo.ref_mole_fraction * sc.tomo.ref_path_length_cm;

    const int n_beams_total = static_cast<int>(r.geom.beams.size());
    if (preloaded) {
        if (static_cast<int>(preloaded->size()) != n_beams_total)
            throw config_error("reconstruct: expected " + std::to_string(n_beams_total) +
                               " spectra, got " + std::to_string(preloaded->size()));
        r.spectra = *preloaded;
    } else {
        // path-integrated concentration per beam from the phantom
        std::vector<double> path_conc(static_cast<std::size_t>(n_beams_total), 0.0);
        for (int i = 0; i < n_beams_total; ++i)
            for (const auto& e : r.matrix.rows[static_cast<std::size_t>(i)])
                path_conc[static_cast<std::size_t>(i)] +=
                    e.chord * r.phantom.values[static_cast<std::size_t>(e.pixel)];

        // shared dilute-limit absorbance curve; beams differ only in the
        // exponent scale C_i
        const BeamGasState unit_gas{1.0, sc.tomo.pressure_atm, sc.tomo.temperature_k, 0.0};
        const BeamComponents c = synthesize_components(sc.drive, unit_gas, sc.line, sc.sched.f_d, 1);
        SampledWaveform background;
        background.f_d = sc.sched.f_d;
        background.samples = c.intensity0;

        const int group = sc.sched.n_beams;
        if (n_beams_total % group != 0)
            throw config_error("reconstruct: beam count not a multiple of beams_per_adc");
        r.spectra.resize(static_cast<std::size_t>(n_beams_total));
        std::vector<SampledWaveform> beams(static_cast<std::size_t>(group));
        std::vector<SampledWaveform> backgrounds(static_cast<std::size_t>(group), background);
        for (int g = 0; g < n_beams_total / group; ++g) {
            for (int b = 0; b < group; ++b) {
                const int global = g * group + b;
                SampledWaveform w;
                w.f_d = sc.sched.f_d;
                w.samples.resize(c.intensity0.size());
                const double conc = path_conc[static_cast<std::size_t>(global)];
                for (std::size_t d = 0; d < w.samples.size(); ++d)
                    w.samples[d] = transmit(c.intensity0[d], c.alpha_per_x[d] * conc);
                if (sc.noise_enabled) {
                    NoiseSpec env = sc.env, pink = sc.pink, white = sc.white;
                    const std::uint64_t run_seed = derive_seed(sc.master_seed, 0);
                    env.seed = derive_seed(run_seed, static_cast<std::uint64_t>(global), 0);
                    pink.seed = derive_seed(run_seed, static_cast<std::uint64_t>(global), 1);
                    white.seed = derive_seed(run_seed, static_cast<std::uint64_t>(global), 2);
                    w = apply_noise_chain(w, env, pink, white);
                }
                beams[static_cast<std::size_t>(b)] = std::move(w);
            }
            auto group_spectra = run_qp_pipeline(beams, backgrounds, cfg);
            for (int b = 0; b < group; ++b) {
                group_spectra[static_cast<std::size_t>(b)].beam = g * group + b + 1;
                r.spectra[static_cast<std::size_t>(g * group + b)] =
                    std::move(group_spectra[static_cast<std::size_t>(b)]);
            }
        }
    }

    r.absorbance.resize(static_cast<std::size_t>(n_beams_total));
    for (int i = 0; i < n_beams_total; ++i)
        r.absorbance[static_cast<std::size_t>(i)] =
            peak_absorbance(r.spectra[static_cast<std::size_t>(i)], r.ref_peak, r.ref_absorbance);

    // absorbance -> path concentration, then SART in mole fraction
    std::vector<double> b(r.absorbance.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = r.absorbance[i] / r.kappa;
    r.image = sart_reconstruct(r.matrix, b, r.grid, sc.tomo.sart);
    return r;
}

inline void write_image(const std::string& out_dir, const ConcentrationImage& img) {
    CsvTable t;
    for (int ix = 0; ix < img.grid.nx; ++ix) t.header.push_back("c" + std::to_string(ix));
    for (int iy = 0; iy < img.grid.ny; ++iy) {
        std::vector<double> row(static_cast<std::size_t>(img.grid.nx));
        for (int ix = 0; ix < img.grid.nx; ++ix)
            row[static_cast<std::size_t>(ix)] =
                img.values[static_cast<std::size_t>(iy * img.grid.nx + ix)];
        t.rows.push_back(std::move(row));
    }
    write_csv(out_dir + "/image.csv", t);
    nlohmann::json meta;
    meta["nx"] = img.grid.nx;
    meta["ny"] = img.grid.ny;
    meta["extent_cm"] = img.grid.extent;
    meta["origin_x_cm"] = img.grid.origin.x;
    meta["origin_y_cm"] = img.grid.origin.y;
    meta["units"] = "mole_fraction";
    meta["row_order"] = "iy = 0 at origin, row-major";
    std::ofstream out(out_dir + "/image_meta.json");
    if (!out) throw io_error("cannot write image metadata");
    out << meta.dump(2) << '\n';
}

inline void cmd_reconstruct(const Scenario& sc, const std::string& out_dir,
                            const std::string& spectra_dir = "") {
    detail::ensure_dir(out_dir);
    TomoResult r;
    if (!spectra_dir.empty()) {
        const int n = sc.tomo.projections * sc.tomo.beams_per_projection;
        std::vector<HarmonicSpectrum> loaded;
        for (int i = 1; i <= n; ++i) {
            const CsvTable t = read_csv(spectra_dir + "/" + detail::beam_file(i, "qp"));
            if (t.header != std::vector<std::string>{"sample", "slot", "s2f1f"})
                throw io_error("unexpected spectrum schema in " + detail::beam_file(i, "qp"));
            HarmonicSpectrum s;
            s.beam = i;
            for (const auto& row : t.rows) s.values.push_back(row[2]);
            loaded.push_back(std::move(s));
        }
        r = run_tomo_chain(sc, &loaded);
    } else {
        r = run_tomo_chain(sc);
    }
    write_image(out_dir, r.image);
    CsvTable sino;
    sino.header = {"beam", "angle_deg", "offset_cm", "absorbance"};
    for (std::size_t i = 0; i < r.geom.beams.size(); ++i)
        sino.rows.push_back({static_cast<double>(i + 1), r.geom.beams[i].angle_deg,
                             r.geom.beams[i].offset, r.absorbance[i]});
    write_csv(out_dir + "/sinogram.csv", sino);
}

// simulate for a tomo scenario: emit the per-beam spectra the reconstruct
// stage consumes, so the two stages can be decoupled exactly.
inline void cmd_simulate_tomo(const Scenario& sc, const std::string& out_dir) {
    detail::ensure_dir(out_dir);
    const TomoResult r = run_tomo_chain(sc);
    const std::size_t periods = sc.drive.periods_per_scan();
    PipelineConfig cfg;
    cfg.sched = sc.sched;
    cfg.slots_per_scan = periods / static_cast<std::size_t>(sc.sched.periods_per_slot);
    cfg.portion = sc.portion;
    // slot bookkeeping is per hub group; beams repeat the group pattern
    for (const auto& spec : r.spectra) {
        const int local_beam = (spec.beam - 1) % sc.sched.n_beams + 1;
        const auto slots = spectrum_slots(cfg.slots_per_scan, cfg.slots_per_scan, cfg.portion,
                                          cfg.sched.n_beams, local_beam, true);
        if (slots.size() != spec.values.size()) throw numeric_error("spectra: slot bookkeeping mismatch");
        CsvTable t;
        t.header = {"sample", "slot", "s2f1f"};
        for (std::size_t i = 0; i < spec.values.size(); ++i)
            t.rows.push_back({static_cast<double>(i), static_cast<double>(slots[i]), spec.values[i]});
        write_csv(out_dir + "/" + detail::beam_file(spec.beam, "qp"), t);
    }
}

}  // namespace wmstomo
