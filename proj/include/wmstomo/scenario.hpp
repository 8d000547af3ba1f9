#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmstomo/fitting.hpp"
#include "wmstomo/linelist.hpp"
#include "wmstomo/tomography.hpp"

namespace wmstomo {

// Tomographic section: beam array, pixel grid, test phantom, solver
// settings, and the gas conditions shared by all beams.
struct TomoSection {
    int projections = 4;
    int beams_per_projection = 8;
    double spacing_cm = 1.8;
    double beam_length_cm = 36.76;
    int nx = 15, ny = 15;
    double extent_cm = 14.4;
    double pressure_atm = 1.0;
    double temperature_k = 296.0;
    Point2 phantom_center{0.0, 0.0};
    double phantom_sigma_cm = 2.5;
    double phantom_peak = 0.01;
    double phantom_baseline = 0.0;
    double ref_path_length_cm = 36.0;
    double ref_mole_fraction = 0.005;
    SartOptions sart;
};

struct Scenario {
    std::filesystem::path source;  // scenario file, for relative paths
    LaserDriveConfig drive;
    std::string line_list_file;
    double line_nu0 = 0.0;
    AbsorptionLine line;
    std::vector<BeamGasState> beams;
    MuxSchedule sched;
    bool noise_enabled = false;
    NoiseSpec env, pink, white;
    Scheme scheme = Scheme::both;
    ScanPortion portion = ScanPortion::falling;
    int runs = 1;
    std::uint64_t master_seed = 1;
    bool has_tomo = false;
    TomoSection tomo;
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool ok() const { return violations.empty(); }
};

namespace detail {

using json = nlohmann::json;

inline void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw config_error(path + ": expected an object");
}

// Unknown fields are configuration errors, never ignored.
inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw config_error(path + ": unknown field '" + it.key() + "'");
}

inline const json& require(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw config_error(path + ": missing field '" + key + "'");
    return j.at(key);
}

inline double num(const json& j, const std::string& path, const char* key) {
    const json& v = require(j, path, key);
    if (!v.is_number()) throw config_error(path + "." + key + ": expected a number");
    return v.get<double>();
}

inline double num_or(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw config_error(path + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

inline int integer(const json& j, const std::string& path, const char* key) {
    const json& v = require(j, path, key);
    if (!v.is_number_integer()) throw config_error(path + "." + key + ": expected an integer");
    return v.get<int>();
}

inline std::string str(const json& j, const std::string& path, const char* key) {
    const json& v = require(j, path, key);
    if (!v.is_string()) throw config_error(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline bool boolean_or(const json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw config_error(path + "." + key + ": expected a boolean");
    return j.at(key).get<bool>();
}

inline std::uint64_t u64_or(const json& j, const std::string& path, const char* key,
                            std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer() && !j.at(key).is_number_unsigned())
        throw config_error(path + "." + key + ": expected an integer seed");
    return j.at(key).get<std::uint64_t>();
}

inline LaserDriveConfig parse_drive(const json& j) {
    expect_object(j, "drive");
    check_keys(j, "drive",
               {"f_s_hz", "f_m_hz", "i_bar", "i1_s", "i2_s", "i1_m", "i2_m", "phi1_s_rad",
                "phi2_s_rad", "phi1_m_rad", "phi2_m_rad", "nu_bar_cm1", "a1_s_cm1", "a2_s_cm1",
                "a1_m_cm1", "a2_m_cm1", "psi1_s_rad", "psi2_s_rad", "psi1_m_rad", "psi2_m_rad"});
    LaserDriveConfig d;
    d.f_s = num(j, "drive", "f_s_hz");
    d.f_m = num(j, "drive", "f_m_hz");
    d.i_bar = num(j, "drive", "i_bar");
    d.i1_s = num(j, "drive", "i1_s");
    d.i2_s = num_or(j, "drive", "i2_s", 0.0);
    d.i1_m = num(j, "drive", "i1_m");
    d.i2_m = num_or(j, "drive", "i2_m", 0.0);
    d.phi1_s = num_or(j, "drive", "phi1_s_rad", 0.0);
    d.phi2_s = num_or(j, "drive", "phi2_s_rad", 0.0);
    d.phi1_m = num_or(j, "drive", "phi1_m_rad", 0.0);
    d.phi2_m = num_or(j, "drive", "phi2_m_rad", 0.0);
    d.nu_bar = num(j, "drive", "nu_bar_cm1");
    d.a1_s = num(j, "drive", "a1_s_cm1");
    d.a2_s = num_or(j, "drive", "a2_s_cm1", 0.0);
    d.a1_m = num(j, "drive", "a1_m_cm1");
    d.a2_m = num_or(j, "drive", "a2_m_cm1", 0.0);
    d.psi1_s = num_or(j, "drive", "psi1_s_rad", 0.0);
    d.psi2_s = num_or(j, "drive", "psi2_s_rad", 0.0);
    d.psi1_m = num_or(j, "drive", "psi1_m_rad", 0.0);
    d.psi2_m = num_or(j, "drive", "psi2_m_rad", 0.0);
    return d;
}

inline NoiseSpec parse_noise_spec(const json& j, const std::string& path, NoiseKind kind) {
    expect_object(j, path);
    if (kind == NoiseKind::environmental)
        check_keys(j, path, {"snr_db", "cutoff_hz", "seed"});
    else
        check_keys(j, path, {"snr_db", "seed"});
    NoiseSpec s;
    s.kind = kind;
    s.snr_db = num(j, path, "snr_db");
    if (kind == NoiseKind::environmental) s.cutoff_hz = num(j, path, "cutoff_hz");
    s.seed = u64_or(j, path, "seed", 0);
    return s;
}

}  // namespace detail

// Strict parse: every field is either consumed or rejected. Semantic
// cross-field checks live in validate_scenario.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    detail::json j;
    try {
        j = detail::json::parse(text);
    } catch (const detail::json::parse_error& e) {
        // report line/column computed from the byte offset
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw config_error(path + ": parse error at line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": " + e.what());
    }
    detail::expect_object(j, path);
    detail::check_keys(j, "scenario", {"drive", "line", "beams", "schedule", "noise", "run", "tomo"});

    Scenario sc;
    sc.source = std::filesystem::path(path);
    sc.drive = detail::parse_drive(detail::require(j, "scenario", "drive"));

    const auto& jl = detail::require(j, "scenario", "line");
    detail::expect_object(jl, "line");
    detail::check_keys(jl, "line", {"list_file", "nu0_cm1"});
    sc.line_list_file = detail::str(jl, "line", "list_file");
    sc.line_nu0 = detail::num(jl, "line", "nu0_cm1");
    std::filesystem::path list_path(sc.line_list_file);
    if (list_path.is_relative()) list_path = sc.source.parent_path() / list_path;
    sc.line = select_line(load_line_list(list_path.string()), sc.line_nu0);

    if (j.contains("beams")) {
        const auto& jb = j.at("beams");
        if (!jb.is_array()) throw config_error("beams: expected an array");
        for (std::size_t i = 0; i < jb.size(); ++i) {
            const std::string bp = "beams[" + std::to_string(i) + "]";
            detail::expect_object(jb[i], bp);
            detail::check_keys(jb[i], bp,
                               {"path_length_cm", "pressure_atm", "temperature_k", "mole_fraction"});
            BeamGasState g;
            g.L = detail::num(jb[i], bp, "path_length_cm");
            g.P = detail::num(jb[i], bp, "pressure_atm");
            g.T = detail::num(jb[i], bp, "temperature_k");
            g.X = detail::num(jb[i], bp, "mole_fraction");
            sc.beams.push_back(g);
        }
    }

    const auto& js = detail::require(j, "scenario", "schedule");
    detail::expect_object(js, "schedule");
    detail::check_keys(js, "schedule", {"beams_per_adc", "periods_per_slot", "f_d_hz", "t_mux_s"});
    sc.sched.n_beams = detail::integer(js, "schedule", "beams_per_adc");
    sc.sched.periods_per_slot = detail::integer(js, "schedule", "periods_per_slot");
    sc.sched.f_d = detail::num(js, "schedule", "f_d_hz");
    sc.sched.f_m = sc.drive.f_m;
    sc.sched.t_mux = detail::num_or(js, "schedule", "t_mux_s", 0.0);

    if (j.contains("noise")) {
        const auto& jn = j.at("noise");
        detail::expect_object(jn, "noise");
        detail::check_keys(jn, "noise", {"enabled", "environmental", "pink", "white"});
        sc.noise_enabled = detail::boolean_or(jn, "noise", "enabled", true);
        sc.env = detail::parse_noise_spec(detail::require(jn, "noise", "environmental"),
                                          "noise.environmental", NoiseKind::environmental);
        sc.pink = detail::parse_noise_spec(detail::require(jn, "noise", "pink"), "noise.pink",
                                           NoiseKind::pink);
        sc.white = detail::parse_noise_spec(detail::require(jn, "noise", "white"), "noise.white",
                                            NoiseKind::white);
    }

    const auto& jr = detail::require(j, "scenario", "run");
    detail::expect_object(jr, "run");
    detail::check_keys(jr, "run", {"scheme", "portion", "runs", "master_seed"});
    sc.scheme = parse_scheme(detail::str(jr, "run", "scheme"));
    sc.portion = parse_portion(detail::str(jr, "run", "portion"));
    sc.runs = jr.contains("runs") ? detail::integer(jr, "run", "runs") : 1;
    sc.master_seed = detail::u64_or(jr, "run", "master_seed", 1);

    if (j.contains("tomo")) {
        sc.has_tomo = true;
        const auto& jt = j.at("tomo");
        detail::expect_object(jt, "tomo");
        detail::check_keys(jt, "tomo", {"geometry", "grid", "gas", "phantom", "reference", "sart"});
        const auto& jg = detail::require(jt, "tomo", "geometry");
        detail::expect_object(jg, "tomo.geometry");
        detail::check_keys(jg, "tomo.geometry",
                           {"projections", "beams_per_projection", "beam_spacing_cm", "beam_length_cm"});
        sc.tomo.projections = detail::integer(jg, "tomo.geometry", "projections");
        sc.tomo.beams_per_projection = detail::integer(jg, "tomo.geometry", "beams_per_projection");
        sc.tomo.spacing_cm = detail::num(jg, "tomo.geometry", "beam_spacing_cm");
        sc.tomo.beam_length_cm = detail::num(jg, "tomo.geometry", "beam_length_cm");
        const auto& jgr = detail::require(jt, "tomo", "grid");
        detail::expect_object(jgr, "tomo.grid");
        detail::check_keys(jgr, "tomo.grid", {"nx", "ny", "extent_cm"});
        sc.tomo.nx = detail::integer(jgr, "tomo.grid", "nx");
        sc.tomo.ny = detail::integer(jgr, "tomo.grid", "ny");
        sc.tomo.extent_cm = detail::num(jgr, "tomo.grid", "extent_cm");
        const auto& jgas = detail::require(jt, "tomo", "gas");
        detail::expect_object(jgas, "tomo.gas");
        detail::check_keys(jgas, "tomo.gas", {"pressure_atm", "temperature_k"});
        sc.tomo.pressure_atm = detail::num(jgas, "tomo.gas", "pressure_atm");
        sc.tomo.temperature_k = detail::num(jgas, "tomo.gas", "temperature_k");
        const auto& jp = detail::require(jt, "tomo", "phantom");
        detail::expect_object(jp, "tomo.phantom");
        detail::check_keys(jp, "tomo.phantom",
                           {"kind", "center_x_cm", "center_y_cm", "sigma_cm", "peak_mole_fraction",
                            "baseline_mole_fraction"});
        if (detail::str(jp, "tomo.phantom", "kind") != "gaussian")
            throw config_error("tomo.phantom.kind: only 'gaussian' is supported");
        sc.tomo.phantom_center.x = detail::num(jp, "tomo.phantom", "center_x_cm");
        sc.tomo.phantom_center.y = detail::num(jp, "tomo.phantom", "center_y_cm");
        sc.tomo.phantom_sigma_cm = detail::num(jp, "tomo.phantom", "sigma_cm");
        sc.tomo.phantom_peak = detail::num(jp, "tomo.phantom", "peak_mole_fraction");
        sc.tomo.phantom_baseline = detail::num_or(jp, "tomo.phantom", "baseline_mole_fraction", 0.0);
        if (jt.contains("reference")) {
            const auto& jref = jt.at("reference");
            detail::expect_object(jref, "tomo.reference");
            detail::check_keys(jref, "tomo.reference", {"path_length_cm", "mole_fraction"});
            sc.tomo.ref_path_length_cm = detail::num(jref, "tomo.reference", "path_length_cm");
            sc.tomo.ref_mole_fraction = detail::num(jref, "tomo.reference", "mole_fraction");
        }
        if (jt.contains("sart")) {
            const auto& jsa = jt.at("sart");
            detail::expect_object(jsa, "tomo.sart");
            detail::check_keys(jsa, "tomo.sart", {"relaxation", "sweeps", "nonneg"});
            sc.tomo.sart.relaxation = detail::num_or(jsa, "tomo.sart", "relaxation", 1.0);
            sc.tomo.sart.sweeps =
                jsa.contains("sweeps") ? detail::integer(jsa, "tomo.sart", "sweeps") : 50;
            sc.tomo.sart.nonneg = detail::boolean_or(jsa, "tomo.sart", "nonneg", true);
        }
    }
    return sc;
}

// Cross-field consistency: everything that must hold before any run.
inline ValidationReport validate_scenario(const Scenario& sc) {
    ValidationReport rep;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) rep.violations.push_back(msg);
    };
    try {
        sc.drive.validate();
    } catch (const config_error& e) {
        rep.violations.push_back(e.what());
    }
    try {
        sc.sched.validate();
    } catch (const config_error& e) {
        rep.violations.push_back(e.what());
    }

    const double spp = sc.sched.f_d / sc.drive.f_m;
    check(std::abs(spp - std::round(spp)) <= 1e-9 * spp,
          "schedule.f_d_hz: non-integer samples per modulation period (f_d/f_m = " +
              std::to_string(spp) + ")");
    const double sps = sc.sched.f_d / sc.drive.f_s;
    check(std::abs(sps - std::round(sps)) <= 1e-6,
          "schedule.f_d_hz: non-integer samples per scan (f_d/f_s)");

    const TimingReport timing = validate_timing(sc.sched);
    if (!timing.valid)
        rep.violations.push_back("schedule.t_mux_s: switch-settling constraint t_mux < 1/f_d violated; " +
                                 timing.message);

    if (sc.drive.f_s > 0.0 && sc.drive.f_m > sc.drive.f_s) {
        const std::size_t periods = sc.drive.periods_per_scan();
        if (periods % static_cast<std::size_t>(std::max(sc.sched.periods_per_slot, 1)) == 0) {
            const std::size_t slots = periods / static_cast<std::size_t>(sc.sched.periods_per_slot);
            const std::size_t used = (sc.portion == ScanPortion::full) ? slots : slots / 2;
            if (sc.portion != ScanPortion::full && slots % 2 != 0)
                rep.violations.push_back("run.portion: odd slot count per scan, cannot split the scan in half");
            else
                check(used % static_cast<std::size_t>(std::max(sc.sched.n_beams, 1)) == 0,
                      "schedule.beams_per_adc: used slots per scan (" + std::to_string(used) +
                          ") not divisible by N, beams would get unequal coverage");
        } else {
            rep.violations.push_back("schedule.periods_per_slot: modulation periods per scan not divisible by c");
        }
    }

    if (sc.sched.f_d < 4.0 * sc.drive.f_m)
        rep.violations.push_back("schedule.f_d_hz: below 2x the 2f Nyquist rate (4*f_m)");
    else if (sc.sched.f_d < 100.0 * 2.0 * sc.drive.f_m)
        rep.warnings.push_back("schedule.f_d_hz: under 100x margin over the 2f band; lock-in accuracy degrades");

    if (!sc.has_tomo) {
        check(!sc.beams.empty(), "beams: at least one beam state required");
        check(sc.beams.size() == static_cast<std::size_t>(sc.sched.n_beams),
              "beams: count must equal schedule.beams_per_adc");
    }
    for (std::size_t i = 0; i < sc.beams.size(); ++i) {
        try {
            sc.beams[i].validate();
        } catch (const config_error& e) {
            rep.violations.push_back("beams[" + std::to_string(i) + "]: " + e.what());
        }
    }
    if (sc.noise_enabled) {
        for (const NoiseSpec* s : {&sc.env, &sc.pink, &sc.white}) {
            try {
                s->validate();
            } catch (const config_error& e) {
                rep.violations.push_back(e.what());
            }
        }
    }
    check(sc.runs >= 1, "run.runs: must be >= 1");
    if (sc.has_tomo) {
        check(sc.tomo.projections >= 1 && sc.tomo.beams_per_projection >= 1,
              "tomo.geometry: counts must be >= 1");
        check(sc.tomo.spacing_cm > 0.0 && sc.tomo.beam_length_cm > 0.0,
              "tomo.geometry: spacing and beam length must be positive");
        check(sc.tomo.nx >= 1 && sc.tomo.ny >= 1 && sc.tomo.extent_cm > 0.0,
              "tomo.grid: invalid grid");
        const int total = sc.tomo.projections * sc.tomo.beams_per_projection;
        check(total % std::max(sc.sched.n_beams, 1) == 0,
              "tomo.geometry: total beams must be a multiple of schedule.beams_per_adc");
        check(sc.tomo.phantom_peak >= 0.0 && sc.tomo.phantom_baseline >= 0.0,
              "tomo.phantom: concentrations must be >= 0");
        check(sc.tomo.sart.relaxation > 0.0 && sc.tomo.sart.relaxation < 2.0,
              "tomo.sart.relaxation: must be in (0, 2)");
        check(sc.tomo.sart.sweeps >= 1, "tomo.sart.sweeps: must be >= 1");
    }
    return rep;
}

// Ensemble view of a beams-type scenario.
inline EnsembleScenario to_ensemble(const Scenario& sc) {
    EnsembleScenario e;
    e.drive = sc.drive;
    e.line = sc.line;
    e.beams = sc.beams;
    e.sched = sc.sched;
    e.portion = sc.portion;
    e.noise_enabled = sc.noise_enabled;
    e.env = sc.env;
    e.pink = sc.pink;
    e.white = sc.white;
    return e;
}

}  // namespace wmstomo
