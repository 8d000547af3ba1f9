// Batch front-end for the quasi-parallel WMS tomography toolkit:
//   validate    check a scenario file and report violations
//   simulate    run one synthesis + demodulation pass, emit spectra CSVs
//   compare     FP-vs-QP residual statistics over an ensemble
//   reconstruct phantom -> spectra -> absorbances -> SART image

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wmstomo/wmstomo.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_io = 4;

int run_validate(const std::string& scenario_path) {
    const wmstomo::Scenario sc = wmstomo::load_scenario(scenario_path);
    const wmstomo::ValidationReport rep = wmstomo::validate_scenario(sc);
    for (const auto& w : rep.warnings) std::cout << "warning: " << w << '\n';
    if (!rep.ok()) {
        for (const auto& v : rep.violations) std::cout << "violation: " << v << '\n';
        std::cout << rep.violations.size() << " violation(s)\n";
        return exit_config;
    }
    std::cout << "ok\n";
    return exit_ok;
}

void require_valid(const wmstomo::Scenario& sc) {
    const wmstomo::ValidationReport rep = wmstomo::validate_scenario(sc);
    if (!rep.ok()) {
        std::string msg = "scenario invalid:";
        for (const auto& v : rep.violations) msg += "\n  " + v;
        throw wmstomo::config_error(msg);
    }
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-parallel WMS chemical species tomography toolkit"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scheme;
    std::optional<std::string> portion;
    std::string spectra_dir;
    bool dump_frames = false;

    auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
        if (needs_out) cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--runs", runs, "override run.runs");
        cmd->add_option("--seed", seed, "override run.master_seed");
        cmd->add_option("--scheme", scheme, "override run.scheme (qp|fp|both)");
        cmd->add_option("--portion", portion, "override run.portion (falling|rising|full)");
    };

    CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "single-run synthesis and demodulation");
    add_common(simulate, true);
    simulate->add_flag("--dump-frames", dump_frames, "also emit per-slot quadrature frames");

    CLI::App* compare = app.add_subcommand("compare", "FP vs QP ensemble comparison");
    add_common(compare, true);

    CLI::App* reconstruct = app.add_subcommand("reconstruct", "tomographic reconstruction");
    add_common(reconstruct, true);
    reconstruct->add_option("--spectra-dir", spectra_dir,
                            "reuse spectra emitted by a previous simulate run");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return run_validate(scenario_path);

        wmstomo::Scenario sc = wmstomo::load_scenario(scenario_path);
        if (runs) sc.runs = *runs;
        if (seed) sc.master_seed = *seed;
        if (scheme) sc.scheme = wmstomo::parse_scheme(*scheme);
        if (portion) sc.portion = wmstomo::parse_portion(*portion);
        require_valid(sc);

        if (simulate->parsed()) {
            if (sc.has_tomo)
                wmstomo::cmd_simulate_tomo(sc, out_dir);
            else
                wmstomo::cmd_simulate(sc, out_dir, dump_frames);
            std::cout << "wrote spectra to " << out_dir << '\n';
        } else if (compare->parsed()) {
            const auto stats = wmstomo::cmd_compare(sc, out_dir, runs, seed);
            std::cout << "beam  fp_mean      qp_mean      mean_diff%  std_diff%\n";
            for (const auto& b : stats.beams)
                std::cout << b.beam << "     " << b.fp.mean << "  " << b.qp.mean << "  "
                          << b.mean_diff_percent << "  " << b.std_diff_percent << '\n';
            std::cout << "max mean diff " << stats.max_mean_diff_percent << "%, max std diff "
                      << stats.max_std_diff_percent << "%\n";
            std::cout << "wrote " << out_dir << "/compare_fp_qp.csv\n";
        } else if (reconstruct->parsed()) {
            wmstomo::cmd_reconstruct(sc, out_dir, spectra_dir);
            std::cout << "wrote " << out_dir << "/image.csv and " << out_dir << "/sinogram.csv\n";
        }
    } catch (const wmstomo::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const wmstomo::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const wmstomo::numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numeric;
    }
    return exit_ok;
}
