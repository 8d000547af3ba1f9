#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "wmstomo/commands.hpp"
#include "wmstomo/rng.hpp"

using namespace wmstomo;
namespace fs = std::filesystem;

namespace {

const std::string data_dir = WMSTOMO_DATA_DIR;
const std::string tmp_root = WMSTOMO_TEST_TMP;

std::string tmp_path(const std::string& name) {
    fs::create_directories(tmp_root);
    return tmp_root + "/" + name;
}

std::string write_tmp(const std::string& name, const std::string& content) {
    const std::string path = tmp_path(name);
    std::ofstream out(path);
    out << content;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// programmatic desk-scale scenario so command tests stay fast
Scenario mini_scenario() {
    Scenario sc;
    sc.drive.f_s = 5.0;
    sc.drive.f_m = 1000.0;
    sc.drive.i_bar = 0.5;
    sc.drive.i1_s = 0.2;
    sc.drive.i1_m = 0.1;
    sc.drive.nu_bar = 7185.6;
    sc.drive.a1_s = 0.25;
    sc.drive.a1_m = 0.006;
    sc.line = {7185.5966, 1.969e-2, 0.0396, 0.1950, 0.69, 1045.0583, 18.010565, 296.0};
    for (double x : {0.008, 0.007, 0.006, 0.005}) sc.beams.push_back({36.0, 1.0, 296.0, x});
    sc.sched.n_beams = 4;
    sc.sched.periods_per_slot = 1;
    sc.sched.f_m = 1000.0;
    sc.sched.f_d = 20000.0;
    sc.sched.t_mux = 0.0;
    sc.noise_enabled = true;
    sc.env = {NoiseKind::environmental, 18.0, 40.0, 1};
    sc.pink = {NoiseKind::pink, split_snr_db(56.0), 0.0, 2};
    sc.white = {NoiseKind::white, split_snr_db(56.0), 0.0, 3};
    sc.scheme = Scheme::both;
    sc.portion = ScanPortion::falling;
    sc.runs = 2;
    sc.master_seed = 11;
    return sc;
}

}  // namespace

TEST_CASE("line list files") {
    SUBCASE("bundled list loads and selects the requested line") {
        const auto lines = load_line_list(data_dir + "/h2o_7185.list");
        REQUIRE(lines.size() == 2);
        const AbsorptionLine l = select_line(lines, 7185.6);
        CHECK(l.nu0 == doctest::Approx(7185.5966));
        CHECK(l.S_ref == doctest::Approx(1.969e-2));
    }
    SUBCASE("no line near the request is an error") {
        const auto lines = load_line_list(data_dir + "/h2o_7185.list");
        CHECK_THROWS_AS(select_line(lines, 7300.0), config_error);
    }
    SUBCASE("wrong header is rejected") {
        const std::string path = write_tmp("bad_header.list",
                                           "nu0_cm1 strength gamma_air_cm1_atm1\n7185.6 1e-2 0.04\n");
        CHECK_THROWS_AS(load_line_list(path), config_error);
    }
    SUBCASE("malformed record is rejected with its line number") {
        const std::string path = write_tmp(
            "bad_record.list",
            "nu0_cm1 S_ref_cm2_atm1 gamma_air_cm1_atm1 gamma_self_cm1_atm1 n_T E_low_cm1 "
            "molar_mass_g_mol T_ref_K\n7185.6 ouch 0.04 0.2 0.7 1045.0 18.0 296.0\n");
        try {
            load_line_list(path);
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
}

TEST_CASE("scenario files") {
    SUBCASE("bundled reference scenario validates cleanly") {
        const Scenario sc = load_scenario(data_dir + "/scenario_reference.json");
        CHECK(sc.drive.f_m == 62500.0);
        CHECK(sc.sched.n_beams == 4);
        CHECK(sc.beams.size() == 4);
        CHECK(sc.noise_enabled);
        const ValidationReport rep = validate_scenario(sc);
        CHECK(rep.ok());
    }
    SUBCASE("bundled tomo scenario validates cleanly") {
        const Scenario sc = load_scenario(data_dir + "/scenario_tomo.json");
        CHECK(sc.has_tomo);
        CHECK(validate_scenario(sc).ok());
    }
    SUBCASE("unknown fields are errors, not warnings") {
        std::string text = slurp(data_dir + "/scenario_reference.json");
        text.insert(text.find("\"f_s_hz\""), "\"f_s\": 31.25, ");
        const std::string path = write_tmp("unknown_field.json", text);
        try {
            load_scenario(path);
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("unknown field 'f_s'") != std::string::npos);
        }
    }
    SUBCASE("parse failures carry line and column") {
        const std::string path = write_tmp("broken.json", "{\n  \"drive\": {,}\n}\n");
        try {
            load_scenario(path);
            FAIL("expected config_error");
        } catch (const config_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("line 2") != std::string::npos);
            CHECK(msg.find("column") != std::string::npos);
        }
    }
    SUBCASE("non-integer samples per modulation period is a violation") {
        Scenario sc = load_scenario(data_dir + "/scenario_reference.json");
        sc.sched.f_d = 250.5 * sc.drive.f_m;
        const ValidationReport rep = validate_scenario(sc);
        CHECK_FALSE(rep.ok());
        bool found = false;
        for (const auto& v : rep.violations)
            if (v.find("non-integer samples per modulation period") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("switch timing violation reports the supported maximum") {
        Scenario sc = load_scenario(data_dir + "/scenario_reference.json");
        sc.sched.f_d = 31.25e6;  // integer ratios hold; only the settling constraint trips
        const ValidationReport rep = validate_scenario(sc);
        CHECK_FALSE(rep.ok());
        bool found = false;
        for (const auto& v : rep.violations)
            if (v.find("t_mux") != std::string::npos &&
                v.find("30.30") != std::string::npos)
                found = true;
        CHECK(found);
    }
}

TEST_CASE("csv round trip") {
    CsvTable t;
    t.header = {"a", "b", "c"};
    Rng rng(9);
    for (int i = 0; i < 50; ++i)
        t.rows.push_back({rng.normal() * 1e-7, rng.normal() * 1e9, 1.0 / 3.0 + rng.normal()});
    t.rows.push_back({0.0, -0.0, 1e-300});
    const std::string path = tmp_path("roundtrip.csv");
    write_csv(path, t);
    const CsvTable back = read_csv(path);
    CHECK(back.header == t.header);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.rows[r].size(); ++c)
            CHECK(back.rows[r][c] == t.rows[r][c]);
}

TEST_CASE("simulate command") {
    Scenario sc = mini_scenario();
    SUBCASE("qp emits one file per beam with the demultiplexed length") {
        sc.scheme = Scheme::qp;
        const std::string out = tmp_path("sim_qp");
        cmd_simulate(sc, out);
        for (int b = 1; b <= 4; ++b) {
            const CsvTable t = read_csv(out + "/beam_0" + std::to_string(b) + "_qp.csv");
            CHECK(t.header == std::vector<std::string>{"sample", "slot", "s2f1f"});
            CHECK(t.rows.size() == 25);
        }
    }
    SUBCASE("fp spectra carry the full slot density") {
        sc.scheme = Scheme::fp;
        const std::string out = tmp_path("sim_fp");
        cmd_simulate(sc, out);
        CHECK(read_csv(out + "/beam_03_fp.csv").rows.size() == 100);
    }
    SUBCASE("same master seed reproduces every output byte") {
        sc.scheme = Scheme::both;
        const std::string out_a = tmp_path("sim_a");
        const std::string out_b = tmp_path("sim_b");
        cmd_simulate(sc, out_a, true);
        cmd_simulate(sc, out_b, true);
        for (const char* name : {"beam_01_qp.csv", "beam_04_fp.csv", "frames_qp.csv"})
            CHECK(slurp(out_a + "/" + std::string(name)) == slurp(out_b + "/" + std::string(name)));
    }
}

TEST_CASE("compare command") {
    Scenario sc = mini_scenario();
    SUBCASE("noise disabled leaves only solver-level residue") {
        sc.noise_enabled = false;
        const std::string out = tmp_path("cmp_clean");
        const ComparisonStats stats = cmd_compare(sc, out);
        for (const auto& b : stats.beams) {
            CHECK(b.fp.mean < 1e-9);
            CHECK(b.qp.mean < 1e-9);
        }
        const CsvTable t = read_csv(out + "/compare_fp_qp.csv");
        CHECK(t.rows.size() == 5);  // four beams + maxima row
        CHECK(t.rows.back()[0] == 0.0);
    }
    SUBCASE("report carries per-beam rows and column maxima") {
        const std::string out = tmp_path("cmp_noisy");
        const ComparisonStats stats = cmd_compare(sc, out, 3, 21);
        const CsvTable t = read_csv(out + "/compare_fp_qp.csv");
        REQUIRE(t.rows.size() == 5);
        double max_mean_diff = 0.0;
        for (std::size_t r = 0; r < 4; ++r) max_mean_diff = std::max(max_mean_diff, t.rows[r][5]);
        CHECK(t.rows[4][5] == max_mean_diff);
        CHECK(stats.max_mean_diff_percent == max_mean_diff);
    }
    SUBCASE("scheme must be both") {
        sc.scheme = Scheme::qp;
        CHECK_THROWS_AS(cmd_compare(sc, tmp_path("cmp_bad")), config_error);
    }
}

TEST_CASE("reconstruct command") {
    Scenario sc = load_scenario(data_dir + "/scenario_tomo.json");

    SUBCASE("zero phantom reconstructs the zero image") {
        Scenario zero = sc;
        zero.tomo.phantom_peak = 0.0;
        zero.tomo.phantom_baseline = 0.0;
        const TomoResult r = run_tomo_chain(zero);
        for (double v : r.image.values) CHECK(v == 0.0);
    }
    SUBCASE("full chain emits a 15x15 image and a 32-row sinogram") {
        const std::string out = tmp_path("recon");
        cmd_reconstruct(sc, out);
        const CsvTable img = read_csv(out + "/image.csv");
        CHECK(img.rows.size() == 15);
        CHECK(img.header.size() == 15);
        const CsvTable sino = read_csv(out + "/sinogram.csv");
        CHECK(sino.rows.size() == 32);
        CHECK(fs::exists(out + "/image_meta.json"));
    }
    SUBCASE("reconstructing from emitted spectra matches the single-shot chain exactly") {
        const std::string sim_out = tmp_path("tomo_sim");
        const std::string rec_a = tmp_path("tomo_rec_direct");
        const std::string rec_b = tmp_path("tomo_rec_staged");
        cmd_simulate_tomo(sc, sim_out);
        cmd_reconstruct(sc, rec_a);
        cmd_reconstruct(sc, rec_b, sim_out);
        CHECK(slurp(rec_a + "/image.csv") == slurp(rec_b + "/image.csv"));
        CHECK(slurp(rec_a + "/sinogram.csv") == slurp(rec_b + "/sinogram.csv"));
    }
    SUBCASE("blob peak lands within one pixel of the phantom peak") {
        const TomoResult r = run_tomo_chain(sc);
        std::size_t got = 0, want = 0;
        for (std::size_t j = 0; j < r.image.values.size(); ++j) {
            if (r.image.values[j] > r.image.values[got]) got = j;
            if (r.phantom.values[j] > r.phantom.values[want]) want = j;
        }
        const int nx = r.grid.nx;
        CHECK(std::abs(static_cast<int>(got % nx) - static_cast<int>(want % nx)) <= 1);
        CHECK(std::abs(static_cast<int>(got / nx) - static_cast<int>(want / nx)) <= 1);
    }
}
