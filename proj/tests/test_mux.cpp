#include <doctest.h>

#include <vector>

#include "wmstomo/mux.hpp"
#include "wmstomo/rng.hpp"

using namespace wmstomo;

namespace {

std::vector<SampledWaveform> random_beams(int n_beams, std::size_t len, double f_d, std::uint64_t seed) {
    std::vector<SampledWaveform> beams(static_cast<std::size_t>(n_beams));
    Rng rng(seed);
    for (auto& b : beams) {
        b.f_d = f_d;
        b.samples.resize(len);
        for (auto& s : b.samples) s = rng.normal();
    }
    return beams;
}

}  // namespace

TEST_CASE("beam index follows the floor formula") {
    CHECK(beam_index(1, 4) == 1);
    CHECK(beam_index(4, 4) == 4);
    CHECK(beam_index(5, 4) == 1);
    CHECK(beam_index(2001, 4) == 1);

    SUBCASE("equals ((j-1) mod N) + 1 everywhere") {
        for (int n = 1; n <= 64; ++n)
            for (long long j = 1; j <= 10000; j += (n > 8 ? 7 : 1))
                CHECK(beam_index(j, n) == static_cast<int>((j - 1) % n) + 1);
    }
    SUBCASE("rejects invalid indices") {
        CHECK_THROWS_AS(beam_index(0, 4), config_error);
        CHECK_THROWS_AS(beam_index(3, 0), config_error);
    }
}

TEST_CASE("switch timing constraint") {
    MuxSchedule s;
    s.n_beams = 4;
    s.periods_per_slot = 2;
    s.f_m = 62.5e3;
    s.t_mux = 33e-9;

    SUBCASE("reference rate settles in time") {
        s.f_d = 15.625e6;  // 64 ns per sample
        const TimingReport r = validate_timing(s);
        CHECK(r.valid);
        CHECK(r.max_f_d == doctest::Approx(30.303030e6).epsilon(1e-6));
    }
    SUBCASE("31 MHz violates the constraint") {
        s.f_d = 31e6;
        const TimingReport r = validate_timing(s);
        CHECK_FALSE(r.valid);
        CHECK(r.max_f_d == doctest::Approx(30.3e6).epsilon(1e-3));
        CHECK(r.message.find("maximum supported f_d") != std::string::npos);
    }
    SUBCASE("an instantaneous switch supports any rate") {
        s.t_mux = 0.0;
        s.f_d = 1e12;
        CHECK(validate_timing(s).valid);
    }
}

TEST_CASE("multiplexing") {
    MuxSchedule s;
    s.n_beams = 4;
    s.periods_per_slot = 2;
    s.f_m = 62.5e3;
    s.f_d = 15.625e6;
    s.t_mux = 33e-9;
    const std::size_t D = s.slot_samples();
    REQUIRE(D == 500);

    SUBCASE("single beam is the identity") {
        MuxSchedule one = s;
        one.n_beams = 1;
        auto beams = random_beams(1, 8 * D, s.f_d, 3);
        CHECK(multiplex(beams, one).samples == beams[0].samples);
    }
    SUBCASE("slot-wise demultiplexing recovers every beam bitwise") {
        const std::size_t slots = 16;
        auto beams = random_beams(4, slots * D, s.f_d, 4);
        const SampledWaveform mux = multiplex(beams, s);
        CHECK(mux.size() == slots * D);
        for (std::size_t j = 0; j < slots; ++j) {
            const int beam = beam_index(static_cast<long long>(j) + 1, s.n_beams);
            for (std::size_t d = 0; d < D; ++d)
                CHECK(mux.samples[j * D + d] ==
                      beams[static_cast<std::size_t>(beam - 1)].samples[j * D + d]);
        }
    }
    SUBCASE("reference scan accounting: 1000 slots, 250 per beam") {
        const std::size_t scan = 500000;
        CHECK(scan % D == 0);
        CHECK(scan / D == 1000);
        CHECK(scan / D / 4 == 250);
    }
    SUBCASE("mismatched lengths are rejected") {
        auto beams = random_beams(4, 4 * D, s.f_d, 5);
        beams[2].samples.resize(3 * D);
        CHECK_THROWS_AS(multiplex(beams, s), config_error);
    }
    SUBCASE("trailing partial slot is rejected") {
        auto beams = random_beams(4, 4 * D + 100, s.f_d, 6);
        CHECK_THROWS_AS(multiplex(beams, s), config_error);
    }
    SUBCASE("timing violation blocks multiplexing") {
        MuxSchedule fast = s;
        fast.f_d = 31.25e6;  // integer f_d/f_m but 32 ns < t_mux
        auto beams = random_beams(4, 4 * fast.slot_samples(), fast.f_d, 7);
        CHECK_THROWS_AS(multiplex(beams, fast), config_error);
    }
    SUBCASE("non-integer samples per period is rejected") {
        MuxSchedule bad = s;
        bad.f_d = 15.626e6;
        CHECK_THROWS_AS(bad.validate(), config_error);
    }
}
