#include "doctest.h"

#include <random>
#include <stdexcept>

#include "rampsim/signals.hpp"

using namespace rampsim;

TEST_CASE("generate_pulses places rising edges at start + k*period") {
    PulseSpec spec{3, 100, 10, 1};
    auto tl = generate_pulses(spec, 0, Line::X_STEP);
    auto rises = detect_edges(tl, Line::X_STEP, EdgePolarity::Rising);
    CHECK(rises == std::vector<Tick>{0, 100, 200});
    auto falls = detect_edges(tl, Line::X_STEP, EdgePolarity::Falling);
    CHECK(falls == std::vector<Tick>{10, 110, 210});
    validate_timeline(tl);
}

TEST_CASE("generate_pulses zero case and validation") {
    CHECK(generate_pulses(PulseSpec{0, 100, 10, 1}, 0, Line::Y_STEP).empty());
    CHECK_THROWS_AS(generate_pulses(PulseSpec{1, 100, 100, 1}, 0, Line::Y_STEP),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_pulses(PulseSpec{1, 100, 10, 3}, 0, Line::Y_STEP),
                    std::invalid_argument);
}

TEST_CASE("20 kHz, 1 us pulses are legal") {
    // 20 kHz at 10 ns ticks: period 5000, width 100.
    PulseSpec spec{5, 5000, 100, 16};
    auto tl = generate_pulses(spec, 12345, Line::E_STEP);
    CHECK(count_rising_edges(tl, Line::E_STEP) == 5);
    validate_timeline(tl);
}

TEST_CASE("detect_edges zero case") {
    SignalTimeline tl;
    CHECK(detect_edges(tl, Line::X_STEP, EdgePolarity::Rising).empty());
}

TEST_CASE("generate/detect inverse over random specs") {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 200; ++iter) {
        PulseSpec spec;
        spec.count = rng() % 50;
        spec.period = 100 + static_cast<Tick>(rng() % 10000);
        spec.high_width = 1 + static_cast<Tick>(rng() % (spec.period - 1));
        auto tl = generate_pulses(spec, static_cast<Tick>(rng() % 100000), Line::Z_STEP);
        CHECK(detect_edges(tl, Line::Z_STEP, EdgePolarity::Rising).size() == spec.count);
        validate_timeline(tl);
    }
}

TEST_CASE("mask_every_other keeps odd-indexed pulses") {
    auto count_after_mask = [](std::uint64_t n) {
        auto tl = generate_pulses(PulseSpec{n, 1000, 100, 1}, 0, Line::E_STEP);
        auto masked = mask_every_other(tl, Line::E_STEP);
        validate_timeline(masked);
        return count_rising_edges(masked, Line::E_STEP);
    };
    CHECK(count_after_mask(10) == 5);
    CHECK(count_after_mask(0) == 0);
    CHECK(count_after_mask(7) == 4);

    SUBCASE("first pulse always passes") {
        auto tl = generate_pulses(PulseSpec{4, 1000, 100, 1}, 500, Line::E_STEP);
        auto masked = mask_every_other(tl, Line::E_STEP);
        auto rises = detect_edges(masked, Line::E_STEP, EdgePolarity::Rising);
        CHECK(rises == std::vector<Tick>{500, 2500});
    }

    SUBCASE("other lines untouched") {
        auto tl = generate_pulses(PulseSpec{4, 1000, 100, 1}, 0, Line::E_STEP);
        auto other = generate_pulses(PulseSpec{3, 1000, 100, 1}, 50, Line::X_STEP);
        tl.events.insert(tl.events.end(), other.events.begin(), other.events.end());
        sort_events(tl.events);
        auto masked = mask_every_other(tl, Line::E_STEP);
        CHECK(count_rising_edges(masked, Line::X_STEP) == 3);
    }

    CHECK_THROWS_AS(mask_every_other(SignalTimeline{}, Line::X_DIR), std::invalid_argument);
}

TEST_CASE("masking twice matches ceil(ceil(n/2)/2)") {
    for (std::uint64_t n = 0; n <= 40; ++n) {
        auto tl = generate_pulses(PulseSpec{n, 1000, 100, 1}, 0, Line::E_STEP);
        auto twice = mask_every_other(mask_every_other(tl, Line::E_STEP), Line::E_STEP);
        std::uint64_t expect = (n + 1) / 2;
        expect = (expect + 1) / 2;
        CHECK(count_rising_edges(twice, Line::E_STEP) == static_cast<std::int64_t>(expect));
    }
}

TEST_CASE("inject_pulses interleaves into gaps") {
    SUBCASE("zero injections is the identity") {
        auto tl = generate_pulses(PulseSpec{2, 1000, 100, 1}, 0, Line::X_STEP);
        auto out = inject_pulses(tl, Line::X_STEP, PulseSpec{0, 5000, 100, 1}, 0, 10000);
        CHECK(out == tl);
    }

    SUBCASE("one pulse centered in a 10 us gap") {
        // Two pulses 10 us apart leave a low gap we can hit dead center.
        auto tl = generate_pulses(PulseSpec{2, 1000, 100, 1}, 0, Line::X_STEP);
        auto out = inject_pulses(tl, Line::X_STEP, PulseSpec{1, 5000, 100, 1}, 500, 800);
        CHECK(count_rising_edges(out, Line::X_STEP) == 3);
        validate_timeline(out);
    }

    SUBCASE("overlap is rejected") {
        auto tl = generate_pulses(PulseSpec{2, 1000, 100, 1}, 0, Line::X_STEP);
        CHECK_THROWS_AS(inject_pulses(tl, Line::X_STEP, PulseSpec{1, 5000, 100, 1}, 50, 5000),
                        std::invalid_argument);
    }
}

TEST_CASE("alternation survives every operation") {
    std::mt19937_64 rng(13);
    for (int iter = 0; iter < 50; ++iter) {
        auto tl = generate_pulses(PulseSpec{1 + rng() % 20, 2000, 100, 1},
                                  static_cast<Tick>(rng() % 5000), Line::E_STEP);
        auto masked = mask_every_other(tl, Line::E_STEP);
        validate_timeline(masked);
    }
}

TEST_CASE("timeline dump format") {
    auto tl = generate_pulses(PulseSpec{1, 1000, 100, 1}, 42, Line::Z_STEP);
    CHECK(dump_timeline(tl) == "42 Z_STEP 1\n142 Z_STEP 0\n");
}
