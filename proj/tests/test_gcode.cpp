#include "doctest.h"

#include <random>

#include "rampsim/gcode.hpp"

using namespace rampsim;
using gcode::CommandKind;

TEST_CASE("parse_line recognizes the dialect") {
    auto move = gcode::parse_line("G1 X10.5 Y-3 E2.0 F1800", 1);
    CHECK(move.kind == CommandKind::Move);
    CHECK(move.value('X') == doctest::Approx(10.5));
    CHECK(move.value('Y') == doctest::Approx(-3.0));
    CHECK(move.value('E') == doctest::Approx(2.0));
    CHECK(move.value('F') == doctest::Approx(1800.0));

    auto comment = gcode::parse_line("; layer 2", 2);
    CHECK(comment.kind == CommandKind::Comment);
    CHECK(comment.text == "layer 2");

    auto fan = gcode::parse_line("M106 S255", 3);
    CHECK(fan.kind == CommandKind::FanOn);
    CHECK(fan.value('S') == doctest::Approx(255.0));

    auto g0 = gcode::parse_line("G0 X5", 4);
    CHECK(g0.kind == CommandKind::Move);
}

TEST_CASE("parse_line is total") {
    CHECK(gcode::parse_line("", 1).kind == CommandKind::Comment);
    CHECK(gcode::parse_line("G33 P1", 1).kind == CommandKind::Unknown);
    CHECK(gcode::parse_line("T0", 1).kind == CommandKind::Unknown);
    CHECK(gcode::parse_line("\x01\xff garbage", 1).kind == CommandKind::Unknown);

    auto malformed = gcode::parse_line("G1 Xabc", 1);
    CHECK(malformed.kind == CommandKind::Unknown);
    CHECK(malformed.malformed);
}

TEST_CASE("checksums and line numbers are ignored") {
    auto cmd = gcode::parse_line("N42 G1 X5 *71", 1);
    CHECK(cmd.kind == CommandKind::Move);
    CHECK(cmd.value('X') == doctest::Approx(5.0));
}

TEST_CASE("parse_program tracks positioning modes") {
    auto p = gcode::parse_program("G90\nG1 X1\nG1 X2");
    CHECK(p.commands.size() == 3);
    CHECK(p.motion_mode == gcode::PositioningMode::Absolute);
    CHECK(p.commands[1].absolute_motion);

    auto rel = gcode::parse_program("G91\nG1 X2\nG1 X2");
    CHECK(rel.commands[1].absolute_motion == false);
    CHECK(rel.motion_mode == gcode::PositioningMode::Relative);

    auto e_only = gcode::parse_program("M83\nG1 E1");
    CHECK(e_only.commands[1].absolute_e == false);
    CHECK(e_only.commands[1].absolute_motion == true);
}

TEST_CASE("parse_program zero case") {
    auto p = gcode::parse_program("");
    CHECK(p.commands.empty());
    CHECK(p.motion_mode == gcode::PositioningMode::Absolute);
}

TEST_CASE("serialize canonical forms") {
    CHECK(gcode::serialize(gcode::Program{}) == "");

    gcode::Command move;
    move.kind = CommandKind::Move;
    move.params['X'] = 10.5;
    CHECK(gcode::serialize(move) == "G1 X10.5");

    move.params['E'] = 2.0;
    CHECK(gcode::serialize(move) == "G1 X10.5 E2");
}

TEST_CASE("round-trip: parse(serialize(parse(text))) == parse(text)") {
    const char* fixtures[] = {
        "G90\nM82\nG28\nG92 E0\nG1 X10.5 Y-3 E2.0 F1800\nM106 S255\n; done\nM84",
        "G0 X1\r\nG1 Y2 ;inline note\nG91\nG1 X2\nG1 X2\nweird line\nM205 X8",
        "N1 G1 X5 *71\nM109 S210\nM190 S60\nM107",
    };
    for (const char* text : fixtures) {
        auto first = gcode::parse_program(text);
        auto second = gcode::parse_program(gcode::serialize(first));
        CHECK(first == second);
    }
}

TEST_CASE("round-trip holds for fuzzed byte lines") {
    std::mt19937_64 rng(7);
    const char alphabet[] = "GMXYZEFS0123456789.- ;*\tN\xc3\xa9";
    for (int iter = 0; iter < 500; ++iter) {
        std::string text;
        int lines = static_cast<int>(rng() % 5);
        for (int l = 0; l < lines; ++l) {
            int len = static_cast<int>(rng() % 24);
            for (int i = 0; i < len; ++i)
                text += alphabet[rng() % (sizeof(alphabet) - 1)];
            text += '\n';
        }
        auto first = gcode::parse_program(text);
        auto second = gcode::parse_program(gcode::serialize(first));
        CHECK(first == second);
    }
}
