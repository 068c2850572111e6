#pragma once

#include <map>
#include <string>
#include <vector>

namespace rampsim::gcode {

/// The supported command vocabulary is the subset a Marlin-targeting slicer
/// emits for plain FFF prints. Anything else round-trips verbatim as Unknown.
enum class CommandKind {
    Move,            // G0 / G1 (normalized to G1)
    Home,            // G28
    SetPosition,     // G92
    SetHotendTemp,   // M104
    WaitHotendTemp,  // M109
    SetBedTemp,      // M140
    WaitBedTemp,     // M190
    FanOn,           // M106
    FanOff,          // M107
    MotorsOff,       // M84
    Comment,
    Unknown,
};

const char* command_kind_name(CommandKind kind);

struct Command {
    CommandKind kind = CommandKind::Unknown;
    /// Axis/parameter words by letter (X, Y, Z, E, F, S). Only letters legal
    /// for the kind are kept. Home axis flags are stored with value 0.
    std::map<char, double> params;
    int source_line = 0;
    /// Raw text for Unknown (verbatim) and Comment (text after ';').
    std::string text;
    /// Set when a recognized code carried an unparseable numeric field and
    /// was demoted to Unknown.
    bool malformed = false;

    /// Positioning state in effect when this command executes.
    bool absolute_motion = true;
    bool absolute_e = true;

    bool has(char letter) const { return params.count(letter) != 0; }
    double value(char letter, double fallback = 0.0) const;

    friend bool operator==(const Command&, const Command&) = default;
};

enum class PositioningMode { Absolute, Relative };

struct Diagnostic {
    int line = 0;
    std::string message;
};

struct Program {
    std::vector<Command> commands;
    /// Mode state after the last command (G90/G91 for motion, M82/M83 for
    /// extrusion; both default Absolute).
    PositioningMode motion_mode = PositioningMode::Absolute;
    PositioningMode extrusion_mode = PositioningMode::Absolute;
    std::vector<Diagnostic> diagnostics;

    friend bool operator==(const Program& a, const Program& b) {
        return a.commands == b.commands && a.motion_mode == b.motion_mode &&
               a.extrusion_mode == b.extrusion_mode;
    }
};

/// Parses one physical line. Total: arbitrary bytes yield a Command, never
/// an error. Line-number prefixes (N...) and checksums (*...) are accepted
/// and ignored; text after ';' becomes the comment.
Command parse_line(const std::string& text, int line_no);

/// Parses a whole file (any line endings). Per-line problems are recorded as
/// diagnostics, never thrown.
Program parse_program(const std::string& text);

Program load_program(const std::string& path);
void save_program(const Program& program, const std::string& path);

/// Canonical text: uppercase words, shortest round-trip decimals, single
/// spaces. parse_program(serialize(p)) compares equal to p.
std::string serialize(const Program& program);
std::string serialize(const Command& command);

/// Shortest decimal representation that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace rampsim::gcode
