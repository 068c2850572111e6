#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rampsim {

/// Simulation time in integer ticks. One tick is 10 ns by default, which
/// matches the observability granularity of a 100 MHz logic analyzer sitting
/// on the control lines. All event times are integral; there is no floating
/// point anywhere on the time axis.
using Tick = std::int64_t;

constexpr Tick kDefaultTickNs = 10;
constexpr Tick kTicksPerSecond = 100'000'000;                // at 10 ns/tick
constexpr Tick kTicksPerMillisecond = kTicksPerSecond / 1000;

/// Motion axes, in the order used for step counters and wire records.
enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2, E = 3 };
constexpr int kAxisCount = 4;

const char* axis_name(Axis a);

/// The complete set of digital control lines crossing the controller/driver
/// boundary: step, direction and enable per motor, the two heater power
/// lines, the part fan, and the three homing endstops.
enum class Line : std::uint8_t {
    X_STEP, X_DIR, X_EN,
    Y_STEP, Y_DIR, Y_EN,
    Z_STEP, Z_DIR, Z_EN,
    E_STEP, E_DIR, E_EN,
    HEAT_HOTEND,   // D10 MOSFET
    HEAT_BED,      // D8 MOSFET
    FAN,           // D9 MOSFET
    ENDSTOP_X, ENDSTOP_Y, ENDSTOP_Z,
};
constexpr int kLineCount = 18;

const char* line_name(Line line);
bool parse_line_name(std::string_view name, Line& out);

Line step_line(Axis a);
Line dir_line(Axis a);
Line enable_line(Axis a);
Line endstop_line(Axis a);  // X/Y/Z only

bool is_step_line(Line line);
/// Axis of a STEP/DIR/EN line. Returns false for heater/fan/endstop lines.
bool axis_of_line(Line line, Axis& out);

/// One level transition on one line. Lines implicitly start at level 0
/// before their first event.
struct Event {
    Tick t = 0;
    Line line = Line::X_STEP;
    std::uint8_t level = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

/// A time-ordered record of every transition on every line. Events are
/// sorted by tick (stable for equal ticks) and levels alternate per line.
struct SignalTimeline {
    std::vector<Event> events;
    Tick tick_ns = kDefaultTickNs;

    Tick ticks_per_second() const { return 1'000'000'000 / tick_ns; }
    bool empty() const { return events.empty(); }

    friend bool operator==(const SignalTimeline&, const SignalTimeline&) = default;
};

/// Restores event ordering after appending out-of-order events. Stable, so
/// same-tick events keep their insertion order.
void sort_events(std::vector<Event>& events);

/// Throws std::logic_error if the timeline is unsorted or any line fails to
/// alternate levels. Used by tests and debug assertions.
void validate_timeline(const SignalTimeline& timeline);

/// Parameters of a uniform pulse train.
struct PulseSpec {
    std::uint64_t count = 0;
    Tick period = 0;
    Tick high_width = 0;
    int microstep_factor = 1;  // one of 1, 2, 4, 8, 16
};

/// Throws std::invalid_argument if widths, periods or the microstep factor
/// are out of range.
void validate_pulse_spec(const PulseSpec& spec);

/// Emits spec.count pulses on `line` with rising edges at start + k*period.
SignalTimeline generate_pulses(const PulseSpec& spec, Tick start, Line line);

enum class EdgePolarity { Rising, Falling };

/// Times of all transitions of the given polarity on one line, in order.
std::vector<Tick> detect_edges(const SignalTimeline& timeline, Line line,
                               EdgePolarity polarity);

/// Number of rising edges on one line; optionally only those after `after`.
std::int64_t count_rising_edges(const SignalTimeline& timeline, Line line,
                                Tick after = -1);

/// Drops every even-indexed pulse (2nd, 4th, ...) on a STEP line; the first
/// pulse always passes. Other lines are untouched. `after` restricts the
/// pulse numbering and removal to pulses rising strictly after that tick.
SignalTimeline mask_every_other(const SignalTimeline& timeline, Line line,
                                Tick after = -1);

/// Interleaves an extra pulse train into the low gaps of a line between t0
/// and t1. Throws std::invalid_argument if any injected pulse would overlap
/// an existing high interval (the alternation invariant must survive).
SignalTimeline inject_pulses(const SignalTimeline& timeline, Line line,
                             const PulseSpec& extra, Tick t0, Tick t1);

/// Level of a line at time t (events at exactly t included).
int line_level_at(const SignalTimeline& timeline, Line line, Tick t);

/// Debug dump, one event per text line: "tick line level". Not a stable
/// interchange format.
std::string dump_timeline(const SignalTimeline& timeline);

}  // namespace rampsim
