#include "rampsim/signals.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rampsim {

namespace {

constexpr std::array<const char*, kLineCount> kLineNames = {
    "X_STEP", "X_DIR", "X_EN",
    "Y_STEP", "Y_DIR", "Y_EN",
    "Z_STEP", "Z_DIR", "Z_EN",
    "E_STEP", "E_DIR", "E_EN",
    "HEAT_HOTEND", "HEAT_BED", "FAN",
    "ENDSTOP_X", "ENDSTOP_Y", "ENDSTOP_Z",
};

constexpr std::array<const char*, kAxisCount> kAxisNames = {"X", "Y", "Z", "E"};

}  // namespace

const char* axis_name(Axis a) { return kAxisNames[static_cast<int>(a)]; }

const char* line_name(Line line) { return kLineNames[static_cast<int>(line)]; }

bool parse_line_name(std::string_view name, Line& out) {
    for (int i = 0; i < kLineCount; ++i) {
        if (name == kLineNames[i]) {
            out = static_cast<Line>(i);
            return true;
        }
    }
    return false;
}

Line step_line(Axis a) { return static_cast<Line>(static_cast<int>(a) * 3); }
Line dir_line(Axis a) { return static_cast<Line>(static_cast<int>(a) * 3 + 1); }
Line enable_line(Axis a) { return static_cast<Line>(static_cast<int>(a) * 3 + 2); }

Line endstop_line(Axis a) {
    switch (a) {
    case Axis::X: return Line::ENDSTOP_X;
    case Axis::Y: return Line::ENDSTOP_Y;
    case Axis::Z: return Line::ENDSTOP_Z;
    default: throw std::invalid_argument("no endstop on extruder axis");
    }
}

bool is_step_line(Line line) {
    int i = static_cast<int>(line);
    return i < 12 && i % 3 == 0;
}

bool axis_of_line(Line line, Axis& out) {
    int i = static_cast<int>(line);
    if (i >= 12)
        return false;
    out = static_cast<Axis>(i / 3);
    return true;
}

void sort_events(std::vector<Event>& events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
}

void validate_timeline(const SignalTimeline& timeline) {
    if (timeline.tick_ns <= 0)
        throw std::logic_error("tick period must be positive");
    std::array<int, kLineCount> level{};
    Tick prev = 0;
    bool first = true;
    for (const Event& ev : timeline.events) {
        if (!first && ev.t < prev)
            throw std::logic_error("timeline events not sorted by tick");
        first = false;
        prev = ev.t;
        int idx = static_cast<int>(ev.line);
        if (level[idx] == ev.level)
            throw std::logic_error(std::string("level does not alternate on ") +
                                   line_name(ev.line) + " at tick " +
                                   std::to_string(ev.t));
        level[idx] = ev.level;
    }
}

void validate_pulse_spec(const PulseSpec& spec) {
    if (spec.period <= 0)
        throw std::invalid_argument("pulse period must be positive");
    if (spec.high_width <= 0 || spec.high_width >= spec.period)
        throw std::invalid_argument("pulse high width must satisfy 0 < width < period");
    int f = spec.microstep_factor;
    if (f != 1 && f != 2 && f != 4 && f != 8 && f != 16)
        throw std::invalid_argument("microstep factor must be one of 1,2,4,8,16");
}

SignalTimeline generate_pulses(const PulseSpec& spec, Tick start, Line line) {
    validate_pulse_spec(spec);
    SignalTimeline out;
    out.events.reserve(spec.count * 2);
    for (std::uint64_t k = 0; k < spec.count; ++k) {
        Tick rise = start + static_cast<Tick>(k) * spec.period;
        out.events.push_back({rise, line, 1});
        out.events.push_back({rise + spec.high_width, line, 0});
    }
    return out;
}

std::vector<Tick> detect_edges(const SignalTimeline& timeline, Line line,
                               EdgePolarity polarity) {
    std::vector<Tick> edges;
    int level = 0;
    const int want = polarity == EdgePolarity::Rising ? 1 : 0;
    for (const Event& ev : timeline.events) {
        if (ev.line != line)
            continue;
        if (ev.level != level && ev.level == want)
            edges.push_back(ev.t);
        level = ev.level;
    }
    return edges;
}

std::int64_t count_rising_edges(const SignalTimeline& timeline, Line line, Tick after) {
    std::int64_t n = 0;
    int level = 0;
    for (const Event& ev : timeline.events) {
        if (ev.line != line)
            continue;
        if (ev.level == 1 && level == 0 && ev.t > after)
            ++n;
        level = ev.level;
    }
    return n;
}

SignalTimeline mask_every_other(const SignalTimeline& timeline, Line line, Tick after) {
    if (!is_step_line(line))
        throw std::invalid_argument("mask_every_other expects a STEP line");
    SignalTimeline out;
    out.tick_ns = timeline.tick_ns;
    out.events.reserve(timeline.events.size());
    // Pulse index counts rising edges after `after`; odd-indexed (1st, 3rd,
    // ...) pulses pass, even-indexed pulses are dropped rise and fall.
    std::int64_t pulse_index = 0;
    bool dropping = false;
    for (const Event& ev : timeline.events) {
        if (ev.line != line) {
            out.events.push_back(ev);
            continue;
        }
        if (ev.level == 1) {
            if (ev.t > after) {
                ++pulse_index;
                dropping = (pulse_index % 2) == 0;
            } else {
                dropping = false;
            }
            if (!dropping)
                out.events.push_back(ev);
        } else {
            if (!dropping)
                out.events.push_back(ev);
            dropping = false;
        }
    }
    return out;
}

namespace {

struct HighInterval {
    Tick rise;
    Tick fall;  // open-ended intervals use rise with fall = max
};

std::vector<HighInterval> high_intervals(const SignalTimeline& timeline, Line line) {
    std::vector<HighInterval> spans;
    int level = 0;
    Tick rise = 0;
    for (const Event& ev : timeline.events) {
        if (ev.line != line)
            continue;
        if (ev.level == 1 && level == 0)
            rise = ev.t;
        else if (ev.level == 0 && level == 1)
            spans.push_back({rise, ev.t});
        level = ev.level;
    }
    if (level == 1)
        spans.push_back({rise, std::numeric_limits<Tick>::max()});
    return spans;
}

}  // namespace

SignalTimeline inject_pulses(const SignalTimeline& timeline, Line line,
                             const PulseSpec& extra, Tick t0, Tick t1) {
    validate_pulse_spec(extra);
    if (extra.count == 0)
        return timeline;
    if (t1 <= t0)
        throw std::invalid_argument("injection window is empty");

    const auto spans = high_intervals(timeline, line);
    auto overlaps_existing = [&spans](Tick rise, Tick fall) {
        for (const HighInterval& s : spans) {
            if (rise <= s.fall && s.rise <= fall)
                return true;
        }
        return false;
    };

    SignalTimeline out = timeline;
    for (std::uint64_t k = 0; k < extra.count; ++k) {
        Tick rise = t0 + static_cast<Tick>(k) * extra.period;
        Tick fall = rise + extra.high_width;
        if (fall > t1)
            throw std::invalid_argument("injected pulses do not fit in the window");
        if (overlaps_existing(rise, fall))
            throw std::invalid_argument("injected pulse overlaps an existing high interval");
        out.events.push_back({rise, line, 1});
        out.events.push_back({fall, line, 0});
    }
    sort_events(out.events);
    return out;
}

int line_level_at(const SignalTimeline& timeline, Line line, Tick t) {
    int level = 0;
    for (const Event& ev : timeline.events) {
        if (ev.t > t)
            break;
        if (ev.line == line)
            level = ev.level;
    }
    return level;
}

std::string dump_timeline(const SignalTimeline& timeline) {
    std::ostringstream os;
    for (const Event& ev : timeline.events)
        os << ev.t << ' ' << line_name(ev.line) << ' ' << int(ev.level) << '\n';
    return os.str();
}

}  // namespace rampsim
