#include "rampsim/firmware.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rampsim::firmware {

namespace {

constexpr Tick kStepHighTicks = 100;          // 1 us pulse width
constexpr double kMaxStepRateHz = 20000.0;    // driver-side envelope
constexpr Tick kThermalCadence = 5'000'000;   // 50 ms control tick
constexpr Tick kFanPwmPeriod = 1'000'000;     // 10 ms software PWM

double euclid3(double x, double y, double z) {
    return std::sqrt(x * x + y * y + z * z);
}

/// Uniform in [-1, 1] from the top 53 bits of the generator.
double signed_unit(std::mt19937_64& rng) {
    const double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    return 2.0 * u - 1.0;
}

struct PlannedAction {
    enum Kind { Segment, Home, SetFan, SetHotend, WaitHotend, SetBed, WaitBed, MotorsOff };
    Kind kind;
    int segment_index = -1;
    double value = 0.0;
    int source_line = 0;
};

struct InternalPlan {
    PlanResult result;
    std::vector<PlannedAction> actions;
};

InternalPlan plan_internal(const gcode::Program& program, const PrinterProfile& profile) {
    profile.validate();
    InternalPlan out;
    PlanResult& plan = out.result;

    const double jitter = profile.jitter_percent / 100.0;
    // Nominal rates stay below the limits by the noise headroom so the
    // warped instantaneous rate can never cross them.
    const double headroom = 1.0 + 2.0 * jitter;

    std::array<double, kAxisCount> pos_mm = {0, 0, 0, 0};
    std::array<std::int64_t, kAxisCount> pos_steps = {0, 0, 0, 0};
    std::array<std::int64_t, kAxisCount> origin_steps = {0, 0, 0, 0};
    std::array<std::uint8_t, kAxisCount> dir = {1, 1, 1, 1};
    double feed_mm_s = 30.0;
    bool any_motion = false;

    auto step_target = [&](int axis, double mm) {
        return std::llround(mm * profile.steps_per_mm[axis]) + origin_steps[axis];
    };

    for (const gcode::Command& cmd : program.commands) {
        using gcode::CommandKind;
        switch (cmd.kind) {
        case CommandKind::Move: {
            if (cmd.has('F')) {
                double f = cmd.value('F') / 60.0;
                if (f > 0)
                    feed_mm_s = f;
            }
            std::array<double, kAxisCount> target = pos_mm;
            const char letters[kAxisCount] = {'X', 'Y', 'Z', 'E'};
            bool has_axis_word = false;
            for (int a = 0; a < kAxisCount; ++a) {
                if (!cmd.has(letters[a]))
                    continue;
                has_axis_word = true;
                double v = cmd.value(letters[a]);
                bool absolute = a == 3 ? cmd.absolute_e : cmd.absolute_motion;
                target[a] = absolute ? v : pos_mm[a] + v;
            }
            for (int a = 0; a < 3; ++a) {
                if (target[a] < 0.0 || target[a] > profile.build_volume_mm[a]) {
                    if (profile.volume_policy == VolumePolicy::Reject)
                        throw std::runtime_error(
                            "line " + std::to_string(cmd.source_line) +
                            ": move leaves the build volume");
                    double clamped = std::clamp(target[a], 0.0, profile.build_volume_mm[a]);
                    plan.diagnostics.push_back(
                        {cmd.source_line, std::string("move clamped to build volume on ") +
                                              axis_name(static_cast<Axis>(a))});
                    target[a] = clamped;
                }
            }

            MotionSegment seg;
            seg.source_line = cmd.source_line;
            seg.feed_mm_s = feed_mm_s;
            double dist_xyz = euclid3(target[0] - pos_mm[0], target[1] - pos_mm[1],
                                      target[2] - pos_mm[2]);
            double dist = dist_xyz > 0 ? dist_xyz : std::abs(target[3] - pos_mm[3]);
            double duration_s = dist > 0 ? dist / feed_mm_s : 0.0;
            for (int a = 0; a < kAxisCount; ++a) {
                std::int64_t goal = step_target(a, target[a]);
                std::int64_t delta = goal - pos_steps[a];
                seg.steps[a] = delta;
                if (delta != 0)
                    dir[a] = delta > 0 ? 1 : 0;
                seg.dir_level[a] = dir[a];
                double delta_mm = std::abs(target[a] - pos_mm[a]);
                double axis_cap = profile.max_feedrate_mm_s[a] / headroom;
                if (delta_mm > 0)
                    duration_s = std::max(duration_s, delta_mm / axis_cap);
                if (delta != 0)
                    duration_s = std::max(duration_s, static_cast<double>(std::abs(delta)) *
                                                          headroom / kMaxStepRateHz);
                pos_steps[a] = goal;
                plan.total_signed_steps[a] += delta;
            }
            seg.duration = std::llround(duration_s * kTicksPerSecond);
            if (!seg.is_dwell() && seg.duration <= 0)
                seg.duration = 1;
            pos_mm = target;
            (void)has_axis_word;  // bare G1 stays a zero-step dwell segment
            plan.segments.push_back(seg);
            out.actions.push_back({PlannedAction::Segment,
                                   static_cast<int>(plan.segments.size()) - 1, 0.0,
                                   cmd.source_line});
            if (!seg.is_dwell())
                any_motion = true;
            break;
        }
        case CommandKind::Home: {
            // The simulator always homes at power-on; a leading G28 is
            // satisfied by that pass instead of homing twice.
            if (any_motion)
                out.actions.push_back({PlannedAction::Home, -1, 0.0, cmd.source_line});
            for (int a = 0; a < 3; ++a) {
                pos_mm[a] = 0.0;
                pos_steps[a] = 0;
                origin_steps[a] = 0;
            }
            break;
        }
        case CommandKind::SetPosition: {
            const char letters[kAxisCount] = {'X', 'Y', 'Z', 'E'};
            for (int a = 0; a < kAxisCount; ++a) {
                if (!cmd.has(letters[a]))
                    continue;
                double v = cmd.value(letters[a]);
                origin_steps[a] = pos_steps[a] -
                                  std::llround(v * profile.steps_per_mm[a]);
                pos_mm[a] = v;
            }
            break;
        }
        case CommandKind::SetHotendTemp:
            out.actions.push_back({PlannedAction::SetHotend, -1, cmd.value('S'), cmd.source_line});
            break;
        case CommandKind::WaitHotendTemp:
            out.actions.push_back({PlannedAction::SetHotend, -1, cmd.value('S'), cmd.source_line});
            out.actions.push_back({PlannedAction::WaitHotend, -1, cmd.value('S'), cmd.source_line});
            break;
        case CommandKind::SetBedTemp:
            out.actions.push_back({PlannedAction::SetBed, -1, cmd.value('S'), cmd.source_line});
            break;
        case CommandKind::WaitBedTemp:
            out.actions.push_back({PlannedAction::SetBed, -1, cmd.value('S'), cmd.source_line});
            out.actions.push_back({PlannedAction::WaitBed, -1, cmd.value('S'), cmd.source_line});
            break;
        case CommandKind::FanOn:
            out.actions.push_back({PlannedAction::SetFan, -1,
                                   std::clamp(cmd.value('S', 255.0), 0.0,
                                              static_cast<double>(profile.fan_max_duty)),
                                   cmd.source_line});
            break;
        case CommandKind::FanOff:
            out.actions.push_back({PlannedAction::SetFan, -1, 0.0, cmd.source_line});
            break;
        case CommandKind::MotorsOff:
            out.actions.push_back({PlannedAction::MotorsOff, -1, 0.0, cmd.source_line});
            break;
        case CommandKind::Comment:
        case CommandKind::Unknown:
            break;
        }
    }

    plan.final_position_mm = pos_mm;
    return out;
}

/// Bang-bang heater pair integrated on a fixed absolute control grid. The
/// grid keeps heater event times independent of the motion noise seed.
class ThermalLane {
public:
    ThermalLane(const PrinterProfile& profile) : profile_(profile) {
        temp_[0] = profile.hotend.ambient_c;
        temp_[1] = profile.bed.ambient_c;
    }

    void set_target(int heater, double value, Tick t, TargetSchedule& schedule) {
        advance_to(t);
        const HeaterParams& h = heater == 0 ? profile_.hotend : profile_.bed;
        double v = std::min(value, h.max_temp_c - 5.0);
        if (v < 0)
            v = 0;
        target_[heater] = v;
        auto& entries = heater == 0 ? schedule.hotend : schedule.bed;
        entries.push_back({t, v});
    }

    /// Integrates control ticks up to and including `t`.
    void advance_to(Tick t) {
        while ((next_tick_ + 1) * kThermalCadence <= t)
            control_step();
    }

    /// Runs the controller until the heater reaches its target. Returns the
    /// control tick where the threshold was met.
    Tick advance_until_reached(int heater) {
        if (temp_[heater] >= target_[heater])
            return next_tick_ * kThermalCadence;
        // A target the plant cannot reach would spin forever; 1h of
        // simulated time is far beyond any sane heat-up.
        const Tick limit = next_tick_ + 3600 * (kTicksPerSecond / kThermalCadence);
        while (temp_[heater] < target_[heater]) {
            if (next_tick_ > limit)
                throw std::runtime_error("heater cannot reach target temperature");
            control_step();
        }
        return next_tick_ * kThermalCadence;
    }

    std::vector<Event> take_events() { return std::move(events_); }
    double temp(int heater) const { return temp_[heater]; }

private:
    void control_step() {
        // Integrate [next_tick_, next_tick_+1) with the current drive, then
        // let the controller react at the end of the interval.
        const double dt = static_cast<double>(kThermalCadence) / kTicksPerSecond;
        for (int h = 0; h < 2; ++h) {
            const HeaterParams& hp = h == 0 ? profile_.hotend : profile_.bed;
            double t_inf = hp.ambient_c +
                           hp.heat_rate_c_per_s * level_[h] * hp.cool_time_constant_s;
            temp_[h] = t_inf + (temp_[h] - t_inf) * std::exp(-dt / hp.cool_time_constant_s);
        }
        ++next_tick_;
        const Tick now = next_tick_ * kThermalCadence;
        for (int h = 0; h < 2; ++h) {
            int want = bang_bang_duty(temp_[h], target_[h], profile_.heater_hysteresis_c,
                                      level_[h]);
            if (want != level_[h]) {
                level_[h] = want;
                events_.push_back({now, h == 0 ? Line::HEAT_HOTEND : Line::HEAT_BED,
                                   static_cast<std::uint8_t>(want)});
            }
        }
    }

    const PrinterProfile& profile_;
    double temp_[2];
    double target_[2] = {0.0, 0.0};
    int level_[2] = {0, 0};
    Tick next_tick_ = 0;
    std::vector<Event> events_;
};

/// Software fan PWM at 100 Hz; duty 255 holds the line high, duty 0 low.
class FanLane {
public:
    void set_duty(int duty, Tick t) {
        flush(t);
        duty_ = duty;
    }

    void flush(Tick to) {
        while (cursor_ + kFanPwmPeriod <= to) {
            emit_window(cursor_, cursor_ + kFanPwmPeriod);
            cursor_ += kFanPwmPeriod;
        }
        if (to > cursor_) {
            emit_window(cursor_, to);
            cursor_ = to;
        }
    }

    std::vector<Event> take_events() { return std::move(events_); }

private:
    void emit_window(Tick from, Tick to) {
        Tick high = kFanPwmPeriod * duty_ / 255;
        Tick hi_end = from + high;
        if (duty_ <= 0) {
            set_level(0, from);
            return;
        }
        set_level(1, from);
        if (hi_end < to)
            set_level(0, hi_end);
    }

    void set_level(int level, Tick t) {
        if (level_ == level)
            return;
        level_ = level;
        events_.push_back({t, Line::FAN, static_cast<std::uint8_t>(level)});
    }

    int duty_ = 0;
    int level_ = 0;
    Tick cursor_ = 0;
    std::vector<Event> events_;
};

struct MotionState {
    std::array<std::int64_t, kAxisCount> pos_steps = {0, 0, 0, 0};
    std::array<int, kAxisCount> dir_level = {0, 0, 0, 0};       // line levels
    std::array<int, 3> endstop_level = {0, 0, 0};
};

class TimelineBuilder {
public:
    void emit(Tick t, Line line, int level) {
        events_.push_back({t, line, static_cast<std::uint8_t>(level)});
    }

    void set_dir(MotionState& st, Axis axis, int level, Tick t) {
        int a = static_cast<int>(axis);
        if (st.dir_level[a] == level)
            return;
        st.dir_level[a] = level;
        emit(t, dir_line(axis), level);
    }

    /// Moves one axis by a single step and mirrors the endstop reaction.
    void apply_step(MotionState& st, Axis axis, Tick rise) {
        int a = static_cast<int>(axis);
        emit(rise, step_line(axis), 1);
        emit(rise + kStepHighTicks, step_line(axis), 0);
        st.pos_steps[a] += st.dir_level[a] ? 1 : -1;
        if (a < 3) {
            int level = st.pos_steps[a] <= 0 ? 1 : 0;
            if (level != st.endstop_level[a]) {
                st.endstop_level[a] = level;
                emit(rise + 1, endstop_line(axis), level);
                if (level == 1)
                    last_endstop_rise_ = rise + 1;
            }
        }
    }

    Tick last_endstop_rise() const { return last_endstop_rise_; }
    std::vector<Event>& events() { return events_; }

private:
    std::vector<Event> events_;
    Tick last_endstop_rise_ = 0;
};

}  // namespace

const char* event_kind_name(EventKind kind) {
    switch (kind) {
    case EventKind::PrintComplete: return "PrintComplete";
    case EventKind::ThermalRunawayHalt: return "ThermalRunawayHalt";
    case EventKind::TempReached: return "TempReached";
    case EventKind::MotorsDisabled: return "MotorsDisabled";
    case EventKind::HomingFault: return "HomingFault";
    }
    return "?";
}

double TargetSchedule::hotend_target_at(Tick t) const {
    double v = 0.0;
    for (const auto& [tick, target] : hotend) {
        if (tick > t)
            break;
        v = target;
    }
    return v;
}

double TargetSchedule::bed_target_at(Tick t) const {
    double v = 0.0;
    for (const auto& [tick, target] : bed) {
        if (tick > t)
            break;
        v = target;
    }
    return v;
}

int bang_bang_duty(double temp_c, double target_c, double hysteresis_c, int previous) {
    if (target_c <= 0)
        return 0;
    if (temp_c < target_c - hysteresis_c)
        return 1;
    if (temp_c > target_c + hysteresis_c)
        return 0;
    return previous;
}

PlanResult plan(const gcode::Program& program, const PrinterProfile& profile) {
    return plan_internal(program, profile).result;
}

std::optional<ThermalFault> thermal_runaway_check(
    const std::vector<ThermalSample>& temp_history,
    const std::vector<DutySample>& duty_history,
    double watch_period_s, double min_rise_c, double max_temp_c) {
    const size_t n = std::min(temp_history.size(), duty_history.size());
    bool watching = false;
    Tick watch_start = 0;
    double watch_temp = 0.0;
    const Tick watch_ticks = std::llround(watch_period_s * kTicksPerSecond);

    for (size_t i = 0; i < n; ++i) {
        const ThermalSample& ts = temp_history[i];
        if (ts.temp_c > max_temp_c)
            return ThermalFault{ts.t, "temperature exceeded maximum"};
        if (duty_history[i].duty < 0.5) {
            watching = false;
            continue;
        }
        if (!watching) {
            watching = true;
            watch_start = ts.t;
            watch_temp = ts.temp_c;
            continue;
        }
        if (ts.temp_c >= watch_temp + min_rise_c) {
            watch_start = ts.t;  // progress; restart the watch window
            watch_temp = ts.temp_c;
        } else if (ts.t - watch_start >= watch_ticks) {
            return ThermalFault{ts.t, "heater powered without temperature rise"};
        }
    }
    return std::nullopt;
}

namespace {

/// Homes one axis closed-loop: back off if already triggered, then approach
/// the minimum until the endstop rises. Returns false when the travel cap is
/// hit before a trigger (broken switch / bad profile).
bool home_axis(TimelineBuilder& tb, MotionState& st, const PrinterProfile& profile,
               Axis axis, Tick& t) {
    const int a = static_cast<int>(axis);
    const double spm = profile.steps_per_mm[a];
    const double feed = axis == Axis::Z ? profile.homing_feed_z_mm_s
                                        : profile.homing_feed_xy_mm_s;
    const Tick period = std::llround(kTicksPerSecond / (feed * spm));
    const std::int64_t backoff_steps = std::llround(profile.homing_backoff_mm * spm);
    const std::int64_t travel_cap = std::llround(
        1.5 * (profile.build_volume_mm[a] + profile.homing_backoff_mm +
               profile.endstop_overtravel_mm) * spm);

    if (st.pos_steps[a] <= 0) {
        tb.set_dir(st, axis, 1, t);
        t += period;
        while (st.pos_steps[a] < backoff_steps) {
            tb.apply_step(st, axis, t + period / 2);
            t += period;
        }
    }

    tb.set_dir(st, axis, 0, t);
    t += period;
    std::int64_t taken = 0;
    while (st.endstop_level[a] == 0) {
        if (taken > travel_cap)
            return false;
        tb.apply_step(st, axis, t + period / 2);
        t += period;
        ++taken;
    }
    st.pos_steps[a] = 0;
    return true;
}

}  // namespace

SimResult simulate_print(const gcode::Program& program, const PrinterProfile& profile,
                         std::uint64_t noise_seed) {
    InternalPlan planned = plan_internal(program, profile);
    SimResult out;
    out.plan = planned.result;

    TimelineBuilder tb;
    MotionState st;
    ThermalLane thermal(profile);
    FanLane fan;
    std::mt19937_64 rng(noise_seed);
    const double jitter = profile.jitter_percent / 100.0;

    for (int a = 0; a < 3; ++a)
        st.pos_steps[a] = std::llround(profile.start_position_mm[a] * profile.steps_per_mm[a]);

    Tick t = 0;
    for (int a = 0; a < kAxisCount; ++a)
        tb.emit(0, enable_line(static_cast<Axis>(a)), 1);
    for (int a = 0; a < 3; ++a) {
        if (st.pos_steps[a] <= 0) {
            st.endstop_level[a] = 1;
            tb.emit(0, endstop_line(static_cast<Axis>(a)), 1);
        }
    }
    t = 1000;

    auto run_homing = [&]() {
        for (Axis axis : profile.homing_order) {
            if (!home_axis(tb, st, profile, axis, t))
                out.events.push_back({EventKind::HomingFault, t,
                                      std::string("endstop never triggered on ") +
                                          axis_name(axis)});
        }
        out.homed_tick = tb.last_endstop_rise();
    };
    run_homing();

    bool motors_on = true;
    auto ensure_motors = [&]() {
        if (motors_on)
            return;
        for (int a = 0; a < kAxisCount; ++a)
            tb.emit(t, enable_line(static_cast<Axis>(a)), 1);
        motors_on = true;
        t += 1000;
    };

    for (const PlannedAction& action : planned.actions) {
        thermal.advance_to(t);
        switch (action.kind) {
        case PlannedAction::Segment: {
            const MotionSegment& seg = planned.result.segments[action.segment_index];
            if (seg.is_dwell()) {
                t += seg.duration;
                break;
            }
            ensure_motors();
            const double eps = signed_unit(rng) * jitter;
            const Tick D = seg.duration;
            for (int a = 0; a < kAxisCount; ++a)
                if (seg.steps[a] != 0)
                    tb.set_dir(st, static_cast<Axis>(a), seg.dir_level[a], t);
            // Interleave per-axis pulse trains; each axis spreads its steps
            // across the segment at midpoints, then the shared warp bends
            // event times inside the segment without moving its ends.
            struct AxisCursor {
                int axis;
                std::int64_t n;
                std::int64_t k = 0;
            };
            std::vector<AxisCursor> cursors;
            for (int a = 0; a < kAxisCount; ++a)
                if (seg.steps[a] != 0)
                    cursors.push_back({a, std::abs(seg.steps[a])});
            auto nominal = [&](const AxisCursor& c) {
                return (2 * c.k + 1) * D / (2 * c.n);
            };
            while (true) {
                AxisCursor* best = nullptr;
                Tick best_u = 0;
                for (AxisCursor& c : cursors) {
                    if (c.k >= c.n)
                        continue;
                    Tick u = nominal(c);
                    if (!best || u < best_u) {
                        best = &c;
                        best_u = u;
                    }
                }
                if (!best)
                    break;
                Tick shift = std::llround(eps * static_cast<double>(
                                                    std::min(best_u, D - best_u)));
                tb.apply_step(st, static_cast<Axis>(best->axis), t + best_u + shift);
                ++best->k;
            }
            t += D;
            break;
        }
        case PlannedAction::Home:
            ensure_motors();
            run_homing();
            break;
        case PlannedAction::SetFan:
            fan.set_duty(static_cast<int>(action.value), t);
            break;
        case PlannedAction::SetHotend:
            thermal.set_target(0, action.value, t, out.targets);
            break;
        case PlannedAction::WaitHotend: {
            Tick reached = thermal.advance_until_reached(0);
            if (reached > t) {
                t = reached;
                out.events.push_back({EventKind::TempReached, t, "hotend"});
            }
            break;
        }
        case PlannedAction::SetBed:
            thermal.set_target(1, action.value, t, out.targets);
            break;
        case PlannedAction::WaitBed: {
            Tick reached = thermal.advance_until_reached(1);
            if (reached > t) {
                t = reached;
                out.events.push_back({EventKind::TempReached, t, "bed"});
            }
            break;
        }
        case PlannedAction::MotorsOff:
            if (motors_on) {
                for (int a = 0; a < kAxisCount; ++a)
                    tb.emit(t, enable_line(static_cast<Axis>(a)), 0);
                motors_on = false;
                out.events.push_back({EventKind::MotorsDisabled, t, ""});
                t += 1000;
            }
            break;
        }
    }

    thermal.advance_to(t);
    fan.flush(t);
    out.events.push_back({EventKind::PrintComplete, t, ""});
    out.end_tick = t;

    std::vector<Event>& events = tb.events();
    auto thermal_events = thermal.take_events();
    auto fan_events = fan.take_events();
    events.insert(events.end(), thermal_events.begin(), thermal_events.end());
    events.insert(events.end(), fan_events.begin(), fan_events.end());
    sort_events(events);

    out.timeline.events = std::move(events);
    return out;
}

}  // namespace rampsim::firmware
