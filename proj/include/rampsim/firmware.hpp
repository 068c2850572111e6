#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rampsim/gcode.hpp"
#include "rampsim/profile.hpp"
#include "rampsim/signals.hpp"

namespace rampsim::firmware {

/// One planned move: signed step counts per axis, a nominal duration, and
/// the direction levels driven while it executes.
struct MotionSegment {
    std::array<std::int64_t, kAxisCount> steps = {0, 0, 0, 0};
    Tick duration = 0;
    std::array<std::uint8_t, kAxisCount> dir_level = {1, 1, 1, 1};
    double feed_mm_s = 0.0;
    int source_line = 0;

    std::int64_t steps_of(Axis a) const { return steps[static_cast<int>(a)]; }
    bool is_dwell() const {
        return steps[0] == 0 && steps[1] == 0 && steps[2] == 0 && steps[3] == 0;
    }
};

enum class EventKind {
    PrintComplete,
    ThermalRunawayHalt,
    TempReached,
    MotorsDisabled,
    HomingFault,
};

const char* event_kind_name(EventKind kind);

struct FirmwareEvent {
    EventKind kind;
    Tick t = 0;
    std::string detail;
};

/// Heater setpoint changes over the run, used to reconstruct controller
/// intent when the delivered signals have been tampered with.
struct TargetSchedule {
    std::vector<std::pair<Tick, double>> hotend;
    std::vector<std::pair<Tick, double>> bed;

    double hotend_target_at(Tick t) const;
    double bed_target_at(Tick t) const;
};

struct PlanResult {
    std::vector<MotionSegment> segments;
    /// Commanded end position of the toolpath in mm (X, Y, Z) and total
    /// commanded extrusion travel of the E axis.
    std::array<double, kAxisCount> final_position_mm = {0, 0, 0, 0};
    std::array<std::int64_t, kAxisCount> total_signed_steps = {0, 0, 0, 0};
    std::vector<gcode::Diagnostic> diagnostics;
};

/// Converts a parsed program into motion segments. Positions are absolute
/// from the homing origin; E starts at 0 or the last G92 E value. Throws
/// std::runtime_error when a move leaves the build volume and the profile
/// policy is Reject.
PlanResult plan(const gcode::Program& program, const PrinterProfile& profile);

struct SimResult {
    SignalTimeline timeline;
    std::vector<FirmwareEvent> events;
    TargetSchedule targets;
    /// Tick of the final homing endstop actuation (capture sync reference).
    Tick homed_tick = 0;
    Tick end_tick = 0;
    PlanResult plan;
};

/// Runs the whole print: homing, heat-up, planned motion with seeded timing
/// noise, bang-bang heater control and fan PWM. The same seed reproduces a
/// byte-identical timeline; step counts never depend on the seed.
SimResult simulate_print(const gcode::Program& program, const PrinterProfile& profile,
                         std::uint64_t noise_seed);

struct ThermalSample {
    Tick t;
    double temp_c;
};

struct DutySample {
    Tick t;
    double duty;  // 0..1
};

struct ThermalFault {
    Tick t;
    std::string reason;
};

/// Thermal-runaway rule: fault when the heater is commanded at >= 50% duty
/// for a full watch period without the temperature rising by min_rise, or
/// when the temperature exceeds max_temp. Histories must share a cadence.
std::optional<ThermalFault> thermal_runaway_check(
    const std::vector<ThermalSample>& temp_history,
    const std::vector<DutySample>& duty_history,
    double watch_period_s, double min_rise_c, double max_temp_c);

/// Bang-bang controller decision used by the simulator and by detection-side
/// intent reconstruction: heat when below target - hysteresis, stop when
/// above target + hysteresis, otherwise hold the previous level.
int bang_bang_duty(double temp_c, double target_c, double hysteresis_c, int previous);

}  // namespace rampsim::firmware
