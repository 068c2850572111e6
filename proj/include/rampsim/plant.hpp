#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rampsim/profile.hpp"
#include "rampsim/signals.hpp"

namespace rampsim::plant {

/// Physical state of the printer at one instant.
struct PlantState {
    std::array<double, 3> position_mm = {0, 0, 0};
    double extruded_mm = 0.0;
    double hotend_temp_c = 25.0;
    double bed_temp_c = 25.0;
    int fan_duty = 0;  // 0..255, measured from the FAN line
    std::array<bool, kAxisCount> motors_enabled = {false, false, false, false};
    bool destroyed = false;
    std::string destroyed_reason;
};

/// One 0.1 s sample of the state trace.
struct StateSample {
    Tick t;
    PlantState state;
};

/// Material placed during one 0.1 s interval with positive extrusion.
struct DepositionEntry {
    double t_s;
    double x_mm, y_mm, z_mm;
    double de_mm;
};

struct ReplayResult {
    PlantState final_state;
    std::vector<StateSample> trace;
    std::vector<DepositionEntry> deposition;
    /// Hotend/bed temperature at the firmware control cadence, for the
    /// runaway watchdog running on delivered (possibly tampered) signals.
    std::vector<std::pair<Tick, double>> hotend_temps;
    std::vector<std::pair<Tick, double>> bed_temps;
    /// STEP pulses that arrived while the motor was disabled.
    std::int64_t ignored_steps = 0;
    /// Steps that ran into the frame at either end of an axis.
    std::int64_t clamped_steps = 0;
    std::optional<Tick> destroyed_at;
};

/// Integrates a full timeline: step edges move axes (gated by EN, signed by
/// DIR), heater lines drive the first-order thermal model, endstops and
/// destruction latch from state. The initial pose comes from the profile.
ReplayResult apply_timeline(const SignalTimeline& timeline, const PrinterProfile& profile);

/// ΔE-weighted mean deposition position. Returns false when nothing was
/// deposited.
bool deposition_centroid(const std::vector<DepositionEntry>& log,
                         std::array<double, 3>& centroid_out);

/// Per-layer (grouped by z) ΔE-weighted XY centroids, keyed by z in mm.
std::vector<std::pair<double, std::array<double, 2>>> layer_centroids(
    const std::vector<DepositionEntry>& log);

std::string deposition_to_csv(const std::vector<DepositionEntry>& log);

}  // namespace rampsim::plant
