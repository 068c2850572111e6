#pragma once

#include <array>
#include <string>
#include <vector>

#include "rampsim/configfile.hpp"
#include "rampsim/signals.hpp"

namespace rampsim {

/// First-order heater model constants: dT/dt = heat_rate*duty - (T-ambient)/tau.
struct HeaterParams {
    double max_temp_c = 275.0;
    double ambient_c = 25.0;
    double heat_rate_c_per_s = 30.0;
    double cool_time_constant_s = 120.0;
};

enum class VolumePolicy { Clamp, Reject };

/// Kinematic and thermal calibration of the simulated printer. Values are
/// loadable from a profile config file; the defaults describe the reference
/// test machine.
struct PrinterProfile {
    std::array<double, kAxisCount> steps_per_mm = {100.0, 100.0, 400.0, 280.0};
    std::array<double, kAxisCount> max_feedrate_mm_s = {180.0, 180.0, 10.0, 60.0};
    std::array<int, kAxisCount> microstep_factor = {16, 16, 16, 16};
    std::array<double, 3> build_volume_mm = {220.0, 220.0, 250.0};
    /// Axes homed, in order. Must be a permutation of a subset of {X, Y, Z}.
    std::vector<Axis> homing_order = {Axis::X, Axis::Y, Axis::Z};
    double homing_feed_xy_mm_s = 40.0;
    double homing_feed_z_mm_s = 6.0;
    double homing_backoff_mm = 2.0;
    /// Travel allowed past an axis minimum before the frame stops it.
    double endstop_overtravel_mm = 2.0;
    /// Head pose when the machine powers on, before homing.
    std::array<double, 3> start_position_mm = {15.0, 15.0, 8.0};

    HeaterParams hotend;
    HeaterParams bed{120.0, 25.0, 2.0, 300.0};
    int fan_max_duty = 255;

    /// Bang-bang heater hysteresis and the thermal-runaway watchdog.
    double heater_hysteresis_c = 2.0;
    double runaway_watch_period_s = 40.0;
    double runaway_min_rise_c = 2.0;

    /// Per-segment timing noise amplitude, percent. Zero disables noise.
    double jitter_percent = 1.0;

    VolumePolicy volume_policy = VolumePolicy::Clamp;

    double steps_per_mm_of(Axis a) const { return steps_per_mm[static_cast<int>(a)]; }
    double max_feed_of(Axis a) const { return max_feedrate_mm_s[static_cast<int>(a)]; }

    /// Throws std::invalid_argument when a constraint is violated
    /// (non-positive steps/mm, bad homing order, max_temp <= ambient, ...).
    void validate() const;
};

PrinterProfile profile_from_config(const ConfigFile& cfg);
PrinterProfile load_profile(const std::string& path);
std::string profile_to_config_text(const PrinterProfile& profile);

}  // namespace rampsim
