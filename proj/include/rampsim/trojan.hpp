#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rampsim/configfile.hpp"
#include "rampsim/profile.hpp"
#include "rampsim/signals.hpp"

namespace rampsim::trojan {

enum class TrojanId { T1, T2, T3, T4, T5, T6, T7, T8, T9 };

const char* trojan_name(TrojanId id);
bool parse_trojan_name(const std::string& name, TrojanId& out);

enum class HeaterTarget { D10_Hotend, D8_Bed };
enum class T3Mode { Over, Under };
enum class T5Placement { Start, Layer };

/// Parameters for every implemented signal-level attack. Only entries listed
/// in `enabled` act; an empty set makes `apply` the identity.
struct TrojanConfig {
    std::set<TrojanId> enabled;
    std::uint64_t seed = 0;

    struct {
        double period_s = 10.0;      // burst cadence after homing
        int max_shift_steps = 200;   // per-burst injected pulse cap
    } t1;
    struct {
        std::string mask_mode = "every_other";
    } t2;
    struct {
        T3Mode mode = T3Mode::Over;
        int extra_e_steps_per_y_burst = 50;
    } t3;
    struct {
        int layer_increment_min = 2;  // layers between bursts, seeded uniform
        int layer_increment_max = 10;
        int shift_steps = 300;
    } t4;
    struct {
        int z_shift_steps = 160;
        T5Placement at = T5Placement::Start;
        int layer = 1;  // used when at == Layer
    } t5;
    struct {
        std::set<HeaterTarget> targets = {HeaterTarget::D10_Hotend};
    } t6;
    struct {
        std::set<HeaterTarget> targets = {HeaterTarget::D10_Hotend};
    } t7;
    struct {
        Axis axis = Axis::Y;
        std::vector<std::pair<double, double>> toggle_schedule;  // (on_s, off_s) after homing
    } t8;
    struct {
        double duty_scale = 0.5;  // 0..1
    } t9;

    bool is_enabled(TrojanId id) const { return enabled.count(id) != 0; }

    /// Structural checks: parameters in range, seed present when a
    /// stochastic trojan (T1/T4) is enabled.
    void validate() const;
    /// Rejects configs that reference axes or heaters the profile lacks.
    void validate_against(const PrinterProfile& profile) const;
};

TrojanConfig config_from_configfile(const ConfigFile& cfg);
TrojanConfig load_trojan_config(const std::string& path);

/// Homing-detection state machine. Advances one state per expected endstop
/// actuation, in the profile's homing order; out-of-order actuations are
/// ignored. Homed is terminal.
class HomingFsm {
public:
    explicit HomingFsm(std::vector<Axis> order) : order_(std::move(order)) {}

    /// Feed one endstop rising edge (time order required across calls).
    void step(Axis axis, Tick t);

    bool homed() const { return progress_ == order_.size(); }
    Tick homed_tick() const { return homed_tick_; }
    size_t progress() const { return progress_; }

private:
    std::vector<Axis> order_;
    size_t progress_ = 0;
    Tick homed_tick_ = 0;
};

/// Runs the FSM over a timeline's endstop edges. Returns the tick of the
/// completing actuation, or nullopt if the timeline never homes.
std::optional<Tick> find_homed_tick(const SignalTimeline& timeline,
                                    const std::vector<Axis>& homing_order);

/// Applies every enabled trojan to the timeline. Nothing earlier than the
/// homing-complete tick is touched; an empty config returns the input
/// bit-identically. Deterministic for a fixed (timeline, config) pair.
SignalTimeline apply(const SignalTimeline& timeline, const TrojanConfig& config,
                     const PrinterProfile& profile);

}  // namespace rampsim::trojan
