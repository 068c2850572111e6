#include "rampsim/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace rampsim::plant {

namespace {

constexpr Tick kSampleInterval = 10'000'000;  // 0.1 s
constexpr Tick kThermalCadence = 5'000'000;   // matches the firmware grid

struct Heater {
    const HeaterParams* params;
    double temp;
    int level = 0;
    Tick level_since = 0;

    /// Closed-form first-order advance from level_since to t.
    void advance(Tick t) {
        if (t <= level_since)
            return;
        double dt = static_cast<double>(t - level_since) / kTicksPerSecond;
        double t_inf = params->ambient_c +
                       params->heat_rate_c_per_s * level * params->cool_time_constant_s;
        temp = t_inf + (temp - t_inf) * std::exp(-dt / params->cool_time_constant_s);
        level_since = t;
    }

    /// Tick at which temp crosses `threshold` while at the current level, or
    /// nullopt if it never does.
    std::optional<Tick> crossing_time(double threshold) const {
        double t_inf = params->ambient_c +
                       params->heat_rate_c_per_s * level * params->cool_time_constant_s;
        if (temp >= threshold)
            return level_since;
        if (t_inf <= threshold)
            return std::nullopt;
        double dt = -params->cool_time_constant_s *
                    std::log((t_inf - threshold) / (t_inf - temp));
        return level_since + static_cast<Tick>(std::ceil(dt * kTicksPerSecond));
    }
};

}  // namespace

ReplayResult apply_timeline(const SignalTimeline& timeline, const PrinterProfile& profile) {
    profile.validate();
    ReplayResult out;

    std::array<std::int64_t, kAxisCount> pos_steps = {0, 0, 0, 0};
    for (int a = 0; a < 3; ++a)
        pos_steps[a] = std::llround(profile.start_position_mm[a] * profile.steps_per_mm[a]);
    std::array<int, kAxisCount> dir = {0, 0, 0, 0};
    std::array<int, kAxisCount> en = {0, 0, 0, 0};
    std::array<int, kAxisCount> step_level = {0, 0, 0, 0};
    std::array<std::int64_t, kAxisCount> limit_min = {0, 0, 0, 0};
    std::array<std::int64_t, kAxisCount> limit_max = {0, 0, 0, 0};
    for (int a = 0; a < 3; ++a) {
        double spm = profile.steps_per_mm[a];
        limit_min[a] = -std::llround(profile.endstop_overtravel_mm * spm);
        limit_max[a] = std::llround(
            (profile.build_volume_mm[a] + profile.endstop_overtravel_mm) * spm);
    }
    limit_min[3] = std::numeric_limits<std::int64_t>::min() / 2;
    limit_max[3] = std::numeric_limits<std::int64_t>::max() / 2;

    Heater hotend{&profile.hotend, profile.hotend.ambient_c};
    Heater bed{&profile.bed, profile.bed.ambient_c};

    bool destroyed = false;
    Tick destroyed_at = 0;
    std::string destroyed_reason;

    // Fan duty is measured as high-time over each sample window.
    int fan_level = 0;
    Tick fan_since = 0;
    Tick fan_high_in_window = 0;
    Tick window_start = 0;
    std::int64_t window_e_start = 0;

    Tick next_sample = kSampleInterval;
    Tick next_thermal = kThermalCadence;

    auto check_destruction = [&](Tick now) {
        if (destroyed)
            return;
        auto cross = hotend.crossing_time(profile.hotend.max_temp_c);
        if (cross && *cross <= now) {
            destroyed = true;
            destroyed_at = *cross;
            destroyed_reason = "hotend exceeded max temperature";
        }
    };

    auto snapshot_state = [&](Tick t) {
        PlantState s;
        for (int a = 0; a < 3; ++a)
            s.position_mm[a] = static_cast<double>(pos_steps[a]) / profile.steps_per_mm[a];
        s.extruded_mm = static_cast<double>(pos_steps[3]) / profile.steps_per_mm[3];
        s.hotend_temp_c = hotend.temp;
        s.bed_temp_c = bed.temp;
        for (int a = 0; a < kAxisCount; ++a)
            s.motors_enabled[a] = en[a] != 0;
        s.destroyed = destroyed;
        s.destroyed_reason = destroyed_reason;
        Tick high = fan_high_in_window + (fan_level ? t - fan_since : 0);
        Tick span = t - window_start;
        s.fan_duty = span > 0 ? static_cast<int>(255 * high / span) : fan_level * 255;
        return s;
    };

    auto advance_time = [&](Tick to) {
        while (next_thermal <= to || next_sample <= to) {
            if (next_thermal <= next_sample) {
                hotend.advance(next_thermal);
                bed.advance(next_thermal);
                check_destruction(next_thermal);
                out.hotend_temps.push_back({next_thermal, hotend.temp});
                out.bed_temps.push_back({next_thermal, bed.temp});
                next_thermal += kThermalCadence;
            } else {
                Tick t = next_sample;
                hotend.advance(t);
                bed.advance(t);
                check_destruction(t);
                PlantState s = snapshot_state(t);
                out.trace.push_back({t, s});
                std::int64_t de_steps = pos_steps[3] - window_e_start;
                if (de_steps > 0)
                    out.deposition.push_back(
                        {static_cast<double>(t) / kTicksPerSecond, s.position_mm[0],
                         s.position_mm[1], s.position_mm[2],
                         static_cast<double>(de_steps) / profile.steps_per_mm[3]});
                window_e_start = pos_steps[3];
                window_start = t;
                fan_high_in_window = 0;
                if (fan_level)
                    fan_since = t;
                next_sample += kSampleInterval;
            }
        }
    };

    for (const Event& ev : timeline.events) {
        advance_time(ev.t);
        Axis axis;
        if (axis_of_line(ev.line, axis)) {
            int a = static_cast<int>(axis);
            if (ev.line == step_line(axis)) {
                int prev = step_level[a];
                step_level[a] = ev.level;
                if (prev == 0 && ev.level == 1) {
                    if (!en[a]) {
                        ++out.ignored_steps;
                    } else {
                        std::int64_t next = pos_steps[a] + (dir[a] ? 1 : -1);
                        if (next < limit_min[a] || next > limit_max[a])
                            ++out.clamped_steps;
                        else
                            pos_steps[a] = next;
                    }
                }
            } else if (ev.line == dir_line(axis)) {
                dir[a] = ev.level;
            } else {
                en[a] = ev.level;
            }
            continue;
        }
        switch (ev.line) {
        case Line::HEAT_HOTEND:
            hotend.advance(ev.t);
            check_destruction(ev.t);
            hotend.level = ev.level;
            hotend.level_since = ev.t;
            break;
        case Line::HEAT_BED:
            bed.advance(ev.t);
            bed.level = ev.level;
            bed.level_since = ev.t;
            break;
        case Line::FAN:
            if (fan_level != ev.level) {
                if (fan_level)
                    fan_high_in_window += ev.t - fan_since;
                fan_level = ev.level;
                fan_since = ev.t;
            }
            break;
        default:
            break;  // endstop lines are plant outputs; recorded copies ignored
        }
    }

    Tick end = timeline.events.empty() ? 0 : timeline.events.back().t;
    hotend.advance(end);
    bed.advance(end);
    check_destruction(end);

    out.final_state = snapshot_state(end);
    if (destroyed)
        out.destroyed_at = destroyed_at;
    return out;
}

bool deposition_centroid(const std::vector<DepositionEntry>& log,
                         std::array<double, 3>& centroid_out) {
    double mass = 0.0, cx = 0.0, cy = 0.0, cz = 0.0;
    for (const DepositionEntry& d : log) {
        mass += d.de_mm;
        cx += d.x_mm * d.de_mm;
        cy += d.y_mm * d.de_mm;
        cz += d.z_mm * d.de_mm;
    }
    if (mass <= 0)
        return false;
    centroid_out = {cx / mass, cy / mass, cz / mass};
    return true;
}

std::vector<std::pair<double, std::array<double, 2>>> layer_centroids(
    const std::vector<DepositionEntry>& log) {
    std::map<std::int64_t, std::array<double, 3>> acc;  // z in um -> (mass, mx, my)
    for (const DepositionEntry& d : log) {
        auto& slot = acc[std::llround(d.z_mm * 1000.0)];
        slot[0] += d.de_mm;
        slot[1] += d.x_mm * d.de_mm;
        slot[2] += d.y_mm * d.de_mm;
    }
    std::vector<std::pair<double, std::array<double, 2>>> out;
    for (const auto& [z_um, slot] : acc)
        if (slot[0] > 0)
            out.push_back({static_cast<double>(z_um) / 1000.0,
                           {slot[1] / slot[0], slot[2] / slot[0]}});
    return out;
}

std::string deposition_to_csv(const std::vector<DepositionEntry>& log) {
    std::ostringstream os;
    os << "t,x,y,z,de\n";
    os.setf(std::ios::fixed);
    os.precision(5);
    for (const DepositionEntry& d : log)
        os << d.t_s << ',' << d.x_mm << ',' << d.y_mm << ',' << d.z_mm << ','
           << d.de_mm << '\n';
    return os.str();
}

}  // namespace rampsim::plant
