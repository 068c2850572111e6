#include "rampsim/profile.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rampsim {

namespace {

Axis axis_from_letter(const std::string& s) {
    if (s == "x" || s == "X") return Axis::X;
    if (s == "y" || s == "Y") return Axis::Y;
    if (s == "z" || s == "Z") return Axis::Z;
    if (s == "e" || s == "E") return Axis::E;
    throw std::invalid_argument("unknown axis: " + s);
}

const char* kAxisKeys[kAxisCount] = {"x", "y", "z", "e"};

void read_heater(const ConfigFile& cfg, const std::string& prefix, HeaterParams& h) {
    h.max_temp_c = cfg.get_number(prefix + ".max_temp", h.max_temp_c);
    h.ambient_c = cfg.get_number(prefix + ".ambient", h.ambient_c);
    h.heat_rate_c_per_s = cfg.get_number(prefix + ".heat_rate", h.heat_rate_c_per_s);
    h.cool_time_constant_s = cfg.get_number(prefix + ".cool_time_constant", h.cool_time_constant_s);
}

}  // namespace

void PrinterProfile::validate() const {
    for (int i = 0; i < kAxisCount; ++i) {
        if (steps_per_mm[i] <= 0)
            throw std::invalid_argument("steps_per_mm must be positive");
        if (max_feedrate_mm_s[i] <= 0)
            throw std::invalid_argument("max_feedrate must be positive");
        int f = microstep_factor[i];
        if (f != 1 && f != 2 && f != 4 && f != 8 && f != 16)
            throw std::invalid_argument("microstep factor must be one of 1,2,4,8,16");
    }
    for (double v : build_volume_mm)
        if (v <= 0)
            throw std::invalid_argument("build volume must be positive");
    std::set<Axis> seen;
    for (Axis a : homing_order) {
        if (a == Axis::E)
            throw std::invalid_argument("extruder cannot be homed");
        if (!seen.insert(a).second)
            throw std::invalid_argument("homing order repeats an axis");
    }
    if (homing_order.empty())
        throw std::invalid_argument("homing order must name at least one axis");
    if (hotend.max_temp_c <= hotend.ambient_c || bed.max_temp_c <= bed.ambient_c)
        throw std::invalid_argument("heater max_temp must exceed ambient");
    if (homing_feed_xy_mm_s <= 0 || homing_feed_z_mm_s <= 0 || homing_backoff_mm <= 0)
        throw std::invalid_argument("homing feed and backoff must be positive");
    if (jitter_percent < 0 || jitter_percent > 20)
        throw std::invalid_argument("jitter_percent out of range [0, 20]");
}

PrinterProfile profile_from_config(const ConfigFile& cfg) {
    PrinterProfile p;
    for (int i = 0; i < kAxisCount; ++i) {
        std::string a = kAxisKeys[i];
        p.steps_per_mm[i] = cfg.get_number("steps_per_mm." + a, p.steps_per_mm[i]);
        p.max_feedrate_mm_s[i] = cfg.get_number("max_feedrate." + a, p.max_feedrate_mm_s[i]);
        p.microstep_factor[i] =
            static_cast<int>(cfg.get_number("microstep." + a, p.microstep_factor[i]));
    }
    p.build_volume_mm[0] = cfg.get_number("build_volume.x", p.build_volume_mm[0]);
    p.build_volume_mm[1] = cfg.get_number("build_volume.y", p.build_volume_mm[1]);
    p.build_volume_mm[2] = cfg.get_number("build_volume.z", p.build_volume_mm[2]);

    if (cfg.has("homing.order")) {
        std::string order = cfg.get_string("homing.order", "");
        p.homing_order.clear();
        std::string token;
        std::istringstream in(order);
        while (std::getline(in, token, ','))
            if (!token.empty())
                p.homing_order.push_back(axis_from_letter(token));
    }
    p.homing_feed_xy_mm_s = cfg.get_number("homing.feed_xy", p.homing_feed_xy_mm_s);
    p.homing_feed_z_mm_s = cfg.get_number("homing.feed_z", p.homing_feed_z_mm_s);
    p.homing_backoff_mm = cfg.get_number("homing.backoff", p.homing_backoff_mm);
    p.endstop_overtravel_mm = cfg.get_number("endstop.overtravel", p.endstop_overtravel_mm);
    p.start_position_mm[0] = cfg.get_number("start_position.x", p.start_position_mm[0]);
    p.start_position_mm[1] = cfg.get_number("start_position.y", p.start_position_mm[1]);
    p.start_position_mm[2] = cfg.get_number("start_position.z", p.start_position_mm[2]);

    read_heater(cfg, "hotend", p.hotend);
    read_heater(cfg, "bed", p.bed);
    p.fan_max_duty = static_cast<int>(cfg.get_number("fan.max_duty", p.fan_max_duty));

    p.heater_hysteresis_c = cfg.get_number("thermal.hysteresis", p.heater_hysteresis_c);
    p.runaway_watch_period_s = cfg.get_number("thermal.runaway_watch_period", p.runaway_watch_period_s);
    p.runaway_min_rise_c = cfg.get_number("thermal.runaway_min_rise", p.runaway_min_rise_c);
    p.jitter_percent = cfg.get_number("jitter_percent", p.jitter_percent);

    std::string policy = cfg.get_string("volume_policy", "clamp");
    if (policy == "clamp")
        p.volume_policy = VolumePolicy::Clamp;
    else if (policy == "reject")
        p.volume_policy = VolumePolicy::Reject;
    else
        throw std::invalid_argument("volume_policy must be clamp or reject");

    auto leftovers = cfg.unused_keys();
    if (!leftovers.empty())
        throw std::runtime_error("unknown profile key: " + leftovers.front());

    p.validate();
    return p;
}

PrinterProfile load_profile(const std::string& path) {
    return profile_from_config(ConfigFile::load(path));
}

std::string profile_to_config_text(const PrinterProfile& p) {
    std::ostringstream os;
    auto num = [&os](const std::string& key, double v) { os << key << " = " << v << '\n'; };
    for (int i = 0; i < kAxisCount; ++i) {
        std::string a = kAxisKeys[i];
        num("steps_per_mm." + a, p.steps_per_mm[i]);
        num("max_feedrate." + a, p.max_feedrate_mm_s[i]);
        num("microstep." + a, p.microstep_factor[i]);
    }
    num("build_volume.x", p.build_volume_mm[0]);
    num("build_volume.y", p.build_volume_mm[1]);
    num("build_volume.z", p.build_volume_mm[2]);
    os << "homing.order = ";
    for (size_t i = 0; i < p.homing_order.size(); ++i)
        os << (i ? "," : "") << axis_name(p.homing_order[i]);
    os << '\n';
    num("homing.feed_xy", p.homing_feed_xy_mm_s);
    num("homing.feed_z", p.homing_feed_z_mm_s);
    num("homing.backoff", p.homing_backoff_mm);
    num("endstop.overtravel", p.endstop_overtravel_mm);
    num("start_position.x", p.start_position_mm[0]);
    num("start_position.y", p.start_position_mm[1]);
    num("start_position.z", p.start_position_mm[2]);
    num("hotend.max_temp", p.hotend.max_temp_c);
    num("hotend.ambient", p.hotend.ambient_c);
    num("hotend.heat_rate", p.hotend.heat_rate_c_per_s);
    num("hotend.cool_time_constant", p.hotend.cool_time_constant_s);
    num("bed.max_temp", p.bed.max_temp_c);
    num("bed.ambient", p.bed.ambient_c);
    num("bed.heat_rate", p.bed.heat_rate_c_per_s);
    num("bed.cool_time_constant", p.bed.cool_time_constant_s);
    num("fan.max_duty", p.fan_max_duty);
    num("thermal.hysteresis", p.heater_hysteresis_c);
    num("thermal.runaway_watch_period", p.runaway_watch_period_s);
    num("thermal.runaway_min_rise", p.runaway_min_rise_c);
    num("jitter_percent", p.jitter_percent);
    os << "volume_policy = "
       << (p.volume_policy == VolumePolicy::Clamp ? "clamp" : "reject") << '\n';
    return os.str();
}

}  // namespace rampsim
