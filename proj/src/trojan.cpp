#include "rampsim/trojan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rampsim::trojan {

namespace {

constexpr Tick kInjectPeriod = 5000;   // 20 kHz, the fastest legal pulse train
constexpr Tick kInjectWidth = 100;     // 1 us
constexpr Tick kBurstGap = 500'000;    // edges closer than 5 ms form one burst
constexpr Tick kFanWindow = 1'000'000; // 10 ms re-modulation window

struct Pulse {
    Tick rise;
    Tick fall;
};

std::vector<Pulse> pulses_of(const std::vector<Event>& events, Line line) {
    std::vector<Pulse> out;
    int level = 0;
    Tick rise = 0;
    for (const Event& ev : events) {
        if (ev.line != line)
            continue;
        if (ev.level == 1 && level == 0)
            rise = ev.t;
        else if (ev.level == 0 && level == 1)
            out.push_back({rise, ev.t});
        level = ev.level;
    }
    if (level == 1)
        out.push_back({rise, std::numeric_limits<Tick>::max() / 4});
    return out;
}

std::vector<Tick> rising_edges_after(const std::vector<Event>& events, Line line,
                                     Tick after) {
    std::vector<Tick> out;
    int level = 0;
    for (const Event& ev : events) {
        if (ev.line != line)
            continue;
        if (ev.level == 1 && level == 0 && ev.t > after)
            out.push_back(ev.t);
        level = ev.level;
    }
    return out;
}

/// Groups edge times into activity bursts separated by at least kBurstGap.
std::vector<std::pair<Tick, Tick>> group_bursts(const std::vector<Tick>& edges) {
    std::vector<std::pair<Tick, Tick>> bursts;
    for (Tick t : edges) {
        if (!bursts.empty() && t - bursts.back().second < kBurstGap)
            bursts.back().second = t;
        else
            bursts.push_back({t, t});
    }
    return bursts;
}

/// Places up to `count` pulses in the low gaps of `line`, starting at `from`
/// and never past `until`. Existing pulses are respected with a guard band.
/// Returns the rise times actually placed.
std::vector<Tick> inject_into_gaps(SignalTimeline& timeline, Line line,
                                   std::int64_t count, Tick from,
                                   Tick until = std::numeric_limits<Tick>::max() / 4) {
    std::vector<Tick> placed;
    if (count <= 0)
        return placed;
    const Tick guard = kInjectWidth;
    const auto pulses = pulses_of(timeline.events, line);

    auto place_in = [&](Tick lo, Tick hi) {
        Tick cursor = std::max(lo, from) + guard;
        while (static_cast<std::int64_t>(placed.size()) < count &&
               cursor + kInjectWidth + guard <= hi && cursor + kInjectWidth <= until) {
            placed.push_back(cursor);
            cursor += kInjectPeriod;
        }
    };

    Tick gap_start = 0;
    for (const Pulse& p : pulses) {
        if (p.rise > gap_start)
            place_in(gap_start, p.rise);
        gap_start = p.fall;
        if (static_cast<std::int64_t>(placed.size()) >= count)
            break;
    }
    if (static_cast<std::int64_t>(placed.size()) < count)
        place_in(gap_start, std::numeric_limits<Tick>::max() / 4);

    for (Tick rise : placed) {
        timeline.events.push_back({rise, line, 1});
        timeline.events.push_back({rise + kInjectWidth, line, 0});
    }
    if (!placed.empty())
        sort_events(timeline.events);
    return placed;
}

/// Removes complete pulses whose rising edge is in `rises` (sorted).
void remove_pulses(SignalTimeline& timeline, Line line, const std::vector<Tick>& rises) {
    if (rises.empty())
        return;
    std::vector<Event> kept;
    kept.reserve(timeline.events.size());
    bool dropping = false;
    for (const Event& ev : timeline.events) {
        if (ev.line != line) {
            kept.push_back(ev);
            continue;
        }
        if (ev.level == 1 && std::binary_search(rises.begin(), rises.end(), ev.t)) {
            dropping = true;
            continue;
        }
        if (dropping && ev.level == 0) {
            dropping = false;
            continue;
        }
        kept.push_back(ev);
    }
    timeline.events = std::move(kept);
}

int level_at(const std::vector<Event>& events, Line line, Tick t) {
    int level = 0;
    for (const Event& ev : events) {
        if (ev.t > t)
            break;
        if (ev.line == line)
            level = ev.level;
    }
    return level;
}

/// Forces a line to `level` from `from` onward: later events disappear and a
/// single transition is emitted if needed.
void force_line(SignalTimeline& timeline, Line line, int level, Tick from) {
    int at = level_at(timeline.events, line, from);
    std::vector<Event> kept;
    kept.reserve(timeline.events.size());
    for (const Event& ev : timeline.events) {
        if (ev.line == line && ev.t > from)
            continue;
        kept.push_back(ev);
    }
    timeline.events = std::move(kept);
    if (at != level) {
        timeline.events.push_back({from + 1, line, static_cast<std::uint8_t>(level)});
        sort_events(timeline.events);
    }
}

Tick end_of(const SignalTimeline& timeline) {
    return timeline.events.empty() ? 0 : timeline.events.back().t;
}

std::uint64_t stream_seed(std::uint64_t seed, TrojanId id) {
    return seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(id) + 1));
}

Line heater_line(HeaterTarget target) {
    return target == HeaterTarget::D10_Hotend ? Line::HEAT_HOTEND : Line::HEAT_BED;
}

void apply_t1(SignalTimeline& tl, const TrojanConfig& cfg, Tick homed) {
    std::mt19937_64 rng(stream_seed(cfg.seed, TrojanId::T1));
    const Tick period = std::llround(cfg.t1.period_s * kTicksPerSecond);
    const Tick end = end_of(tl);
    for (Tick burst = homed + period; burst < end; burst += period) {
        std::int64_t count = 1 + static_cast<std::int64_t>(
                                      rng() % static_cast<std::uint64_t>(cfg.t1.max_shift_steps));
        Line line = (rng() & 1) ? step_line(Axis::X) : step_line(Axis::Y);
        inject_into_gaps(tl, line, count, burst);
    }
}

void apply_t3(SignalTimeline& tl, const TrojanConfig& cfg, Tick homed) {
    const auto y_edges = rising_edges_after(tl.events, step_line(Axis::Y), homed);
    const auto bursts = group_bursts(y_edges);
    const Line e_step = step_line(Axis::E);
    for (const auto& [start, stop] : bursts) {
        if (cfg.t3.mode == T3Mode::Over) {
            inject_into_gaps(tl, e_step, cfg.t3.extra_e_steps_per_y_burst, start,
                             stop + kBurstGap);
        } else {
            auto e_rises = rising_edges_after(tl.events, e_step, start - 1);
            std::vector<Tick> doomed;
            for (Tick t : e_rises) {
                if (t > stop)
                    break;
                doomed.push_back(t);
                if (static_cast<int>(doomed.size()) >= cfg.t3.extra_e_steps_per_y_burst)
                    break;
            }
            remove_pulses(tl, e_step, doomed);
        }
    }
}

void apply_t4(SignalTimeline& tl, const TrojanConfig& cfg, Tick homed) {
    std::mt19937_64 rng(stream_seed(cfg.seed, TrojanId::T4));
    const auto z_edges = rising_edges_after(tl.events, step_line(Axis::Z), homed);
    const auto bursts = group_bursts(z_edges);
    auto draw_increment = [&]() {
        std::uint64_t span = static_cast<std::uint64_t>(cfg.t4.layer_increment_max -
                                                        cfg.t4.layer_increment_min + 1);
        return cfg.t4.layer_increment_min + static_cast<int>(rng() % span);
    };
    size_t target = static_cast<size_t>(draw_increment());
    for (size_t layer = 1; layer <= bursts.size(); ++layer) {
        if (layer != target)
            continue;
        Line line = (rng() & 1) ? step_line(Axis::X) : step_line(Axis::Y);
        inject_into_gaps(tl, line, cfg.t4.shift_steps, bursts[layer - 1].second);
        target += static_cast<size_t>(draw_increment());
    }
}

void apply_t5(SignalTimeline& tl, const TrojanConfig& cfg, Tick homed) {
    Tick from;
    if (cfg.t5.at == T5Placement::Start) {
        from = homed + kTicksPerMillisecond;
    } else {
        const auto z_edges = rising_edges_after(tl.events, step_line(Axis::Z), homed);
        const auto bursts = group_bursts(z_edges);
        if (static_cast<size_t>(cfg.t5.layer) > bursts.size())
            return;
        from = bursts[cfg.t5.layer - 1].second + 1;
    }
    inject_into_gaps(tl, step_line(Axis::Z), cfg.t5.z_shift_steps, from);
}

void apply_t8(SignalTimeline& tl, const TrojanConfig& cfg, Tick homed) {
    const Line en = enable_line(cfg.t8.axis);
    for (const auto& [on_s, off_s] : cfg.t8.toggle_schedule) {
        const Tick w0 = homed + std::llround(on_s * kTicksPerSecond);
        const Tick w1 = homed + std::llround(off_s * kTicksPerSecond);
        const int before = level_at(tl.events, en, w0);
        const int after = level_at(tl.events, en, w1);
        std::vector<Event> kept;
        kept.reserve(tl.events.size());
        for (const Event& ev : tl.events) {
            if (ev.line == en && ev.t > w0 && ev.t <= w1)
                continue;
            kept.push_back(ev);
        }
        tl.events = std::move(kept);
        if (before != 0)
            tl.events.push_back({w0 + 1, en, 0});
        if (after != 0)
            tl.events.push_back({w1, en, 1});
        sort_events(tl.events);
    }
}

void apply_t9(SignalTimeline& tl, const TrojanConfig& cfg, Tick homed) {
    const auto spans = pulses_of(tl.events, Line::FAN);
    const Tick end = end_of(tl);
    auto high_overlap = [&spans](Tick lo, Tick hi) {
        Tick total = 0;
        for (const Pulse& p : spans) {
            Tick a = std::max(lo, p.rise);
            Tick b = std::min(hi, p.fall);
            if (b > a)
                total += b - a;
        }
        return total;
    };

    int level = level_at(tl.events, Line::FAN, homed);
    std::vector<Event> kept;
    for (const Event& ev : tl.events) {
        if (ev.line == Line::FAN && ev.t > homed)
            continue;
        kept.push_back(ev);
    }
    tl.events = std::move(kept);

    for (Tick w = homed; w < end; w += kFanWindow) {
        const Tick span_end = std::min(w + kFanWindow, end);
        const Tick high = high_overlap(w, span_end);
        const Tick scaled = std::llround(static_cast<double>(high) * cfg.t9.duty_scale);
        if (scaled <= 0) {
            if (level == 1) {
                tl.events.push_back({w + 1, Line::FAN, 0});
                level = 0;
            }
            continue;
        }
        if (level == 0) {
            tl.events.push_back({w + 1, Line::FAN, 1});
            level = 1;
        }
        if (w + 1 + scaled < span_end) {
            tl.events.push_back({w + 1 + scaled, Line::FAN, 0});
            level = 0;
        }
    }
    sort_events(tl.events);
}

}  // namespace

const char* trojan_name(TrojanId id) {
    static const char* names[] = {"t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9"};
    return names[static_cast<int>(id)];
}

bool parse_trojan_name(const std::string& name, TrojanId& out) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (int i = 0; i < 9; ++i) {
        if (lower == trojan_name(static_cast<TrojanId>(i))) {
            out = static_cast<TrojanId>(i);
            return true;
        }
    }
    return false;
}

void TrojanConfig::validate() const {
    if (is_enabled(TrojanId::T1)) {
        if (t1.period_s <= 0)
            throw std::invalid_argument("t1.period_s must be positive");
        if (t1.max_shift_steps < 1)
            throw std::invalid_argument("t1.max_shift_steps must be at least 1");
    }
    if (is_enabled(TrojanId::T2) && t2.mask_mode != "every_other")
        throw std::invalid_argument("t2.mask_mode must be every_other");
    if (is_enabled(TrojanId::T3) && t3.extra_e_steps_per_y_burst < 1)
        throw std::invalid_argument("t3.extra_e_steps_per_y_burst must be at least 1");
    if (is_enabled(TrojanId::T4)) {
        if (t4.layer_increment_min < 1 || t4.layer_increment_max < t4.layer_increment_min)
            throw std::invalid_argument("t4 layer increment range is invalid");
        if (t4.shift_steps < 1)
            throw std::invalid_argument("t4.shift_steps must be at least 1");
    }
    if (is_enabled(TrojanId::T5)) {
        if (t5.z_shift_steps < 1)
            throw std::invalid_argument("t5.z_shift_steps must be at least 1");
        if (t5.at == T5Placement::Layer && t5.layer < 1)
            throw std::invalid_argument("t5.layer must be at least 1");
    }
    if (is_enabled(TrojanId::T6) && t6.targets.empty())
        throw std::invalid_argument("t6 requires at least one heater target");
    if (is_enabled(TrojanId::T7) && t7.targets.empty())
        throw std::invalid_argument("t7 requires at least one heater target");
    if (is_enabled(TrojanId::T8)) {
        double prev_off = -1.0;
        for (const auto& [on, off] : t8.toggle_schedule) {
            if (on < 0 || off <= on || on < prev_off)
                throw std::invalid_argument("t8.schedule windows must be ordered and disjoint");
            prev_off = off;
        }
    }
    if (is_enabled(TrojanId::T9) && (t9.duty_scale < 0.0 || t9.duty_scale > 1.0))
        throw std::invalid_argument("t9.duty_scale must be in [0, 1]");
}

void TrojanConfig::validate_against(const PrinterProfile& profile) const {
    validate();
    if (is_enabled(TrojanId::T8)) {
        int a = static_cast<int>(t8.axis);
        if (a < 0 || a >= kAxisCount)
            throw std::invalid_argument("t8.axis does not exist on this printer");
    }
    bool needs_z = is_enabled(TrojanId::T4) ||
                   (is_enabled(TrojanId::T5) && t5.at == T5Placement::Layer);
    if (needs_z) {
        bool has_z = std::find(profile.homing_order.begin(), profile.homing_order.end(),
                               Axis::Z) != profile.homing_order.end();
        if (!has_z)
            throw std::invalid_argument("layer-triggered trojans need a homed Z axis");
    }
}

namespace {

std::set<HeaterTarget> parse_targets(const std::string& text) {
    std::set<HeaterTarget> out;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (token == "d10" || token == "hotend")
            out.insert(HeaterTarget::D10_Hotend);
        else if (token == "d8" || token == "bed")
            out.insert(HeaterTarget::D8_Bed);
        else if (!token.empty())
            throw std::invalid_argument("unknown heater target: " + token);
    }
    return out;
}

std::vector<std::pair<double, double>> parse_schedule(const std::string& text) {
    std::vector<std::pair<double, double>> out;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        size_t dash = token.find('-');
        if (dash == std::string::npos)
            throw std::invalid_argument("t8.schedule entries look like on-off: " + token);
        out.push_back({std::stod(token.substr(0, dash)), std::stod(token.substr(dash + 1))});
    }
    return out;
}

}  // namespace

TrojanConfig config_from_configfile(const ConfigFile& cfg) {
    TrojanConfig tc;
    for (int i = 0; i < 9; ++i) {
        TrojanId id = static_cast<TrojanId>(i);
        if (cfg.get_bool(std::string(trojan_name(id)) + ".enabled", false))
            tc.enabled.insert(id);
    }
    bool has_seed = cfg.has("seed");
    tc.seed = static_cast<std::uint64_t>(cfg.get_number("seed", 0));

    tc.t1.period_s = cfg.get_number("t1.period_s", tc.t1.period_s);
    tc.t1.max_shift_steps = static_cast<int>(cfg.get_number("t1.max_shift_steps",
                                                            tc.t1.max_shift_steps));
    tc.t2.mask_mode = cfg.get_string("t2.mask_mode", tc.t2.mask_mode);
    std::string mode = cfg.get_string("t3.mode", "over");
    if (mode == "over")
        tc.t3.mode = T3Mode::Over;
    else if (mode == "under")
        tc.t3.mode = T3Mode::Under;
    else
        throw std::invalid_argument("t3.mode must be over or under");
    tc.t3.extra_e_steps_per_y_burst = static_cast<int>(
        cfg.get_number("t3.extra_e_steps_per_y_burst", tc.t3.extra_e_steps_per_y_burst));
    tc.t4.layer_increment_min = static_cast<int>(
        cfg.get_number("t4.layer_increment_min", tc.t4.layer_increment_min));
    tc.t4.layer_increment_max = static_cast<int>(
        cfg.get_number("t4.layer_increment_max", tc.t4.layer_increment_max));
    tc.t4.shift_steps = static_cast<int>(cfg.get_number("t4.shift_steps", tc.t4.shift_steps));
    tc.t5.z_shift_steps = static_cast<int>(cfg.get_number("t5.z_shift_steps",
                                                          tc.t5.z_shift_steps));
    std::string at = cfg.get_string("t5.at", "start");
    if (at == "start")
        tc.t5.at = T5Placement::Start;
    else if (at == "layer")
        tc.t5.at = T5Placement::Layer;
    else
        throw std::invalid_argument("t5.at must be start or layer");
    tc.t5.layer = static_cast<int>(cfg.get_number("t5.layer", tc.t5.layer));
    if (cfg.has("t6.targets"))
        tc.t6.targets = parse_targets(cfg.get_string("t6.targets", ""));
    if (cfg.has("t7.targets"))
        tc.t7.targets = parse_targets(cfg.get_string("t7.targets", ""));
    std::string axis = cfg.get_string("t8.axis", "y");
    if (axis == "x" || axis == "X") tc.t8.axis = Axis::X;
    else if (axis == "y" || axis == "Y") tc.t8.axis = Axis::Y;
    else if (axis == "z" || axis == "Z") tc.t8.axis = Axis::Z;
    else if (axis == "e" || axis == "E") tc.t8.axis = Axis::E;
    else throw std::invalid_argument("t8.axis must be one of x, y, z, e");
    if (cfg.has("t8.schedule"))
        tc.t8.toggle_schedule = parse_schedule(cfg.get_string("t8.schedule", ""));
    tc.t9.duty_scale = cfg.get_number("t9.duty_scale", tc.t9.duty_scale);

    auto leftovers = cfg.unused_keys();
    if (!leftovers.empty())
        throw std::runtime_error("unknown trojan config key: " + leftovers.front());

    bool stochastic = tc.is_enabled(TrojanId::T1) || tc.is_enabled(TrojanId::T4);
    if (stochastic && !has_seed)
        throw std::invalid_argument("seed is required when t1 or t4 is enabled");

    tc.validate();
    return tc;
}

TrojanConfig load_trojan_config(const std::string& path) {
    return config_from_configfile(ConfigFile::load(path));
}

void HomingFsm::step(Axis axis, Tick t) {
    if (homed())
        return;
    if (order_[progress_] != axis)
        return;  // out-of-order actuation is ignored
    ++progress_;
    if (homed())
        homed_tick_ = t;
}

std::optional<Tick> find_homed_tick(const SignalTimeline& timeline,
                                    const std::vector<Axis>& homing_order) {
    HomingFsm fsm(homing_order);
    std::array<int, 3> level = {0, 0, 0};
    for (const Event& ev : timeline.events) {
        int idx;
        switch (ev.line) {
        case Line::ENDSTOP_X: idx = 0; break;
        case Line::ENDSTOP_Y: idx = 1; break;
        case Line::ENDSTOP_Z: idx = 2; break;
        default: continue;
        }
        if (ev.level == 1 && level[idx] == 0)
            fsm.step(static_cast<Axis>(idx), ev.t);
        level[idx] = ev.level;
        if (fsm.homed())
            return fsm.homed_tick();
    }
    return std::nullopt;
}

SignalTimeline apply(const SignalTimeline& timeline, const TrojanConfig& config,
                     const PrinterProfile& profile) {
    if (config.enabled.empty())
        return timeline;  // bypass: bit-identical pass-through
    config.validate_against(profile);

    auto homed = find_homed_tick(timeline, profile.homing_order);
    if (!homed)
        return timeline;  // trigger never armed
    const Tick h = *homed;

    SignalTimeline out = timeline;
    if (config.is_enabled(TrojanId::T1))
        apply_t1(out, config, h);
    if (config.is_enabled(TrojanId::T2))
        out = mask_every_other(out, step_line(Axis::E), h);
    if (config.is_enabled(TrojanId::T3))
        apply_t3(out, config, h);
    if (config.is_enabled(TrojanId::T4))
        apply_t4(out, config, h);
    if (config.is_enabled(TrojanId::T5))
        apply_t5(out, config, h);
    if (config.is_enabled(TrojanId::T6))
        for (HeaterTarget target : config.t6.targets)
            force_line(out, heater_line(target), 0, h);
    if (config.is_enabled(TrojanId::T7))
        for (HeaterTarget target : config.t7.targets)
            force_line(out, heater_line(target), 1, h);
    if (config.is_enabled(TrojanId::T8))
        apply_t8(out, config, h);
    if (config.is_enabled(TrojanId::T9))
        apply_t9(out, config, h);
    return out;
}

}  // namespace rampsim::trojan
