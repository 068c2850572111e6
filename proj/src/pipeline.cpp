#include "rampsim/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "rampsim/mutation.hpp"

namespace rampsim::sim {

namespace {

/// Reconstructs what the controller would command given the temperatures it
/// actually observes: the bang-bang law over the target schedule. This is
/// what makes starved heaters (T6) raise the watchdog even though the
/// recorded pristine duty went idle once its own closed loop was satisfied.
std::vector<firmware::DutySample> commanded_duty(
    const std::vector<std::pair<Tick, double>>& temps,
    const firmware::TargetSchedule& targets, bool hotend, double hysteresis) {
    std::vector<firmware::DutySample> out;
    out.reserve(temps.size());
    int level = 0;
    for (const auto& [t, temp] : temps) {
        double target = hotend ? targets.hotend_target_at(t) : targets.bed_target_at(t);
        level = firmware::bang_bang_duty(temp, target, hysteresis, level);
        out.push_back({t, static_cast<double>(level)});
    }
    return out;
}

std::vector<firmware::ThermalSample> to_samples(
    const std::vector<std::pair<Tick, double>>& temps) {
    std::vector<firmware::ThermalSample> out;
    out.reserve(temps.size());
    for (const auto& [t, temp] : temps)
        out.push_back({t, temp});
    return out;
}

SignalTimeline truncate_after(const SignalTimeline& timeline, Tick cutoff) {
    SignalTimeline out;
    out.tick_ns = timeline.tick_ns;
    out.events.reserve(timeline.events.size());
    for (const Event& ev : timeline.events)
        if (ev.t <= cutoff)
            out.events.push_back(ev);
    return out;
}

}  // namespace

RunResult run_print(const gcode::Program& program, const PrinterProfile& profile,
                    const std::optional<trojan::TrojanConfig>& config, std::uint64_t seed) {
    RunResult out;
    firmware::SimResult sim = firmware::simulate_print(program, profile, seed);
    out.pristine_timeline = sim.timeline;
    out.events = std::move(sim.events);
    out.targets = std::move(sim.targets);
    out.homed_tick = sim.homed_tick;
    out.plan = std::move(sim.plan);

    out.delivered_timeline =
        config ? trojan::apply(sim.timeline, *config, profile) : sim.timeline;

    out.plant = plant::apply_timeline(out.delivered_timeline, profile);

    // Watchdog over delivered reality: controller intent reconstructed from
    // the observed temperatures, fault on no-rise-under-power or over-max.
    auto hot_duty = commanded_duty(out.plant.hotend_temps, out.targets, true,
                                   profile.heater_hysteresis_c);
    auto bed_duty = commanded_duty(out.plant.bed_temps, out.targets, false,
                                   profile.heater_hysteresis_c);
    auto fault = firmware::thermal_runaway_check(
        to_samples(out.plant.hotend_temps), hot_duty, profile.runaway_watch_period_s,
        profile.runaway_min_rise_c, profile.hotend.max_temp_c);
    if (!fault) {
        fault = firmware::thermal_runaway_check(
            to_samples(out.plant.bed_temps), bed_duty, profile.runaway_watch_period_s,
            profile.runaway_min_rise_c, profile.bed.max_temp_c);
    }

    if (fault) {
        out.fault = fault;
        out.events.push_back({firmware::EventKind::ThermalRunawayHalt, fault->t,
                              fault->reason});
        // The firmware kills the job: no motion survives the halt. Heater
        // lines forced by the MITM stage carry no events to drop, so a
        // forced-high heater keeps heating past the halt.
        out.delivered_timeline = truncate_after(out.delivered_timeline, fault->t);
        out.plant = plant::apply_timeline(out.delivered_timeline, profile);
        std::stable_sort(out.events.begin(), out.events.end(),
                         [](const firmware::FirmwareEvent& a, const firmware::FirmwareEvent& b) {
                             return a.t < b.t;
                         });
        // A halt mid-print cancels completion; a watchdog trip after the
        // last move leaves the completed print on record.
        std::erase_if(out.events, [&](const firmware::FirmwareEvent& ev) {
            return ev.kind == firmware::EventKind::PrintComplete && ev.t > fault->t;
        });
    }

    out.transactions = capture::capture(out.delivered_timeline, profile);
    return out;
}

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["format"] = "rampsim-manifest-v1";
    j["gcode"] = m.gcode_path;
    j["profile"] = m.profile_path;
    j["trojan"] = m.trojan_path;
    j["trojan_overrides"] = m.trojan_overrides;
    j["seed"] = m.seed;
    j["out_dir"] = m.out_dir;
    j["timeline_dump"] = m.timeline_dump;
    nlohmann::ordered_json artifacts;
    artifacts["capture_csv"] = m.capture_csv_path();
    artifacts["capture_bin"] = m.capture_bin_path();
    artifacts["deposition_csv"] = m.deposition_csv_path();
    artifacts["events"] = m.events_path();
    if (m.timeline_dump)
        artifacts["timeline"] = m.timeline_path();
    j["artifacts"] = artifacts;
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "rampsim-manifest-v1")
        throw std::runtime_error("unrecognized manifest format");
    RunManifest m;
    m.gcode_path = j.at("gcode").get<std::string>();
    m.profile_path = j.value("profile", "");
    m.trojan_path = j.value("trojan", "");
    if (j.contains("trojan_overrides"))
        m.trojan_overrides = j["trojan_overrides"].get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.out_dir = j.at("out_dir").get<std::string>();
    m.timeline_dump = j.value("timeline_dump", false);
    return m;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace

void write_artifacts(const RunResult& result, const RunManifest& manifest) {
    std::filesystem::create_directories(manifest.out_dir);
    capture::save_csv(result.transactions, manifest.capture_csv_path());
    capture::save_binary(result.transactions, manifest.capture_bin_path());
    write_file(manifest.deposition_csv_path(), plant::deposition_to_csv(result.plant.deposition));

    std::ostringstream events;
    for (const firmware::FirmwareEvent& ev : result.events) {
        events << ev.t << ' ' << firmware::event_kind_name(ev.kind);
        if (!ev.detail.empty())
            events << ' ' << ev.detail;
        events << '\n';
    }
    write_file(manifest.events_path(), events.str());

    if (manifest.timeline_dump)
        write_file(manifest.timeline_path(), dump_timeline(result.delivered_timeline));
    write_file(manifest.manifest_path(), manifest_to_json(manifest));
}

RunResult execute_manifest(const RunManifest& manifest) {
    gcode::Program program = gcode::load_program(manifest.gcode_path);
    PrinterProfile profile = manifest.profile_path.empty()
                                 ? PrinterProfile{}
                                 : load_profile(manifest.profile_path);
    std::optional<trojan::TrojanConfig> config;
    if (!manifest.trojan_path.empty() || !manifest.trojan_overrides.empty()) {
        ConfigFile cfg = manifest.trojan_path.empty()
                             ? ConfigFile{}
                             : ConfigFile::load(manifest.trojan_path);
        for (const std::string& entry : manifest.trojan_overrides) {
            size_t eq = entry.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("trojan override needs key=value: " + entry);
            cfg.set(entry.substr(0, eq), entry.substr(eq + 1));
        }
        config = trojan::config_from_configfile(cfg);
    }
    RunResult result = run_print(program, profile, config, manifest.seed);
    write_artifacts(result, manifest);
    return result;
}

SuiteResult run_standard_suite(const gcode::Program& program, const PrinterProfile& profile,
                               double margin_percent, std::uint64_t golden_seed,
                               std::vector<capture::Transaction>* golden_out) {
    if (mutation::total_extrusion_mm(program) <= 0.0)
        throw std::invalid_argument("program contains no extruding moves");

    RunResult golden = run_print(program, profile, std::nullopt, golden_seed);
    if (golden_out)
        *golden_out = golden.transactions;

    SuiteResult out;
    out.all_detected = true;
    for (const auto& [case_id, spec] : mutation::standard_suite()) {
        gcode::Program mutated = mutation::apply(program, spec, profile);
        RunResult run = run_print(mutated, profile, std::nullopt,
                                  golden_seed + static_cast<std::uint64_t>(case_id) * 101);
        SuiteCaseResult row;
        row.case_id = case_id;
        row.kind = spec.kind == mutation::MutationKind::Reduction ? "reduction" : "relocation";
        row.value = spec.kind == mutation::MutationKind::Reduction
                        ? spec.factor
                        : static_cast<double>(spec.n_moves);
        row.report = detector::compare(golden.transactions, run.transactions, margin_percent);
        row.detected = row.report.verdict == detector::Verdict::TrojanLikely;
        out.all_detected = out.all_detected && row.detected;
        out.cases.push_back(std::move(row));
    }
    return out;
}

}  // namespace rampsim::sim
