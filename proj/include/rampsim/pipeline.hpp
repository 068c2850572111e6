#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rampsim/capture.hpp"
#include "rampsim/detector.hpp"
#include "rampsim/firmware.hpp"
#include "rampsim/gcode.hpp"
#include "rampsim/plant.hpp"
#include "rampsim/profile.hpp"
#include "rampsim/trojan.hpp"

namespace rampsim::sim {

/// Everything a single end-to-end run produces: the delivered (possibly
/// tampered, possibly halt-truncated) timeline, the physical outcome, the
/// telemetry stream and the firmware event log.
struct RunResult {
    SignalTimeline pristine_timeline;   // as the controller emitted it
    SignalTimeline delivered_timeline;  // after the MITM stage and any halt
    std::vector<firmware::FirmwareEvent> events;
    firmware::TargetSchedule targets;
    Tick homed_tick = 0;
    plant::ReplayResult plant;
    std::vector<capture::Transaction> transactions;
    std::optional<firmware::ThermalFault> fault;
    firmware::PlanResult plan;
};

/// Runs firmware simulation, the optional trojan stage, the physical replay
/// and telemetry capture. When the delivered heater signals starve or
/// overdrive the plant, the runaway watchdog halts the print: motion stops
/// at the fault tick (forced heater lines stay forced).
RunResult run_print(const gcode::Program& program, const PrinterProfile& profile,
                    const std::optional<trojan::TrojanConfig>& config, std::uint64_t seed);

/// Inputs that fully determine a run; reruns from equal manifests produce
/// byte-identical artifacts.
struct RunManifest {
    std::string gcode_path;
    std::string profile_path;   // empty: built-in defaults
    std::string trojan_path;    // empty: bypass unless overrides say otherwise
    /// "key=value" entries layered over the trojan config file.
    std::vector<std::string> trojan_overrides;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool timeline_dump = false;

    std::string capture_csv_path() const { return out_dir + "/capture.csv"; }
    std::string capture_bin_path() const { return out_dir + "/capture.bin"; }
    std::string deposition_csv_path() const { return out_dir + "/deposition.csv"; }
    std::string events_path() const { return out_dir + "/events.txt"; }
    std::string manifest_path() const { return out_dir + "/manifest.json"; }
    std::string timeline_path() const { return out_dir + "/timeline.txt"; }
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

/// Executes the manifest: loads inputs, runs the pipeline and writes every
/// artifact under out_dir. Returns the run for further inspection.
RunResult execute_manifest(const RunManifest& manifest);

void write_artifacts(const RunResult& result, const RunManifest& manifest);

/// One row of the standard mutation-detection campaign.
struct SuiteCaseResult {
    int case_id = 0;
    std::string kind;     // "reduction" or "relocation"
    double value = 0.0;   // factor or cadence
    bool detected = false;
    detector::DetectionReport report;
};

struct SuiteResult {
    std::vector<SuiteCaseResult> cases;
    bool all_detected = false;
};

/// Runs the golden print plus all eight standard mutations and compares each
/// capture against the golden one. Throws std::invalid_argument when the
/// program contains no extruding moves.
SuiteResult run_standard_suite(const gcode::Program& program, const PrinterProfile& profile,
                               double margin_percent, std::uint64_t golden_seed,
                               std::vector<capture::Transaction>* golden_out = nullptr);

}  // namespace rampsim::sim
