// Command line front end: simulate a print into capture telemetry, compare
// captures golden-vs-observed, mutate g-code, or run the eight-case mutation
// campaign end to end.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rampsim/detector.hpp"
#include "rampsim/gcode.hpp"
#include "rampsim/mutation.hpp"
#include "rampsim/pipeline.hpp"

namespace {

using namespace rampsim;

int cmd_simulate(const sim::RunManifest& manifest) {
    sim::RunResult result = sim::execute_manifest(manifest);
    std::cout << "simulated " << manifest.gcode_path << " -> " << manifest.out_dir << "\n"
              << "transactions: " << result.transactions.size() << "\n";
    for (const auto& ev : result.events)
        if (ev.kind == firmware::EventKind::ThermalRunawayHalt ||
            ev.kind == firmware::EventKind::HomingFault)
            std::cout << "event: " << firmware::event_kind_name(ev.kind) << " at tick "
                      << ev.t << " (" << ev.detail << ")\n";
    return 0;
}

int cmd_detect(const std::string& golden_path, const std::string& observed_path,
               double margin, const std::string& format, bool stream) {
    auto golden = capture::load_csv(golden_path);
    auto observed = capture::load_csv(observed_path);

    detector::DetectionReport report;
    if (stream) {
        detector::StreamComparer comparer(golden, margin);
        for (const auto& tx : observed) {
            for (const auto& m : comparer.feed(tx))
                std::fprintf(stderr, "mismatch at index %u column %c\n", m.index, m.column);
        }
        report = comparer.finish();
    } else {
        report = detector::compare(golden, observed, margin);
    }

    if (format == "json")
        std::cout << detector::render_json(report);
    else
        std::cout << detector::render_text(report);
    return report.verdict == detector::Verdict::TrojanLikely ? 2 : 0;
}

int cmd_mutate(const std::string& in_path, const std::string& out_path,
               std::optional<double> reduce, std::optional<int> relocate_n,
               double dx, double dy, const std::string& profile_path) {
    if (!reduce && !relocate_n)
        throw CLI::ValidationError("mutate", "no mutation selected (use --reduce or --relocate)");
    if (reduce && relocate_n)
        throw CLI::ValidationError("mutate", "pick one of --reduce / --relocate");

    PrinterProfile profile = profile_path.empty() ? PrinterProfile{} : load_profile(profile_path);
    gcode::Program program = gcode::load_program(in_path);
    gcode::Program mutated;
    if (reduce)
        mutated = mutation::reduce_extrusion(program, *reduce);
    else
        mutated = mutation::relocate(program, *relocate_n, dx, dy, profile);
    gcode::save_program(mutated, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_suite(const std::string& gcode_path, const std::string& profile_path,
              const std::string& out_dir, double margin, std::uint64_t seed) {
    gcode::Program program = gcode::load_program(gcode_path);
    PrinterProfile profile = profile_path.empty() ? PrinterProfile{} : load_profile(profile_path);

    std::vector<capture::Transaction> golden;
    sim::SuiteResult result = sim::run_standard_suite(program, profile, margin, seed, &golden);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        capture::save_csv(golden, out_dir + "/golden.csv");
        for (const auto& row : result.cases) {
            std::ofstream rep(out_dir + "/case" + std::to_string(row.case_id) + "_report.txt");
            rep << detector::render_text(row.report);
        }
    }

    std::printf("%-6s %-12s %-8s %-10s %s\n", "case", "type", "value", "mismatches",
                "detected");
    for (const auto& row : result.cases)
        std::printf("%-6d %-12s %-8g %-10zu %s\n", row.case_id, row.kind.c_str(), row.value,
                    row.report.mismatches.size(), row.detected ? "yes" : "NO");
    std::printf("%zu/%zu detected\n",
                static_cast<size_t>(std::count_if(result.cases.begin(), result.cases.end(),
                                                  [](const auto& c) { return c.detected; })),
                result.cases.size());
    return result.all_detected ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FFF printer control-signal simulation, tampering and detection testbed"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a print and write capture artifacts");
    sim::RunManifest manifest;
    simulate->add_option("--gcode", manifest.gcode_path, "input g-code")->required();
    simulate->add_option("--profile", manifest.profile_path, "printer profile config");
    simulate->add_option("--trojan", manifest.trojan_path, "trojan config");
    simulate->add_option("--set", manifest.trojan_overrides,
                         "trojan config override key=value (repeatable)");
    simulate->add_option("--seed", manifest.seed, "noise seed")->default_val(1);
    simulate->add_option("--out", manifest.out_dir, "output directory")->required();
    simulate->add_flag("--timeline-dump", manifest.timeline_dump,
                       "also write the raw event dump");

    // detect
    auto* detect = app.add_subcommand("detect", "compare a capture against a golden capture");
    std::string golden_path, observed_path, format = "text";
    double margin = 5.0;
    bool stream = false;
    detect->add_option("--golden", golden_path, "golden capture CSV")->required();
    detect->add_option("--observed", observed_path, "observed capture CSV")->required();
    detect->add_option("--margin", margin, "percent margin per window")->default_val(5.0);
    detect->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    detect->add_flag("--stream", stream, "replay observed rows through the live comparer");

    // mutate
    auto* mutate = app.add_subcommand("mutate", "rewrite g-code with a filament attack");
    std::string in_path, out_path, mutate_profile;
    std::optional<double> reduce;
    std::optional<int> relocate_n;
    std::pair<double, double> offset{5.0, 5.0};
    mutate->add_option("--in", in_path, "input g-code")->required();
    mutate->add_option("--out", out_path, "output g-code")->required();
    mutate->add_option("--reduce", reduce, "extrusion factor in (0,1]");
    mutate->add_option("--relocate", relocate_n, "relocate every n-th extruding move");
    mutate->add_option("--offset", offset, "relocation offset dx dy in mm");
    mutate->add_option("--profile", mutate_profile, "profile for build volume limits");

    // suite (the eight-case reduction/relocation campaign)
    auto* suite = app.add_subcommand("suite",
                                     "run all standard mutations and detect each one");
    suite->alias("table2");
    std::string suite_gcode, suite_profile, suite_out;
    double suite_margin = 5.0;
    std::uint64_t suite_seed = 1;
    suite->add_option("--gcode", suite_gcode, "input g-code")->required();
    suite->add_option("--profile", suite_profile, "printer profile config");
    suite->add_option("--out", suite_out, "directory for per-case reports");
    suite->add_option("--margin", suite_margin, "percent margin per window")->default_val(5.0);
    suite->add_option("--seed", suite_seed, "golden run seed")->default_val(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return cmd_simulate(manifest);
        if (detect->parsed())
            return cmd_detect(golden_path, observed_path, margin, format, stream);
        if (mutate->parsed())
            return cmd_mutate(in_path, out_path, reduce, relocate_n, offset.first,
                              offset.second, mutate_profile);
        if (suite->parsed())
            return cmd_suite(suite_gcode, suite_profile, suite_out, suite_margin, suite_seed);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
