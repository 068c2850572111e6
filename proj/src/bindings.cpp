#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rampsim/capture.hpp"
#include "rampsim/detector.hpp"
#include "rampsim/firmware.hpp"
#include "rampsim/gcode.hpp"
#include "rampsim/mutation.hpp"
#include "rampsim/pipeline.hpp"
#include "rampsim/plant.hpp"
#include "rampsim/profile.hpp"
#include "rampsim/trojan.hpp"

namespace py = pybind11;
using namespace rampsim;

namespace {

std::optional<trojan::TrojanConfig> config_from_entries(
    const std::map<std::string, std::string>& entries) {
    if (entries.empty())
        return std::nullopt;
    ConfigFile cfg;
    for (const auto& [k, v] : entries)
        cfg.set(k, v);
    return trojan::config_from_configfile(cfg);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "FFF printer control-signal simulation, tampering and detection";

    py::class_<gcode::Program>(m, "Program")
        .def_property_readonly("command_count",
                               [](const gcode::Program& p) { return p.commands.size(); });

    m.def("parse_program", &gcode::parse_program, py::arg("text"));
    m.def("load_program", &gcode::load_program, py::arg("path"));
    m.def("serialize", py::overload_cast<const gcode::Program&>(&gcode::serialize),
          py::arg("program"));

    py::class_<PrinterProfile>(m, "PrinterProfile")
        .def(py::init<>())
        .def_readwrite("jitter_percent", &PrinterProfile::jitter_percent)
        .def_property_readonly("steps_per_mm", [](const PrinterProfile& p) {
            return std::vector<double>(p.steps_per_mm.begin(), p.steps_per_mm.end());
        });
    m.def("load_profile", &load_profile, py::arg("path"));

    py::class_<capture::Transaction>(m, "Transaction")
        .def(py::init([](std::uint32_t index, std::int64_t x, std::int64_t y, std::int64_t z,
                         std::int64_t e) { return capture::make_transaction(index, x, y, z, e); }),
             py::arg("index"), py::arg("x"), py::arg("y"), py::arg("z"), py::arg("e"))
        .def_readonly("index", &capture::Transaction::index)
        .def_readonly("x", &capture::Transaction::x)
        .def_readonly("y", &capture::Transaction::y)
        .def_readonly("z", &capture::Transaction::z)
        .def_readonly("e", &capture::Transaction::e)
        .def("__repr__", [](const capture::Transaction& t) {
            return "Transaction(" + std::to_string(t.index) + ", " + std::to_string(t.x) +
                   ", " + std::to_string(t.y) + ", " + std::to_string(t.z) + ", " +
                   std::to_string(t.e) + ")";
        })
        .def("__eq__", [](const capture::Transaction& a, const capture::Transaction& b) {
            return a == b;
        });

    m.def("encode_transaction", [](const capture::Transaction& tx) {
        auto bytes = capture::encode(tx);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    });
    m.def("decode_transaction", [](const py::bytes& data, std::uint32_t index) {
        std::string raw = data;
        if (raw.size() != 16)
            throw std::invalid_argument("transaction records are exactly 16 bytes");
        std::array<std::uint8_t, 16> bytes;
        std::copy(raw.begin(), raw.end(), bytes.begin());
        return capture::decode(bytes, index);
    }, py::arg("data"), py::arg("index") = 0);

    m.def("write_capture_csv", &capture::write_csv);
    m.def("read_capture_csv", &capture::read_csv);

    py::class_<detector::Mismatch>(m, "Mismatch")
        .def_readonly("index", &detector::Mismatch::index)
        .def_property_readonly("column",
                               [](const detector::Mismatch& m_) {
                                   return std::string(1, m_.column);
                               })
        .def_readonly("golden_value", &detector::Mismatch::golden_value)
        .def_readonly("observed_value", &detector::Mismatch::observed_value)
        .def_readonly("percent_diff", &detector::Mismatch::percent_diff);

    py::class_<detector::DetectionReport>(m, "DetectionReport")
        .def_readonly("mismatches", &detector::DetectionReport::mismatches)
        .def_readonly("largest_percent_diff", &detector::DetectionReport::largest_percent_diff)
        .def_readonly("transactions_compared", &detector::DetectionReport::transactions_compared)
        .def_readonly("final_check_passed", &detector::DetectionReport::final_check_passed)
        .def_property_readonly("verdict", [](const detector::DetectionReport& r) {
            return r.verdict == detector::Verdict::TrojanLikely ? "trojan_likely" : "clean";
        })
        .def("render_text", [](const detector::DetectionReport& r) {
            return detector::render_text(r);
        });

    m.def("compare", &detector::compare, py::arg("golden"), py::arg("observed"),
          py::arg("margin_percent") = 5.0);

    m.def("reduce_extrusion", &mutation::reduce_extrusion, py::arg("program"),
          py::arg("factor"));
    m.def("relocate", [](const gcode::Program& p, int n, double dx, double dy) {
        return mutation::relocate(p, n, dx, dy);
    }, py::arg("program"), py::arg("n_moves"), py::arg("offset_x_mm") = 5.0,
          py::arg("offset_y_mm") = 5.0);
    m.def("total_extrusion_mm", &mutation::total_extrusion_mm);
    m.def("standard_suite", []() {
        std::vector<std::tuple<int, std::string, double>> rows;
        for (const auto& [id, spec] : mutation::standard_suite())
            rows.emplace_back(id,
                              spec.kind == mutation::MutationKind::Reduction ? "reduction"
                                                                             : "relocation",
                              spec.kind == mutation::MutationKind::Reduction
                                  ? spec.factor
                                  : static_cast<double>(spec.n_moves));
        return rows;
    });

    py::class_<sim::RunResult>(m, "RunResult")
        .def_readonly("transactions", &sim::RunResult::transactions)
        .def_property_readonly("event_log", [](const sim::RunResult& r) {
            std::vector<std::pair<std::string, std::int64_t>> rows;
            for (const auto& ev : r.events)
                rows.emplace_back(firmware::event_kind_name(ev.kind), ev.t);
            return rows;
        })
        .def_property_readonly("final_position_mm", [](const sim::RunResult& r) {
            return r.plant.final_state.position_mm;
        })
        .def_property_readonly("extruded_mm", [](const sim::RunResult& r) {
            return r.plant.final_state.extruded_mm;
        })
        .def_property_readonly("destroyed", [](const sim::RunResult& r) {
            return r.plant.final_state.destroyed;
        });

    m.def("run_print",
          [](const gcode::Program& program, const PrinterProfile& profile,
             const std::map<std::string, std::string>& trojan_entries, std::uint64_t seed) {
              return sim::run_print(program, profile, config_from_entries(trojan_entries),
                                    seed);
          },
          py::arg("program"), py::arg("profile") = PrinterProfile{},
          py::arg("trojan") = std::map<std::string, std::string>{}, py::arg("seed") = 1);

#ifdef RAMPSIM_VERSION
    m.attr("__version__") = RAMPSIM_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
