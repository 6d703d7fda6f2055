#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "btprox/channel.hpp"
#include "btprox/errors.hpp"
#include "btprox/figures.hpp"
#include "btprox/inquiry.hpp"
#include "btprox/link_manager.hpp"
#include "btprox/power.hpp"
#include "btprox/scenario.hpp"
#include "btprox/simulation.hpp"
#include "btprox/transport.hpp"

namespace py = pybind11;
using namespace btprox;

namespace {

std::optional<double> seconds(const std::optional<SimTime>& t) {
    if (!t) {
        return std::nullopt;
    }
    return to_seconds(*t);
}

struct PyResult {
    std::string name;
    std::string csv;
    std::string decisions_csv;
    std::optional<double> link_loss_s;
    std::optional<double> first_warning_s;
    double energy_j = 0.0;
    std::vector<std::size_t> rung_sequence;
    std::vector<double> probe_rtt_ms;
    std::size_t rows = 0;
};

PyResult run(const Scenario& s) {
    ScenarioResult r;
    {
        py::gil_scoped_release release;
        r = run_scenario(s);
    }
    PyResult out;
    out.name = s.name;
    out.csv = r.trace.to_csv();
    out.decisions_csv = decisions_to_csv(r.decisions);
    out.link_loss_s = seconds(r.link_loss_time);
    out.first_warning_s = seconds(r.first_warning_time);
    out.energy_j = r.energy_j;
    out.rung_sequence = r.rung_sequence;
    out.rows = r.trace.size();
    for (const auto& p : r.probes) {
        if (p.result.ok()) {
            out.probe_rtt_ms.push_back(std::chrono::duration<double, std::milli>(p.result.rtt).count());
        }
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bluetooth proximity and adaptive streaming simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<InvalidStateError>(m, "InvalidStateError", PyExc_RuntimeError);
    py::register_exception<InvalidBitrateError>(m, "InvalidBitrateError", PyExc_ValueError);

    m.def(
        "path_loss_db",
        [](double d_m, double ref_loss_db, double exponent) {
            ChannelConfig c;
            c.ref_loss_db = ref_loss_db;
            c.path_loss_exponent = exponent;
            return path_loss_db(d_m, c);
        },
        py::arg("distance_m"), py::arg("ref_loss_db") = 40.0, py::arg("exponent") = 2.7);
    m.def("ber_from_snr", &ber_from_snr, py::arg("snr_db"));
    m.def(
        "compute_rssi",
        [](double rx, double lower, double upper) {
            const Grpr g{lower, upper};
            g.validate();
            return static_cast<int>(compute_rssi(rx, g).value);
        },
        py::arg("rx_power_dbm"), py::arg("lower_dbm") = -60.0, py::arg("upper_dbm") = -40.0);
    m.def(
        "compute_lq", [](double ber) { return static_cast<int>(compute_lq(ber).value); }, py::arg("avg_ber"));
    m.def(
        "packet_success_probability",
        [](std::size_t bits, bool fec, double ber) { return packet_success_probability(bits, fec, ber); },
        py::arg("payload_bits"), py::arg("fec"), py::arg("ber"));
    m.def(
        "power_mw", [](double bps) { return power_mw(bps, PowerModel{}); }, py::arg("bitrate_bps"));
    m.def("inquiry_timeline", [] {
        const InquiryTimeline tl = build_timeline(InquiryConfig{});
        py::dict d;
        d["duration_s"] = to_seconds(tl.duration);
        d["hops"] = tl.hop_count();
        d["transmit"] = tl.transmit_count();
        d["listen"] = tl.listen_count();
        return d;
    });

    py::class_<PyResult>(m, "Result")
        .def_readonly("name", &PyResult::name)
        .def_readonly("csv", &PyResult::csv)
        .def_readonly("decisions_csv", &PyResult::decisions_csv)
        .def_readonly("link_loss_s", &PyResult::link_loss_s)
        .def_readonly("first_warning_s", &PyResult::first_warning_s)
        .def_readonly("energy_j", &PyResult::energy_j)
        .def_readonly("rung_sequence", &PyResult::rung_sequence)
        .def_readonly("probe_rtt_ms", &PyResult::probe_rtt_ms)
        .def_readonly("rows", &PyResult::rows)
        .def("__repr__", [](const PyResult& r) {
            return "<Result " + r.name + ": " + std::to_string(r.rows) + " rows>";
        });

    m.def("figure_names", &builtin_figure_names);
    m.def(
        "figure_yaml", [](const std::string& name) { return scenario_to_yaml(builtin_figure(name)); },
        py::arg("name"));
    m.def(
        "run_figure",
        [](const std::string& name, const std::vector<std::string>& overrides) {
            return run(with_overrides(builtin_figure(name), overrides));
        },
        py::arg("name"), py::arg("overrides") = std::vector<std::string>{});
    m.def(
        "run_yaml",
        [](const std::string& yaml, const std::vector<std::string>& overrides) {
            return run(parse_scenario(yaml, overrides));
        },
        py::arg("yaml"), py::arg("overrides") = std::vector<std::string>{});
}
