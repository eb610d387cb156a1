// Thin bindings: strings and plain Python containers in, the same out.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "masbus/artifacts.hpp"
#include "masbus/route_config.hpp"
#include "masbus/scenario.hpp"
#include "masbus/term.hpp"
#include "masbus/uri.hpp"

namespace py = pybind11;
using namespace masbus;

namespace {

py::object g_error_type;
py::object g_timeout_type;

[[noreturn]] void raise(const Error& e, py::object type, py::object report = py::none()) {
    py::object exc = type(e.what());
    exc.attr("code") = std::string(to_string(e.code()));
    exc.attr("detail") = e.detail();
    exc.attr("line") = e.location() ? py::cast(e.location()->line) : py::none();
    exc.attr("column") = e.location() ? py::cast(e.location()->column) : py::none();
    exc.attr("position") = e.position() ? py::cast(*e.position()) : py::none();
    exc.attr("report") = report;
    PyErr_SetObject(type.ptr(), exc.ptr());
    throw py::error_already_set();
}

py::dict uri_to_dict(const EndpointUri& u) {
    py::dict d;
    d["scheme"] = u.scheme;
    d["path"] = u.path;
    d["params"] = u.params;
    return d;
}

EndpointUri uri_from_dict(const py::dict& d) {
    EndpointUri u;
    u.scheme = d["scheme"].cast<std::string>();
    u.path = d.contains("path") ? d["path"].cast<std::string>() : "";
    if (d.contains("params")) u.params = d["params"].cast<std::vector<std::pair<std::string, std::string>>>();
    return u;
}

py::dict route_to_dict(const RouteDefinition& r) {
    py::dict d;
    d["id"] = r.route_id;
    d["from"] = format_uri(r.from);
    py::list procs;
    for (const auto& p : r.processors) {
        if (p.kind == ProcessorSpec::Kind::Transform)
            procs.append(py::make_tuple("transform", p.name));
        else
            procs.append(py::make_tuple("set_header", p.name, render_term(p.value)));
    }
    d["processors"] = procs;
    py::list to;
    for (const auto& t : r.to) to.append(format_uri(t));
    d["to"] = to;
    return d;
}

RouteDefinition route_from_dict(const py::dict& d) {
    RouteBuilder b(d.contains("id") ? d["id"].cast<std::string>() : "");
    b.from(d["from"].cast<std::string>());
    if (d.contains("processors"))
        for (auto item : d["processors"]) {
            auto t = item.cast<py::tuple>();
            auto kind = t[0].cast<std::string>();
            if (kind == "transform")
                b.transform(t[1].cast<std::string>());
            else if (kind == "set_header")
                b.set_header(t[1].cast<std::string>(), parse_term(t[2].cast<std::string>()));
            else
                throw py::value_error("unknown processor kind '" + kind + "'");
        }
    for (auto t : d["to"]) b.to(t.cast<std::string>());
    return b.build();
}

}  // namespace

PYBIND11_MODULE(_masbus, m) {
    m.doc() = "masbus core bindings";

    g_error_type = py::reinterpret_borrow<py::object>(
        PyErr_NewException("masbus._masbus.MasbusError", PyExc_RuntimeError, nullptr));
    g_timeout_type = py::reinterpret_borrow<py::object>(
        PyErr_NewException("masbus._masbus.ScenarioTimeout", g_error_type.ptr(), nullptr));
    m.attr("MasbusError") = g_error_type;
    m.attr("ScenarioTimeout") = g_timeout_type;

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ScenarioTimeout& t) {
            raise(t, g_timeout_type, py::str(report_to_json(t.report())));
        } catch (const Error& e) {
            raise(e, g_error_type);
        }
    });

    m.def("parse_uri", [](const std::string& text) { return uri_to_dict(parse_uri(text)); }, py::arg("text"));
    m.def("format_uri", [](const py::dict& d) { return format_uri(uri_from_dict(d)); }, py::arg("uri"));
    m.def("canonical_term", [](const std::string& text) { return render_term(parse_term(text)); }, py::arg("text"));
    m.def("haversine_km", &haversine_km, py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"));

    m.def(
        "parse_routes_xml",
        [](const std::string& text) {
            auto file = parse_routes_xml(text);
            py::list routes;
            for (const auto& r : file.routes) routes.append(route_to_dict(r));
            return routes;
        },
        py::arg("text"));
    m.def(
        "render_routes_xml",
        [](const py::list& routes) {
            std::vector<RouteDefinition> defs;
            for (auto r : routes) defs.push_back(route_from_dict(r.cast<py::dict>()));
            return render_routes_xml(defs);
        },
        py::arg("routes"));

    m.def("default_config_json", [] { return config_to_json(default_config()); });
    m.def(
        "run_scenario",
        [](const std::string& config_json, bool simulated) {
            auto cfg = config_from_json(config_json);
            ScenarioReport r;
            {
                py::gil_scoped_release release;
                r = run_scenario(cfg, ScenarioOptions{simulated});
            }
            return report_to_json(r);
        },
        py::arg("config_json"), py::arg("simulated_time") = true);
    m.def(
        "assert_report",
        [](const std::string& report_json, const std::string& config_json) {
            return assert_report(report_from_json(report_json), config_from_json(config_json));
        },
        py::arg("report_json"), py::arg("config_json"));
    m.def(
        "report_fingerprint", [](const std::string& report_json) { return report_fingerprint(report_from_json(report_json)); },
        py::arg("report_json"));
}
