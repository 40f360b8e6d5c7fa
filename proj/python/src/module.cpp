#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "follmer/calculus.hpp"
#include "follmer/error.hpp"
#include "follmer/partitions.hpp"
#include "follmer/quadvar.hpp"
#include "follmer/scenario.hpp"

namespace py = pybind11;
using namespace follmer;

namespace {

std::vector<double> coords(const Vector& v) { return {v.coords().begin(), v.coords().end()}; }

json parse(const std::string& text) { return json::parse(text); }

py::dict run(const std::string& command, const std::string& config, std::optional<int> n_max,
             std::optional<std::uint64_t> seed) {
    const auto out = run_scenario(parse_command(command), parse(config), RunOptions{n_max, seed});
    py::dict d;
    d["id"] = out.id;
    d["csv"] = out.csv;
    d["report"] = out.report.dump();
    d["pass"] = out.pass;
    return d;
}

py::dict scalar_qv_limit(const CadlagPath& x, const PartitionSequence& seq, std::vector<double> t_grid, int n_max) {
    const auto r = scalar_qv(x, seq, std::move(t_grid), n_max);
    py::list points;
    for (const auto& p : r.points) {
        py::dict d;
        d["t"] = p.t;
        d["limit"] = p.limit.value[0];
        d["established"] = p.limit.established;
        points.append(d);
    }
    py::dict d;
    d["points"] = points;
    d["established"] = r.established;
    d["jumps_ok"] = r.jumps_ok;
    return d;
}

py::dict taylor(const std::string& fixture, const std::vector<double>& a, const std::vector<double>& x,
                const std::vector<double>& u, int order) {
    const auto f = make_fixture(fixture, a.size(), x.size());
    const auto r = taylor_remainder(f, Vector(f.domain_a, a), Vector(f.domain_x, x), Vector(f.domain_x, u), order);
    py::dict d;
    d["remainder"] = coords(r.remainder);
    d["integral_form"] = coords(r.integral_form);
    d["agreement"] = r.agreement;
    d["agrees"] = r.agrees;
    return d;
}

py::tuple sandwich(const std::vector<std::vector<double>>& m) {
    require(!m.empty() && !m[0].empty(), "crossnorm_sandwich: empty matrix");
    const std::size_t rows = m.size(), cols = m[0].size();
    std::vector<double> flat;
    for (const auto& row : m) {
        require(row.size() == cols, "crossnorm_sandwich: ragged matrix");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    const auto t = crossnorm_sandwich(Vector(NormedSpace::frobenius(rows, cols), flat));
    return py::make_tuple(t.injective, t.frobenius, t.projective);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<FactorizationError>(m, "FactorizationError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<CadlagPath>(m, "CadlagPath")
        .def_property_readonly("horizon", &CadlagPath::horizon)
        .def_property_readonly("dim", &CadlagPath::dim)
        .def("value", [](const CadlagPath& x, double t) { return coords(x.value(t)); })
        .def("left_limit", [](const CadlagPath& x, double t) { return coords(x.left_limit(t)); })
        .def("jumps",
             [](const CadlagPath& x) {
                 std::vector<std::pair<double, std::vector<double>>> out;
                 for (const auto& j : x.jumps()) out.emplace_back(j.time, coords(j.delta));
                 return out;
             })
        .def("_to_json", [](const CadlagPath& x) { return path_to_json(x).dump(); });

    py::class_<PartitionSequence>(m, "PartitionSequence")
        .def_property_readonly("horizon", &PartitionSequence::horizon)
        .def("points", [](const PartitionSequence& s, int n) { return s.at(n).points(); })
        .def("mesh", [](const PartitionSequence& s, int n) { return s.at(n).mesh(); });

    m.def("build_path", [](const std::string& spec, std::uint64_t seed) { return build_path(parse(spec), seed); },
          py::arg("spec"), py::arg("seed") = 42);
    m.def(
        "scaled_walk",
        [](std::size_t steps, double horizon, std::uint64_t seed, const std::vector<std::pair<double, double>>& inject) {
            std::vector<Jump> js;
            for (auto [t, v] : inject) js.push_back(Jump{t, Vector(NormedSpace::l2(1), {v})});
            return scaled_walk(steps, horizon, seed, js);
        },
        py::arg("steps"), py::arg("horizon") = 1.0, py::arg("seed") = 42,
        py::arg("inject") = std::vector<std::pair<double, double>>{});
    m.def(
        "build_partition",
        [](const std::string& spec, double horizon, const CadlagPath* x) { return build_partition(parse(spec), horizon, x); },
        py::arg("spec"), py::arg("horizon"), py::arg("path") = nullptr);
    m.def(
        "discrete_scalar_qv",
        [](const CadlagPath& x, const PartitionSequence& seq, int n, double t) {
            return discrete_scalar_qv(x, seq.at(n), t);
        },
        py::arg("path"), py::arg("partitions"), py::arg("n"), py::arg("t"));
    m.def("scalar_qv", &scalar_qv_limit, py::arg("path"), py::arg("partitions"), py::arg("t_grid"),
          py::arg("n_max") = 12);
    m.def("taylor_remainder", &taylor, py::arg("fixture"), py::arg("a"), py::arg("x"), py::arg("u"),
          py::arg("order"));
    m.def("fixture_ids", &fixture_ids);
    m.def("crossnorm_sandwich", &sandwich, py::arg("matrix"));
    m.def("commands", &command_names);
    m.def("run", &run, py::arg("command"), py::arg("config"), py::arg("n_max") = std::nullopt,
          py::arg("seed") = std::nullopt);
}
