// Python bindings: grids, fields as numpy arrays, norms, smoothers, shear and the experiment runner.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prandtl/cli_runner.hpp"
#include "prandtl/errors.hpp"
#include "prandtl/grid_field.hpp"
#include "prandtl/nash_moser_driver.hpp"
#include "prandtl/shear_flow.hpp"
#include "prandtl/smoothing_ops.hpp"
#include "prandtl/weighted_norms.hpp"

namespace py = pybind11;
using namespace prandtl;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Field& f) {
    Array a({f.nt(), f.nx(), f.ny()});
    std::copy(f.values().begin(), f.values().end(), a.mutable_data());
    return a;
}

Field from_numpy(const GridSpec& g, const Array& a, FieldKind kind) {
    if (a.ndim() != 3) throw StructuralError("field arrays must be 3-d (t, x, y)");
    Field f(g, kind);
    if (static_cast<std::size_t>(a.shape(0)) != f.nt() || static_cast<std::size_t>(a.shape(1)) != f.nx() ||
        static_cast<std::size_t>(a.shape(2)) != f.ny())
        throw StructuralError("array shape does not match the grid");
    std::copy(a.data(), a.data() + a.size(), f.values().begin());
    return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Robin-wall Prandtl boundary-layer toolkit";

    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<MonotonicityError>(m, "MonotonicityError", numerical.ptr());

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](std::size_t nt, std::size_t nx, std::size_t ny, double t_max, double x_len, double y_max) {
                 GridSpec g{nt, nx, ny, t_max, x_len, y_max};
                 g.validate();
                 return g;
             }),
             py::arg("n_t"), py::arg("n_x"), py::arg("n_y"), py::arg("t_max"), py::arg("x_len"), py::arg("y_max"))
        .def_readonly("n_t", &GridSpec::n_t)
        .def_readonly("n_x", &GridSpec::n_x)
        .def_readonly("n_y", &GridSpec::n_y)
        .def_readonly("t_max", &GridSpec::t_max)
        .def_readonly("x_len", &GridSpec::x_len)
        .def_readonly("y_max", &GridSpec::y_max)
        .def_property_readonly("dt", &GridSpec::dt)
        .def_property_readonly("dx", &GridSpec::dx)
        .def_property_readonly("dy", &GridSpec::dy)
        .def("__repr__", [](const GridSpec& g) {
            return "GridSpec(" + std::to_string(g.n_t) + ", " + std::to_string(g.n_x) + ", " + std::to_string(g.n_y) +
                   ", " + std::to_string(g.t_max) + ", " + std::to_string(g.x_len) + ", " +
                   std::to_string(g.y_max) + ")";
        });

    py::enum_<FieldKind>(m, "FieldKind")
        .value("interior", FieldKind::interior)
        .value("boundary_trace", FieldKind::boundary_trace)
        .value("y_profile", FieldKind::y_profile);
    py::enum_<ShiftSign>(m, "ShiftSign").value("past", ShiftSign::past).value("future", ShiftSign::future);

    py::class_<Field>(m, "Field")
        .def(py::init(&from_numpy), py::arg("grid"), py::arg("values"), py::arg("kind") = FieldKind::interior)
        .def_property_readonly("grid", &Field::grid)
        .def_property_readonly("kind", &Field::kind)
        .def_property_readonly("shape", [](const Field& f) { return py::make_tuple(f.nt(), f.nx(), f.ny()); })
        .def("to_numpy", &to_numpy)
        .def("trace", &Field::trace, py::arg("iy") = 0)
        .def("max_abs", &Field::max_abs);

    m.def("d_x", &d_x, py::arg("f"));
    m.def("d_y", &d_y, py::arg("f"), py::arg("order") = 1);
    m.def("d_t", &d_t, py::arg("f"));

    m.def("norm_A", &norm_A, py::arg("f"), py::arg("k"), py::arg("ell"), py::arg("homogeneous") = false);
    m.def("norm_boundary_A", &norm_boundary_A, py::arg("trace"), py::arg("k"), py::arg("homogeneous") = false);
    m.def("index_set", &index_set, py::arg("k"));

    m.def("smooth_S", &smooth_S, py::arg("f"), py::arg("theta"), py::arg("sign") = ShiftSign::past);
    m.def("smooth_Su", &smooth_Su, py::arg("u"), py::arg("theta"), py::arg("sign") = ShiftSign::past);
    m.def("smooth_Sv", &smooth_Sv, py::arg("v"), py::arg("theta"), py::arg("sign") = ShiftSign::past);

    py::class_<MarginReport>(m, "MarginReport")
        .def_readonly("min_u", &MarginReport::min_u)
        .def_readonly("min_uy", &MarginReport::min_uy)
        .def_readonly("min_beta_minus_alpha", &MarginReport::min_beta_minus_alpha)
        .def_readonly("max_uyy", &MarginReport::max_uyy)
        .def_readonly("robin_residual", &MarginReport::robin_residual)
        .def("all_positive", &MarginReport::all_positive);

    py::class_<ShearProfile>(m, "ShearProfile")
        .def_readonly("grid", &ShearProfile::grid)
        .def_readonly("beta", &ShearProfile::beta)
        .def_readonly("delta_s", &ShearProfile::delta_s)
        .def_property_readonly("u_s", [](const ShearProfile& p) { return to_numpy(p.u_s); })
        .def_property_readonly("uy", [](const ShearProfile& p) { return to_numpy(p.uy); })
        .def_property_readonly("alpha", [](const ShearProfile& p) { return to_numpy(p.alpha); });

    m.def("canonical_shear", &canonical_shear, py::arg("grid"), py::arg("sigma"), py::arg("beta"));
    m.def("kernel_shear", &kernel_shear, py::arg("deficit"), py::arg("beta"), py::arg("grid"));
    m.def("check_monotonicity", &check_monotonicity, py::arg("shear"));

    m.def("experiment_tags", &experiment_tags);
    // Configs and manifests cross the boundary as JSON text; the package wrapper decodes them.
    m.def(
        "_run_experiment",
        [](const std::string& config_text, const std::string& experiment, const std::string& out_dir) {
            RunConfig cfg = parse_config(config_text);
            cfg.experiment = experiment;
            cfg.output_dir = out_dir;
            RunManifest man;
            {
                py::gil_scoped_release release;
                man = run_experiment(cfg);
            }
            return man.to_json().dump();
        },
        py::arg("config_text"), py::arg("experiment"), py::arg("out_dir"));
}
