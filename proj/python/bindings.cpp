#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oukit/errors.hpp"
#include "oukit/io.hpp"
#include "oukit/special.hpp"
#include "oukit/suite.hpp"

namespace py = pybind11;
using namespace oukit;

namespace {

using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

// values has shape (nodes,) for N = 1 or (nodes, N).
GridFunction to_grid_function(const GridSpec& spec, const ComplexArray& values) {
    spec.validate();
    const auto nodes = static_cast<py::ssize_t>(spec.nodes());
    GridFunction v;
    v.spec = spec;
    if (values.ndim() == 1) v.N = 1;
    else if (values.ndim() == 2) v.N = static_cast<int>(values.shape(1));
    else raise(ErrorCode::InvalidInput, "values must have shape (nodes,) or (nodes, N)");
    if (values.shape(0) != nodes) raise(ErrorCode::InvalidInput, "values must have one row per grid node");
    v.values.assign(values.data(), values.data() + values.size());
    return v;
}

ComplexArray to_array(const GridFunction& v) {
    ComplexArray out({static_cast<py::ssize_t>(v.spec.nodes()), static_cast<py::ssize_t>(v.N)});
    std::copy(v.values.begin(), v.values.end(), out.mutable_data());
    return out;
}

py::dict record_dict(const VerificationRecord& r) {
    py::dict d;
    d["property"] = r.property;
    d["anchor"] = r.anchor;
    d["suite"] = r.suite;
    d["measured"] = r.measured;
    d["bound"] = r.bound;
    d["tolerance"] = r.tolerance;
    d["pass"] = r.pass;
    d["est_error"] = r.est_error;
    d["runtime_ms"] = r.runtime_ms;
    d["detail"] = r.detail;
    return d;
}

WeightFunction weight_from(const std::string& kind, double mu) {
    return kind == "unit" ? unit_weight() : make_weight(weight_kind_from_string(kind), mu);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Complex Ornstein-Uhlenbeck kernels, semigroups, resolvents and bound constants";

    // Messages start with the error code, e.g. "NonEllipticA: ...".
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    py::class_<OUSystem>(m, "System")
        .def_readonly("A", &OUSystem::A)
        .def_readonly("B", &OUSystem::B)
        .def_readonly("S", &OUSystem::S)
        .def_readonly("d", &OUSystem::d)
        .def_readonly("N", &OUSystem::N)
        .def_readonly("Y", &OUSystem::Y)
        .def_readonly("lambda_A", &OUSystem::lambdaA)
        .def_readonly("lambda_B", &OUSystem::lambdaB)
        .def("to_json", &system_to_json)
        .def("__repr__", [](const OUSystem& s) {
            return "<oukit.System N=" + std::to_string(s.N) + " d=" + std::to_string(s.d) + ">";
        });

    m.def("make_system", [](const MatrixXc& A, const MatrixXc& B, const MatrixXr& S) { return validate_system(A, B, S); },
          py::arg("A"), py::arg("B"), py::arg("S"), "Validated system from N x N matrices A, B and a real skew d x d matrix S.");
    m.def("scalar_system", &make_scalar_system, py::arg("alpha"), py::arg("delta"), py::arg("S"));
    m.def("heat_system", &default_heat_system, py::arg("d") = 2);
    m.def("system_from_json", [](const std::string& text) { return system_from_json(text); }, py::arg("text"));
    m.def("load_system", [](const std::string& path) { return load_system(path); }, py::arg("path"));

    py::class_<SpectralQuantities>(m, "SpectralQuantities")
        .def_readonly("a_min", &SpectralQuantities::a_min)
        .def_readonly("a_max", &SpectralQuantities::a_max)
        .def_readonly("a0", &SpectralQuantities::a0)
        .def_readonly("b0", &SpectralQuantities::b0)
        .def_readonly("kappa", &SpectralQuantities::kappa)
        .def_readonly("a1", &SpectralQuantities::a1)
        .def_readonly("nu", &SpectralQuantities::nu)
        .def_readonly("d", &SpectralQuantities::d)
        .def_readonly("eta", &SpectralQuantities::eta)
        .def_readonly("p", &SpectralQuantities::p);
    m.def("spectral_quantities", &spectral_quantities, py::arg("system"), py::arg("eta") = 0.0, py::arg("p") = 1.0);

    m.def("kummer_1f1", [](double a, double b, double z) { return kummer_1f1(a, b, z).value; }, py::arg("a"), py::arg("b"),
          py::arg("z"));
    m.def("gauss_2f1", [](double a1, double a2, double b1, double z) { return gauss_2f1(a1, a2, b1, z).value; },
          py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("z"));
    m.def("gamma", py::overload_cast<double>(&gamma_fn), py::arg("x"));

    m.def("heat_kernel", &heat_kernel, py::arg("system"), py::arg("x"), py::arg("xi"), py::arg("t"));
    m.def("kernel_K", &kernel_K, py::arg("system"), py::arg("psi"), py::arg("t"));
    m.def("kernel_Ki", &kernel_Ki, py::arg("system"), py::arg("psi"), py::arg("t"), py::arg("i"));
    m.def("kernel_Kji", &kernel_Kji, py::arg("system"), py::arg("psi"), py::arg("t"), py::arg("i"), py::arg("j"));
    m.def(
        "riccati_residual",
        [](const OUSystem& sys, double t) {
            const RiccatiResidual r = riccati_residual(sys, t);
            return py::make_tuple(r.res_N, r.res_phi);
        },
        py::arg("system"), py::arg("t"), "(residual of N, residual of phi) for a scalar system.");
    m.def(
        "chapman_kolmogorov_residual",
        [](const OUSystem& sys, const VectorXr& x, const VectorXr& xi, double t1, double t2) {
            return chapman_kolmogorov_residual(sys, x, xi, t1, t2).residual;
        },
        py::arg("system"), py::arg("x"), py::arg("xi"), py::arg("t1"), py::arg("t2"));
    m.def(
        "bound_C",
        [](int level, const SpectralQuantities& sq, double t, double p, double C_theta, bool delta_ij) {
            BoundExtras e;
            e.p = p;
            e.C_theta = C_theta;
            e.delta_ij = delta_ij;
            return bound_C(level, sq, t, e);
        },
        py::arg("level"), py::arg("sq"), py::arg("t"), py::arg("p") = 1.0, py::arg("C_theta") = 1.0,
        py::arg("delta_ij") = true, "Bound constant C1..C6 at time t.");
    m.def(
        "weighted_kernel_l1",
        [](const OUSystem& sys, int level, double eta_p, double t, int i, int j) {
            const ScalarQuadrature q = weighted_kernel_l1(sys, level, eta_p, t, i, j);
            return py::make_tuple(q.value, q.est_error);
        },
        py::arg("system"), py::arg("level"), py::arg("eta_p"), py::arg("t"), py::arg("i") = 0, py::arg("j") = 0,
        "(value, error estimate) of the weighted L1 norm of the kernel derivative of order level.");

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](std::vector<double> lo, std::vector<double> hi, std::vector<int> count) {
                 GridSpec g{std::move(lo), std::move(hi), std::move(count)};
                 g.validate();
                 return g;
             }),
             py::arg("min"), py::arg("max"), py::arg("count"))
        .def_readonly("min", &GridSpec::min)
        .def_readonly("max", &GridSpec::max)
        .def_readonly("count", &GridSpec::count)
        .def_property_readonly("dim", &GridSpec::dim)
        .def_property_readonly("nodes", &GridSpec::nodes)
        .def("coordinates",
             [](const GridSpec& g) {
                 py::array_t<double> out({static_cast<py::ssize_t>(g.nodes()), static_cast<py::ssize_t>(g.dim())});
                 auto a = out.mutable_unchecked<2>();
                 for (std::size_t k = 0; k < g.nodes(); ++k) {
                     const VectorXr x = g.node(k);
                     for (int i = 0; i < g.dim(); ++i) a(static_cast<py::ssize_t>(k), i) = x(i);
                 }
                 return out;
             },
             "Node coordinates, shape (nodes, d), axis 0 fastest.");
    m.def("cube_grid", &cube_grid, py::arg("d"), py::arg("lo"), py::arg("hi"), py::arg("n"));
    m.def("parse_grid", &parse_grid_spec, py::arg("text"));

    m.def(
        "apply_semigroup",
        [](const OUSystem& sys, const GridSpec& spec, const ComplexArray& values, double t) {
            const GridFunction v = to_grid_function(spec, values);
            GridFunction out;
            {
                py::gil_scoped_release release;
                out = apply_semigroup(sys, v, t);
            }
            return to_array(out);
        },
        py::arg("system"), py::arg("grid"), py::arg("values"), py::arg("t"), "T(t)v at the grid nodes; values (nodes, N).");
    m.def(
        "apply_resolvent",
        [](const OUSystem& sys, const GridSpec& spec, const ComplexArray& values, cplx lambda) {
            const GridFunction g = to_grid_function(spec, values);
            ResolventGrid r;
            {
                py::gil_scoped_release release;
                r = apply_resolvent(sys, lambda, g);
            }
            return to_array(r.value);
        },
        py::arg("system"), py::arg("grid"), py::arg("values"), py::arg("lam"),
        "int_0^inf e^{-lam t} T(t)g dt at the grid nodes.");
    m.def(
        "resolvent_of_constant",
        [](const OUSystem& sys, const VectorXc& c, cplx lambda, const VectorXr& x) {
            return resolvent_at(sys, lambda, constant_field(c, sys.d), {x})[0];
        },
        py::arg("system"), py::arg("c"), py::arg("lam"), py::arg("x"));
    m.def(
        "weighted_norm",
        [](const GridSpec& spec, const ComplexArray& values, double p, const std::string& weight, double mu) {
            NormSpec n;
            n.weight = weight_from(weight, mu);
            n.p = p;
            n.boundary_fraction = 0.0;
            return grid_norm(to_grid_function(spec, values), n);
        },
        py::arg("grid"), py::arg("values"), py::arg("p") = 2.0, py::arg("weight") = "unit", py::arg("mu") = 0.0,
        "Weighted L^p norm (p = inf for the weighted sup norm).");

    m.def("suite_names", &suite_names);
    m.def(
        "verify",
        [](const std::string& system, const std::vector<std::string>& suites, const std::string& config,
           std::uint64_t seed) {
            SuiteConfig cfg;
            cfg.system_path = system;
            cfg.suites = suites;
            cfg.seed = seed;
            if (!config.empty()) cfg = suite_config_from_json(read_text_file(config), cfg, config);
            std::vector<VerificationRecord> records;
            {
                py::gil_scoped_release release;
                records = run_verify(cfg);
            }
            py::list out;
            for (const VerificationRecord& r : records) out.append(record_dict(r));
            return out;
        },
        py::arg("system") = "", py::arg("suites") = std::vector<std::string>{}, py::arg("config") = "",
        py::arg("seed") = kDefaultSeed, "Run verification suites; returns a list of record dicts.");
    m.def("eval_bounds_csv", &eval_bounds_csv, py::arg("system"), py::arg("t_values"), py::arg("eta"), py::arg("p"),
          py::arg("C_theta") = 1.0);
}
