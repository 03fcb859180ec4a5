#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "conefield/cli.hpp"
#include "conefield/ebin.hpp"
#include "conefield/error.hpp"
#include "conefield/gauge.hpp"
#include "conefield/suites.hpp"

namespace py = pybind11;
using namespace conefield;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const Mat& m) {
  Rows r(static_cast<std::size_t>(m.dim()), std::vector<double>(static_cast<std::size_t>(m.dim())));
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return r;
}

Mat from_rows(const Rows& rows) {
  const int n = static_cast<int>(rows.size());
  if (n < 1 || n > kMaxDim) throw py::value_error("matrix must be 1x1 .. 4x4");
  Mat m(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n) throw py::value_error("matrix must be square");
    for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Point to_point(const std::vector<double>& x) {
  if (x.size() > static_cast<std::size_t>(kMaxDim)) throw py::value_error("point has more than 4 coordinates");
  Point p{};
  std::copy(x.begin(), x.end(), p.begin());
  return p;
}

py::dict verdict_dict(const LevelSeries& series, const Verdict& v) {
  py::dict d;
  d["levels"] = series.values;
  d["status"] = std::string(to_string(v.status));
  d["value"] = series.values.back();
  d["converged"] = v.converged();
  return d;
}

}  // namespace

PYBIND11_MODULE(_conefield, m) {
  m.doc() = "Cone-field calculus on truncated domains and the L2 metric on Riemannian metrics";

  static py::exception<Error> error(m, "ConefieldError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(errc_name(e.code())) + ": " + e.what();
      py::set_error(error, msg.c_str());
    }
  });

  py::class_<GridConfig>(m, "GridConfig")
      .def(py::init([](int dim, double base_radius, int levels, int points_per_unit) {
             GridConfig c;
             c.dim = dim;
             c.base_radius = base_radius;
             c.levels = levels;
             c.points_per_unit = points_per_unit;
             return c;
           }),
           py::arg("dim"), py::arg("base_radius") = 4.0, py::arg("levels") = 3, py::arg("points_per_unit") = 16)
      .def_readwrite("dim", &GridConfig::dim)
      .def_readwrite("base_radius", &GridConfig::base_radius)
      .def_readwrite("levels", &GridConfig::levels)
      .def_readwrite("points_per_unit", &GridConfig::points_per_unit);

  py::class_<Grid>(m, "Grid")
      .def(py::init(&Grid::build), py::arg("config"))
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("levels", &Grid::levels)
      .def_property_readonly("spacing", &Grid::spacing)
      .def("radius", &Grid::radius)
      .def("num_points", &Grid::num_points)
      .def("integrate", [](const Grid& g, const std::function<double(std::vector<double>)>& f, int level) {
        return integrate([&](const Point& x) { return f(std::vector<double>(x.begin(), x.begin() + g.dim())); }, g,
                         level);
      });

  m.def("evaluate", [](const std::string& text, const std::vector<double>& x) { return parse_expr(text)(to_point(x)); },
        py::arg("expr"), py::arg("x"));

  py::class_<SymTensorField>(m, "Field")
      .def_property_readonly("dim", &SymTensorField::dim)
      .def("__call__", [](const SymTensorField& f, const std::vector<double>& x) { return to_rows(f.checked(to_point(x))); })
      .def("__add__", [](const SymTensorField& a, const SymTensorField& b) { return a + b; })
      .def("__sub__", [](const SymTensorField& a, const SymTensorField& b) { return a - b; })
      .def("__rmul__", [](const SymTensorField& a, double s) { return s * a; })
      .def("__repr__", &SymTensorField::describe);

  m.def("builtin", [](const std::string& name, int dim, const std::vector<double>& params) {
        return builtin_field(name, dim, params);
      },
        py::arg("name"), py::arg("dim"), py::arg("params") = std::vector<double>{});
  m.def("expr_field", [](int dim, const std::vector<std::string>& entries) { return expr_field(dim, entries); },
        py::arg("dim"), py::arg("entries"));
  m.def("parse_field_spec", [](const std::string& text) { return build_field(parse_field_spec(text)); });
  m.def("pullback", [](const SymTensorField& s, const Rows& a, const std::vector<double>& b) {
    return pullback(s, AffineDiffeo::make(from_rows(a), b));
  });

  m.def("classify", [](const Rows& s, double tol) {
        const FiberClass c = classify(from_rows(s), tol);
        py::dict d;
        d["membership"] = std::string(to_string(c.membership));
        d["positive"] = c.inertia.positive;
        d["negative"] = c.inertia.negative;
        d["zero"] = c.inertia.zero;
        return d;
      },
        py::arg("matrix"), py::arg("tol") = 1e-10);
  m.def("pencil_radius", [](const Rows& s, const Rows& z) { return pencil_radius(from_rows(s), from_rows(z)); });

  m.def("norm", [](const SymTensorField& sigma, const SymTensorField& zeta, int k, const Grid& grid, double tol) {
        CalcOptions o;
        o.tol_rel = tol;
        const GaugeSection z = gauge_admissible(zeta, k, ConeSpec::orthant(), grid, o);
        const NormResult r = zeta_norm(sigma, z, k, grid, o);
        return verdict_dict(r.series, r.verdict);
      },
        py::arg("sigma"), py::arg("gauge"), py::arg("order"), py::arg("grid"), py::arg("tol") = 1e-6);

  m.def("volume", [](const SymTensorField& g, const Grid& grid, double tol) {
        const VolumeResult r = volume(make_metric(g, grid), grid, tol);
        return verdict_dict(r.series, r.verdict);
      },
        py::arg("g"), py::arg("grid"), py::arg("tol") = 1e-6);
  m.def("ebin", [](const SymTensorField& g, const SymTensorField& h, const SymTensorField& k, const Grid& grid,
                   double tol, bool frame) {
        const MetricField metric = make_metric(g, grid);
        const InnerResult r = frame ? ebin_inner_frame(metric, h, k, grid, tol) : ebin_inner(metric, h, k, grid, tol);
        return verdict_dict(r.series, r.verdict);
      },
        py::arg("g"), py::arg("h"), py::arg("k"), py::arg("grid"), py::arg("tol") = 1e-6, py::arg("frame") = false);
  m.def("bound", [](const SymTensorField& g, const SymTensorField& h, const SymTensorField& k, const Grid& grid) {
    const BoundCertificate c = bound_certificate(make_metric(g, grid), h, k, grid);
    py::dict d;
    d["value"] = c.value;
    d["bound"] = c.bound;
    d["slack"] = c.slack;
    d["pass"] = c.pass;
    return d;
  });

  m.def("suite_names", &suite_names);
  m.def("run_suite", [](const std::string& name, std::uint64_t seed, int trials) {
        const SuiteResult r = run_suite(name, seed, trials);
        py::dict d;
        d["name"] = r.name;
        d["trials"] = r.trials;
        d["failures"] = r.failures;
        d["worst_slack"] = r.worst_slack;
        return d;
      },
        py::arg("name"), py::arg("seed") = 0, py::arg("trials") = 0);

  // Runs the command line in-process; returns (exit code, stdout, stderr).
  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "conefield");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
