#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "conjcalc/conjugate.hpp"
#include "conjcalc/convex_fn.hpp"
#include "conjcalc/document.hpp"
#include "conjcalc/errors.hpp"
#include "conjcalc/harness.hpp"
#include "conjcalc/operators.hpp"

namespace py = pybind11;
using namespace conjcalc;

namespace {

ConjPreference preference(const std::string& method) {
  if (method == "auto") return ConjPreference::automatic;
  if (method == "exact") return ConjPreference::exact;
  if (method == "naive") return ConjPreference::naive;
  if (method == "llt") return ConjPreference::llt;
  throw InvalidArgument("unknown method '" + method + "'");
}

ConvexFn to_fn(const py::object& obj) {
  if (py::isinstance<ConvexFn>(obj)) return obj.cast<ConvexFn>();
  if (py::isinstance<PolyhedralFn>(obj)) return obj.cast<PolyhedralFn>();
  if (py::isinstance<PointIndicatorFn>(obj)) return obj.cast<PointIndicatorFn>();
  if (py::isinstance<GridFn>(obj)) return obj.cast<GridFn>();
  throw py::type_error("expected a convex function");
}

py::object unwrap(const ConvexFn& f) {
  if (const auto* p = f.polyhedral()) return py::cast(*p);
  if (const auto* i = f.indicator()) return py::cast(*i);
  return py::cast(*f.grid());
}

using Kernel = void (*)(std::span<const double>, std::span<const double>, std::span<const double>,
                        std::span<double>);

py::array_t<double> run_kernel(Kernel kernel, py::array_t<double, py::array::c_style | py::array::forcecast> x,
                               py::array_t<double, py::array::c_style | py::array::forcecast> f,
                               py::array_t<double, py::array::c_style | py::array::forcecast> u) {
  if (x.ndim() != 1 || f.ndim() != 1 || u.ndim() != 1 || x.size() != f.size())
    throw InvalidArgument("expected 1-D arrays with len(x) == len(f)");
  py::array_t<double> out(u.size());
  {
    py::gil_scoped_release release;
    kernel({x.data(), static_cast<std::size_t>(x.size())},
           {f.data(), static_cast<std::size_t>(f.size())},
           {u.data(), static_cast<std::size_t>(u.size())},
           {out.mutable_data(), static_cast<std::size_t>(u.size())});
  }
  return out;
}

py::dict report_dict(const PropertyReport& r) {
  py::dict d;
  d["property"] = r.property;
  d["trials"] = r.trials;
  d["seed"] = r.seed;
  d["failures"] = r.failures.size();
  d["passed"] = r.meets_expectation();
  py::dict metrics;
  for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
  d["metrics"] = metrics;
  d["text"] = to_text(r);
  return d;
}

}  // namespace

PYBIND11_MODULE(_conjcalc, m) {
  m.doc() = "Conjugate calculus for convex functions on R^n, n <= 3";

  auto error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", error);
  py::register_exception<ImproperFunction>(m, "ImproperFunction", error);
  py::register_exception<NoMinorant>(m, "NoMinorant", error);
  py::register_exception<MixedRepresentation>(m, "MixedRepresentation", error);
  py::register_exception<InvalidOperator>(m, "InvalidOperator", error);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error);
  py::register_exception<SchemaError>(m, "SchemaError", error);

  py::class_<AffineFn>(m, "AffineFn")
      .def(py::init<DualVec, double>(), py::arg("slope"), py::arg("offset"))
      .def_readonly("slope", &AffineFn::slope)
      .def_readonly("offset", &AffineFn::offset)
      .def("__call__", &AffineFn::operator());

  py::class_<Halfspace>(m, "Halfspace")
      .def(py::init<DualVec, double>(), py::arg("normal"), py::arg("bound"))
      .def_readonly("normal", &Halfspace::normal)
      .def_readonly("bound", &Halfspace::bound);

  py::class_<PolyhedralFn>(m, "PolyhedralFn")
      .def(py::init<std::vector<AffineFn>, std::vector<Halfspace>>(), py::arg("pieces"),
           py::arg("domain") = std::vector<Halfspace>{})
      .def_property_readonly("dim", &PolyhedralFn::dim)
      .def_property_readonly("pieces", &PolyhedralFn::pieces)
      .def_property_readonly("domain", &PolyhedralFn::domain)
      .def("__call__", [](const PolyhedralFn& f, const Point& x) { return f(x).raw(); });

  py::class_<PointIndicatorFn>(m, "PointIndicatorFn")
      .def(py::init<Point, double>(), py::arg("anchor"), py::arg("level") = 0.0)
      .def_property_readonly("dim", &PointIndicatorFn::dim)
      .def_property_readonly("anchor", &PointIndicatorFn::anchor)
      .def_property_readonly("level", &PointIndicatorFn::level)
      .def("__call__", [](const PointIndicatorFn& f, const Point& x) { return f(x).raw(); });

  py::class_<GridAxis>(m, "GridAxis")
      .def(py::init<double, double, int>(), py::arg("lo"), py::arg("hi"), py::arg("count"))
      .def_readonly("lo", &GridAxis::lo)
      .def_readonly("hi", &GridAxis::hi)
      .def_readonly("count", &GridAxis::count)
      .def("node", &GridAxis::node);

  py::class_<GridFn>(m, "GridFn")
      .def(py::init<std::vector<GridAxis>, std::vector<double>>(), py::arg("axes"), py::arg("values"))
      .def_property_readonly("dim", &GridFn::dim)
      .def_property_readonly("axes", &GridFn::axes)
      .def_property_readonly("values", [](const GridFn& g) {
        return std::vector<double>(g.raw_values().begin(), g.raw_values().end());
      })
      .def("__call__", [](const GridFn& f, const Point& x) { return f(x).raw(); });

  py::class_<ConvexFn>(m, "ConvexFn");

  py::class_<PreservingOp>(m, "PreservingOp")
      .def(py::init<Mat, Point, DualVec, double, double>(), py::arg("E"), py::arg("c"), py::arg("w"),
           py::arg("tau"), py::arg("beta"))
      .def_static("identity", &PreservingOp::identity)
      .def_property_readonly("E", &PreservingOp::E)
      .def_property_readonly("c", &PreservingOp::c)
      .def_property_readonly("w", &PreservingOp::w)
      .def_property_readonly("tau", &PreservingOp::tau)
      .def_property_readonly("beta", &PreservingOp::beta)
      .def("__call__", [](const PreservingOp& T, const py::object& f) {
        return unwrap(apply_preserving(T, to_fn(f)));
      });

  py::class_<ReversingOp>(m, "ReversingOp")
      .def(py::init<Mat, DualVec, Point, double, double>(), py::arg("H"), py::arg("v"), py::arg("y"),
           py::arg("rho"), py::arg("tau"))
      .def_static("conjugation", &ReversingOp::conjugation)
      .def_property_readonly("H", &ReversingOp::H)
      .def_property_readonly("v", &ReversingOp::v)
      .def_property_readonly("y", &ReversingOp::y)
      .def_property_readonly("rho", &ReversingOp::rho)
      .def_property_readonly("tau", &ReversingOp::tau)
      .def("__call__", [](const ReversingOp& S, const py::object& f) {
        return unwrap(apply_reversing(S, to_fn(f)));
      });

  m.def("conjugate",
        [](const py::object& f, const std::string& method) {
          const auto res = conjugate(to_fn(f), preference(method));
          return py::make_tuple(unwrap(res.fn), std::string(to_string(res.method)));
        },
        py::arg("f"), py::arg("method") = "auto",
        "Returns (f*, method name).");
  m.def("biconjugate", [](const py::object& f) { return unwrap(biconjugate(to_fn(f))); });
  m.def("conjugate_value",
        [](const py::object& f, const DualVec& u) { return conjugate_value(to_fn(f), u).raw(); });
  m.def("legendre_naive", [](py::array_t<double, py::array::c_style | py::array::forcecast> x,
                             py::array_t<double, py::array::c_style | py::array::forcecast> f,
                             py::array_t<double, py::array::c_style | py::array::forcecast> u) {
    return run_kernel(&legendre_naive_1d, x, f, u);
  });
  m.def("legendre_llt", [](py::array_t<double, py::array::c_style | py::array::forcecast> x,
                           py::array_t<double, py::array::c_style | py::array::forcecast> f,
                           py::array_t<double, py::array::c_style | py::array::forcecast> u) {
    return run_kernel(&legendre_llt_1d, x, f, u);
  });

  m.def("apply_preserving",
        [](const PreservingOp& T, const py::object& f) { return unwrap(apply_preserving(T, to_fn(f))); });
  m.def("apply_reversing",
        [](const ReversingOp& S, const py::object& f, const std::string& method) {
          return unwrap(apply_reversing(S, to_fn(f), preference(method)));
        },
        py::arg("S"), py::arg("f"), py::arg("method") = "auto");
  m.def("compose", &compose, py::arg("T1"), py::arg("T2"), "compose(T1, T2)(f) = T1(T2(f))");
  m.def("invert", &invert);
  m.def("classify_involution", [](const PreservingOp& T, double tol) {
    const auto v = classify_involution(T, tol);
    return py::make_tuple(v.is_involution, v.failed_conditions);
  }, py::arg("T"), py::arg("tol") = 1e-9);
  m.def("to_reversing", &to_reversing);
  m.def("from_reversing", &from_reversing);
  m.def("dualize", &dualize);
  m.def("compose_reversing", &compose_reversing, py::arg("S2"), py::arg("S1"));
  m.def("parameter_distance",
        py::overload_cast<const PreservingOp&, const PreservingOp&>(&parameter_distance));

  m.def("leq", [](const py::object& f, const py::object& g) {
    const auto r = leq(to_fn(f), to_fn(g));
    py::object witness = py::none();
    if (r.witness) witness = py::make_tuple(r.witness->x, r.witness->lhs.raw(), r.witness->rhs.raw());
    return py::make_tuple(r.holds, witness);
  });

  m.def("lift_flip", [](const PolyhedralFn& f) { return lift(LiftedOp::flip(), f); },
        "Lift of psi(u) = u for |u| < 1, -u otherwise, with the identity offset map.");
  m.def("counterexample_flip", [] { return report_dict(counterexample_flip()); });
  m.def("run_suite", [](const std::string& name, int trials, std::uint64_t seed) {
    py::list out;
    for (const auto& r : run_suite(name, trials, seed)) out.append(report_dict(r));
    return out;
  }, py::arg("name"), py::arg("trials") = 50, py::arg("seed") = 1);

  m.def("document_functions", [](const std::string& text) {
    const Document doc = parse_document(text);
    py::dict out;
    for (const auto& [name, f] : doc.functions) out[py::str(name)] = unwrap(f);
    return out;
  }, "Parses a JSON document and returns its functions by name.");
}
