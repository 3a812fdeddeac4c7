// Python bindings: a thin layer over the config-driven front end plus the
// p-adic scale and Newton polygon for quick use from notebooks.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tidyscale/cli.hpp"
#include "tidyscale/padic.hpp"

namespace py = pybind11;
using namespace tidyscale;

namespace {

cli::Options options(long depth, double cap, long word_len, std::optional<std::string> prime) {
  cli::Options o;
  o.depth = depth;
  o.cap = cap;
  o.word_len = word_len;
  o.prime = std::move(prime);
  return o;
}

RatMatrix parse_matrix(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) throw InputError("matrix: no rows");
  RatMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw InputError("matrix: ragged rows");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = exactmath::parse_rational(rows[i][j]);
  }
  return m;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tidyscale core bindings";

  static py::exception<ResourceError> resource(m, "ResourceCapError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ResourceError& e) {
      PyErr_SetObject(resource.ptr(), py::make_tuple(e.what(), e.cardinality).ptr());
    } catch (const InputError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("run_config",
        [](const std::string& command, const std::string& text, const std::string& origin, long depth, double cap,
           long word_len, std::optional<std::string> prime) {
          return cli::run_config_text(command, text, origin, options(depth, cap, word_len, std::move(prime))).machine();
        },
        py::arg("command"), py::arg("text"), py::arg("origin") = "<string>", py::arg("depth") = 8,
        py::arg("cap") = 1e6, py::arg("word_len") = 6, py::arg("prime") = py::none(),
        "Run a command on config text; returns the machine report as JSON text.");

  m.def("run_example",
        [](const std::string& name, long depth, double cap, long word_len, std::optional<std::string> prime) {
          return cli::run_example(name, options(depth, cap, word_len, std::move(prime)), cli::default_golden_dir())
              .machine();
        },
        py::arg("name"), py::arg("depth") = 8, py::arg("cap") = 1e6, py::arg("word_len") = 6,
        py::arg("prime") = py::none());

  m.def("examples", [] { return cli::kExamples; });

  m.def("padic_scale",
        [](const std::vector<std::vector<std::string>>& rows, long p) {
          padic::Automorphism a(parse_matrix(rows), p);
          return std::make_pair(exactmath::to_string(padic::scale(a)), exactmath::to_string(padic::scale(a.inverse())));
        },
        py::arg("matrix"), py::arg("p"), "(s(a), s(a^-1)) as decimal strings; entries are rationals like \"1/3\".");

  m.def("newton_polygon",
        [](const std::vector<std::string>& coeffs, long p) {
          std::vector<Rational> c;
          for (auto& s : coeffs) c.push_back(exactmath::parse_rational(s));
          std::vector<std::pair<std::string, long>> out;
          for (auto& seg : exactmath::newton_polygon(c, p).segments) out.push_back({exactmath::to_string(seg.slope), seg.length});
          return out;
        },
        py::arg("coeffs"), py::arg("p"), "Segments (slope, length); coeffs[i] multiplies x^i.");
}
