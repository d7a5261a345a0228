#include "nestlab/checks.hpp"
#include "nestlab/config.hpp"
#include "nestlab/error.hpp"
#include "nestlab/run.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace nestlab;

namespace {

py::dict report_dict(const CheckReport& r) {
  py::dict d;
  d["id"] = r.id;
  d["p"] = r.p;
  d["pass"] = r.pass;
  d["hard"] = r.hard;
  d["hard_ok"] = r.hard_ok;
  d["unsupported"] = r.unsupported;
  d["max_ratio"] = r.max_ratio;
  d["stability"] = r.stability;
  d["degenerate"] = r.degenerate;
  py::list fits;
  for (const auto& f : r.fits) {
    py::dict fd;
    fd["label"] = f.label;
    fd["slope"] = f.fit.slope;
    fd["target"] = f.fit.target;
    fd["pass"] = f.fit.pass;
    fits.append(fd);
  }
  d["fits"] = fits;
  py::dict metrics;
  for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
  d["metrics"] = metrics;
  d["notes"] = r.notes;
  d["records"] = r.records.size();
  return d;
}

CheckConfig make_config(const std::string& fractal, int level, double A, int random_count, std::uint64_t seed) {
  CheckConfig cfg;
  cfg.fractal = fractal;
  cfg.level = level;
  cfg.A = A;
  cfg.random_count = random_count;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_nestlab, m) {
  m.doc() = "Nested fractals: renormalized Dirichlet forms, heat kernels and variation inequality checks";

  // translators are tried newest first, so the base class goes first
  const auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<BudgetError>(m, "BudgetError", base);
  py::register_exception<UsageError>(m, "UsageError", base);
  py::register_exception<ParseError>(m, "ParseError", base);

  py::class_<FractalSpec, std::shared_ptr<FractalSpec>>(m, "FractalSpec")
      .def_readonly("name", &FractalSpec::name)
      .def_readonly("L", &FractalSpec::L)
      .def_readonly("M", &FractalSpec::M)
      .def_readonly("rho", &FractalSpec::rho)
      .def_readonly("d_h", &FractalSpec::d_h)
      .def_readonly("d_w", &FractalSpec::d_w)
      .def_readonly("beta", &FractalSpec::beta)
      .def_readonly("conductance", &FractalSpec::conductance)
      .def_property_readonly("boundary_size", &FractalSpec::boundary_size)
      .def("alpha", &FractalSpec::alpha, py::arg("p"))
      .def("__repr__", [](const FractalSpec& s) {
        std::ostringstream o;
        o << "<FractalSpec " << s.name << " L=" << s.L << " M=" << s.M << " rho=" << s.rho << ">";
        return o.str();
      });

  m.def(
      "build_spec",
      [](const std::string& name) { return std::const_pointer_cast<FractalSpec>(build_spec(name)); },
      py::arg("name"), "Registry lookup: 'sg', 'vicsek' or 'vicsek-N'.");

  m.def(
      "mesh",
      [](const std::string& name, int level, int truncation) {
        auto mesh = make_mesh(build_spec(name), level, truncation);
        const Mat pts = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            mesh->coords.data(), mesh->vertex_count(), mesh->dim);
        const Vec w = Eigen::Map<const Vec>(mesh->weights.data(), mesh->vertex_count());
        return py::make_tuple(pts, w);
      },
      py::arg("name"), py::arg("level"), py::arg("truncation") = 0, "Vertex coordinates and quadrature weights.");

  m.def(
      "harmonic_energy",
      [](const std::string& name, int level, const std::vector<double>& boundary) {
        EnergyForm form(make_mesh(build_spec(name), level));
        return form.energy(harmonic_extension(form, boundary));
      },
      py::arg("name"), py::arg("level"), py::arg("boundary"));

  m.def(
      "eigenvalues",
      [](const std::string& name, int level, int k) {
        EnergyForm form(make_mesh(build_spec(name), level));
        return Vec(spectral_decompose(form, k).eigenvalues);
      },
      py::arg("name"), py::arg("level"), py::arg("k") = -1);

  m.def(
      "heat_kernel",
      [](const std::string& name, int level, double t) {
        EnergyForm form(make_mesh(build_spec(name), level));
        return Mat(heat_kernel(spectral_decompose(form), t).values);
      },
      py::arg("name"), py::arg("level"), py::arg("t"));

  m.def(
      "run_check",
      [](const std::string& check, const std::string& fractal, int level, double p, double A, int random_count,
         std::uint64_t seed) {
        const Workspace ws(make_config(fractal, level, A, random_count, seed));
        py::list out;
        for (const auto& r : run_check(ws, check, p)) out.append(report_dict(r));
        return out;
      },
      py::arg("check"), py::arg("fractal") = "vicsek", py::arg("level") = 4, py::arg("p") = 2.0, py::arg("A") = 0.0,
      py::arg("random_count") = 4, py::arg("seed") = 42, "Run one named check and return its reports as dicts.");

  m.def("check_names", &check_names);

  m.def(
      "run_config",
      [](const std::string& text, const std::string& out_dir) {
        std::istringstream in(text);
        RunConfig cfg = parse_config(in);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        Pipeline pipe(cfg);
        const auto reports = pipe.check(cfg.checks);
        pipe.write_manifest();
        return py::make_tuple(exit_status(reports), summary_table(reports, cfg.checks));
      },
      py::arg("config_text"), py::arg("out_dir") = "",
      "Parse a config, run its checks into out_dir and return (exit status, summary table).");

  m.def(
      "config_hash",
      [](const std::string& text) {
        std::istringstream in(text);
        return hex64(config_hash(parse_config(in)));
      },
      py::arg("config_text"));
}
