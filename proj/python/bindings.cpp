#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finslervol/action.hpp"
#include "finslervol/catalog.hpp"
#include "finslervol/cli.hpp"
#include "finslervol/orientation.hpp"
#include "finslervol/validate.hpp"
#include "finslervol/volume.hpp"

namespace py = pybind11;
using namespace finslervol;

namespace {

SolverOptions solver_options(int seeds, std::uint64_t rng_seed) {
  SolverOptions s;
  s.seeds = seeds;
  s.rng_seed = rng_seed;
  return s;
}

py::dict orientation_dict(const TimeOrientation& t) {
  py::dict d;
  d["direction"] = t.t;
  d["critical_value"] = t.critical_value;
  d["residual"] = t.residual;
  d["status"] = std::string(to_string(t.status));
  d["converged_runs"] = t.converged_runs;
  return d;
}

py::dict density_dict(const VolumeDensity& v) {
  py::dict d;
  d["sigma"] = v.sigma;
  d["form"] = std::string(to_string(v.form));
  d["orientation"] = v.orientation_used ? py::object(orientation_dict(*v.orientation_used)) : py::none();
  d["singular_nodes"] = v.singular_nodes;
  d["std_error"] = v.std_error;
  return d;
}

TimeOrientation resolve_orientation(const MetricSpec& spec, const Eigen::VectorXd& x,
                                    const std::optional<Eigen::VectorXd>& t, int seeds, std::uint64_t rng_seed) {
  const SolverOptions opts = solver_options(seeds, rng_seed);
  return t ? orientation_at(spec, as_span(x), *t, opts) : find_privileged(spec, as_span(x), opts);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Volume forms of Finsler spacetimes";

  static py::exception<Error> finsler_error(m, "FinslerError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(finsler_error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<MetricSpec>(m, "Metric")
      .def(py::init([](std::string name, int dim, std::string lagrangian, std::string admissible) {
             return MetricSpec::from_source(std::move(name), dim, lagrangian, admissible);
           }),
           py::arg("name"), py::arg("dim"), py::arg("lagrangian"), py::arg("admissible") = "1")
      .def_readonly("name", &MetricSpec::name)
      .def_readonly("dim", &MetricSpec::dim)
      .def_property_readonly("lagrangian", [](const MetricSpec& s) { return to_string(s.lagrangian); })
      .def_property_readonly("admissible", [](const MetricSpec& s) { return to_string(s.admissible); })
      .def("__repr__", [](const MetricSpec& s) { return "<Metric " + s.name + " dim=" + std::to_string(s.dim) + ">"; });

  m.def("builtin", [](const std::string& name) { return builtin(name).spec; }, py::arg("name"));
  m.def("catalog_names", &builtin_names);
  m.def("load_spec", [](const std::string& path) { return load_spec(path); }, py::arg("path"));

  m.def("lagrangian", [](const MetricSpec& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return s.lagrangian_at(as_span(x), as_span(y));
  });
  m.def("metric", [](const MetricSpec& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const MetricMatrix g = metric_at(s, as_span(x), as_span(y));
    py::dict d;
    d["g"] = g.entries;
    d["det"] = g.det;
    d["signature"] = py::make_tuple(g.signature.positives, g.signature.negatives, g.signature.zeros);
    return d;
  });
  m.def("norm", [](const MetricSpec& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return norm_F(s, as_span(x), as_span(y));
  });
  m.def("classify", [](const MetricSpec& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return std::string(to_string(classify(s, as_span(x), as_span(y))));
  });
  m.def("cartan_form", [](const MetricSpec& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return cartan_form(s, as_span(x), as_span(y));
  });

  m.def(
      "find_privileged",
      [](const MetricSpec& s, const Eigen::VectorXd& x, int seeds, std::uint64_t rng_seed) {
        return orientation_dict(find_privileged(s, as_span(x), solver_options(seeds, rng_seed)));
      },
      py::arg("metric"), py::arg("x"), py::arg("seeds") = 16, py::arg("rng_seed") = SolverOptions{}.rng_seed);

  m.def(
      "density",
      [](const MetricSpec& s, const Eigen::VectorXd& x, const std::string& form, std::optional<Eigen::VectorXd> t,
         int seeds, std::uint64_t rng_seed, long samples) {
        const VolumeForm f = parse_volume_form(form);
        VolumeOptions vo;
        vo.classical_samples = samples;
        if (f == VolumeForm::ClassicalBH || f == VolumeForm::ClassicalHT) {
          return density_dict(classical_density(s, as_span(x), f, vo));
        }
        const TimeOrientation t0 = resolve_orientation(s, x, t, seeds, rng_seed);
        return density_dict(f == VolumeForm::MinimalRiemannian ? minimal_riemannian_density(s, as_span(x), t0)
                                                               : holmes_thompson_density(s, as_span(x), t0, vo));
      },
      py::arg("metric"), py::arg("x"), py::arg("form") = "bh", py::arg("t") = py::none(), py::arg("seeds") = 16,
      py::arg("rng_seed") = SolverOptions{}.rng_seed, py::arg("samples") = VolumeOptions{}.classical_samples);

  m.def(
      "integrate_volume",
      [](const MetricSpec& s, const std::string& domain, const std::string& form, int res) {
        return integrate_volume(s, Box::parse(domain), parse_volume_form(form), res).value;
      },
      py::arg("metric"), py::arg("domain"), py::arg("form") = "bh", py::arg("res") = 3);

  m.def(
      "action",
      [](const MetricSpec& s, const std::string& density, const std::string& domain, const std::string& weighting,
         int res, const std::vector<std::pair<std::string, std::string>>& fields) {
        ActionSpec a;
        a.metric = s;
        a.density = parse_density(s, density, fields);
        a.domain = Box::parse(domain);
        a.weighting = parse_weighting(weighting);
        return evaluate_action(a, res).value;
      },
      py::arg("metric"), py::arg("density"), py::arg("domain"), py::arg("weighting") = "detg", py::arg("res") = 2,
      py::arg("fields") = std::vector<std::pair<std::string, std::string>>{});

  m.def(
      "validate",
      [](const std::string& name) {
        const CatalogEntry e = builtin(name);
        const ValidationReport r = validate(e.spec, {}, &e);
        return py::make_tuple(r.all_passed(), r.table());
      },
      py::arg("name"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

#ifdef FINSLERVOL_VERSION
  m.attr("__version__") = FINSLERVOL_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
