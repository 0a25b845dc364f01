#include "finslervol/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "finslervol/action.hpp"
#include "finslervol/autodiff.hpp"
#include "finslervol/catalog.hpp"
#include "finslervol/orientation.hpp"
#include "finslervol/validate.hpp"
#include "finslervol/volume.hpp"

#ifndef FINSLERVOL_VERSION
#define FINSLERVOL_VERSION "0.0.0"
#endif

namespace finslervol {

using json = nlohmann::ordered_json;

Eigen::VectorXd parse_vector(std::string_view s) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    std::string_view part = s.substr(pos, comma - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (!part.empty() && part.front() == '+') part.remove_prefix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || end != part.data() + part.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "cannot read '" + std::string(s) + "' as comma-separated numbers");
    }
    vals.push_back(v);
    pos = comma + 1;
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

namespace {

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

json to_json(const TimeOrientation& t) {
  return json{{"direction", to_json(t.t)},
              {"critical_value", t.critical_value},
              {"residual", t.residual},
              {"status", to_string(t.status)},
              {"converged_runs", t.converged_runs},
              {"cone_aborts", t.cone_aborts},
              {"min_hessian_eig", t.min_hessian_eig}};
}

bool is_usage_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownMetric:
    case ErrorCode::SpecFormat:
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::ArityError: return true;
    default: return false;
  }
}

struct CommonArgs {
  std::string metric;
  int seeds = 16;
  int max_iters = 500;
  double tol_residual = 0.0;
  std::uint64_t rng_seed = SolverOptions{}.rng_seed;
  int quad_radial = 0;
  int quad_angular = 0;
  int threads = 0;
  long samples = VolumeOptions{}.classical_samples;

  SolverOptions solver() const {
    SolverOptions s;
    s.seeds = seeds;
    s.max_iters = max_iters;
    s.tol_residual = tol_residual;
    s.rng_seed = rng_seed;
    return s;
  }
  VolumeOptions volume() const {
    VolumeOptions v;
    v.orders = {quad_radial, quad_angular};
    v.threads = threads;
    v.classical_samples = samples;
    v.classical_seed ^= rng_seed;
    return v;
  }
};

void add_metric(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--metric", c.metric, "catalog name or metric file")->required();
}

void add_solver(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--seeds", c.seeds, "random starts for the orientation search")->check(CLI::PositiveNumber);
  sub->add_option("--max-iters", c.max_iters, "iterations per start")->check(CLI::PositiveNumber);
  sub->add_option("--tol-residual", c.tol_residual, "Cartan residual tolerance (default 1e-8 n)");
  sub->add_option("--rng-seed", c.rng_seed, "seed for random starts and sampling");
}

void add_quadrature(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--quad-radial", c.quad_radial, "radial Gauss nodes")->check(CLI::NonNegativeNumber);
  sub->add_option("--quad-angular", c.quad_angular, "Gauss nodes per polar angle")->check(CLI::NonNegativeNumber);
  sub->add_option("--threads", c.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

Eigen::VectorXd parse_point(const std::string& s, int dim, const char* what) {
  Eigen::VectorXd v = parse_vector(s);
  if (v.size() != dim) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " has " + std::to_string(v.size()) +
                                                " components, metric has dimension " + std::to_string(dim));
  }
  return v;
}

json envelope(const std::string& command, json inputs, json result, json diagnostics) {
  return json{{"command", command},
              {"inputs", std::move(inputs)},
              {"result", std::move(result)},
              {"diagnostics", std::move(diagnostics)},
              {"version", FINSLERVOL_VERSION}};
}

json diagnostics(double residual, int singular, std::string_view status) {
  return json{{"residual", residual}, {"singular_nodes", singular}, {"status", status}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Volume forms of Finsler spacetimes", "finslervol"};
  app.set_version_flag("--version", FINSLERVOL_VERSION);
  app.require_subcommand(1);
  CommonArgs c;
  std::string point, direction, form = "bh", domain, density, weighting = "detg", csv;
  std::vector<std::string> fields;
  int res = 3;
  bool as_json = false;

  CLI::App* inspect = app.add_subcommand("inspect", "L, F, g, signature, causal class and Cartan form");
  add_metric(inspect, c);
  inspect->add_option("--point", point, "base point x")->required();
  inspect->add_option("--direction", direction, "direction y")->required();

  CLI::App* orient = app.add_subcommand("orient", "privileged time orientation at a point");
  add_metric(orient, c);
  add_solver(orient, c);
  orient->add_option("--point", point, "base point x")->required();

  CLI::App* volume = app.add_subcommand("volume", "volume density at a point");
  add_metric(volume, c);
  add_solver(volume, c);
  add_quadrature(volume, c);
  volume->add_option("--form", form, "bh, ht, classical-bh or classical-ht");
  volume->add_option("--point", point, "base point x")->required();
  volume->add_option("--direction", direction, "use this time orientation instead of searching");
  volume->add_option("--samples", c.samples, "samples for classical forms")->check(CLI::Range(2L, 1L << 30));

  CLI::App* integrate = app.add_subcommand("integrate", "integrate a volume density over a box");
  add_metric(integrate, c);
  add_solver(integrate, c);
  add_quadrature(integrate, c);
  integrate->add_option("--form", form, "bh, ht, classical-bh or classical-ht");
  integrate->add_option("--domain", domain, "box as a0,b0;a1,b1;...")->required();
  integrate->add_option("--res", res, "Gauss nodes per axis")->check(CLI::PositiveNumber);
  integrate->add_option("--samples", c.samples, "samples for classical forms")->check(CLI::Range(2L, 1L << 30));
  integrate->add_option("--csv", csv, "write per-cell values to this file");

  CLI::App* action = app.add_subcommand("action", "action integral of a Lagrangian density");
  add_metric(action, c);
  add_solver(action, c);
  add_quadrature(action, c);
  action->add_option("--density", density, "density in x, y, L and fields")->required();
  action->add_option("--field", fields, "closed-form field, name=expr (repeatable)");
  action->add_option("--domain", domain, "box as a0,b0;a1,b1;...")->required();
  action->add_option("--weighting", weighting, "detg or fallback");
  action->add_option("--res", res, "Gauss nodes per axis")->check(CLI::PositiveNumber);

  CLI::App* validate_cmd = app.add_subcommand("validate", "run the invariant suite on a metric");
  add_metric(validate_cmd, c);
  add_solver(validate_cmd, c);
  add_quadrature(validate_cmd, c);
  int samples = ValidationOptions{}.samples;
  validate_cmd->add_option("--points", samples, "sampled points per check")->check(CLI::PositiveNumber);
  validate_cmd->add_flag("--json", as_json, "print JSON instead of a table");

  app.add_subcommand("catalog", "list built-in metrics");

  std::string command;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << json{{"error", {{"code", "UsageError"}, {"message", e.what()}}}, {"version", FINSLERVOL_VERSION}}.dump()
        << "\n";
    return 2;
  }

  for (CLI::App* sub : app.get_subcommands()) command = sub->get_name();
  try {
    if (command == "catalog") {
      json list = json::array();
      for (const auto& name : builtin_names()) {
        const CatalogEntry e = builtin(name);
        list.push_back(json{{"name", name},
                            {"dim", e.spec.dim},
                            {"kind", e.lorentzian ? "lorentzian" : "positive-definite"},
                            {"description", e.description},
                            {"lagrangian", to_string(e.spec.lagrangian)}});
      }
      out << envelope(command, json::object(), list, diagnostics(0.0, 0, "ok")).dump(2) << "\n";
      return 0;
    }

    const MetricSpec spec = resolve_metric(c.metric);
    const int n = spec.dim;
    json inputs{{"metric", c.metric}};

    if (command == "inspect") {
      const Eigen::VectorXd x = parse_point(point, n, "--point");
      const Eigen::VectorXd y = parse_point(direction, n, "--direction");
      inputs["point"] = to_json(x);
      inputs["direction"] = to_json(y);
      const MetricMatrix g = metric_at(spec, as_span(x), as_span(y));
      json result{{"L", spec.lagrangian_at(as_span(x), as_span(y))},
                  {"F", norm_F(spec, as_span(x), as_span(y))},
                  {"g", to_json(g.entries)},
                  {"signature",
                   {{"positives", g.signature.positives},
                    {"negatives", g.signature.negatives},
                    {"zeros", g.signature.zeros}}},
                  {"det", g.det},
                  {"class", to_string(classify(spec, as_span(x), as_span(y)))}};
      double residual = 0.0;
      result["cartan"] = nullptr;
      if (!g.degenerate()) {
        const Eigen::VectorXd C = cartan_form(spec, as_span(x), as_span(y));
        result["cartan"] = to_json(C);
        residual = C.norm();
      }
      out << envelope(command, inputs, result, diagnostics(residual, 0, g.degenerate() ? "degenerate" : "ok")).dump(2)
          << "\n";
      return 0;
    }

    if (command == "orient") {
      const Eigen::VectorXd x = parse_point(point, n, "--point");
      inputs["point"] = to_json(x);
      inputs["rng_seed"] = c.rng_seed;
      const TimeOrientation t = find_privileged(spec, as_span(x), c.solver());
      out << envelope(command, inputs, to_json(t), diagnostics(t.residual, 0, to_string(t.status))).dump(2) << "\n";
      return 0;
    }

    if (command == "volume") {
      const Eigen::VectorXd x = parse_point(point, n, "--point");
      const VolumeForm f = parse_volume_form(form);
      inputs["point"] = to_json(x);
      inputs["form"] = to_string(f);
      VolumeDensity d;
      if (f == VolumeForm::ClassicalBH || f == VolumeForm::ClassicalHT) {
        d = classical_density(spec, as_span(x), f, c.volume());
      } else {
        TimeOrientation t0;
        if (!direction.empty()) {
          inputs["direction"] = direction;
          t0 = orientation_at(spec, as_span(x), parse_point(direction, n, "--direction"), c.solver());
        } else {
          t0 = find_privileged(spec, as_span(x), c.solver());
        }
        d = f == VolumeForm::MinimalRiemannian ? minimal_riemannian_density(spec, as_span(x), t0)
                                               : holmes_thompson_density(spec, as_span(x), t0, c.volume());
      }
      json result{{"x", to_json(d.x)}, {"sigma", d.sigma}, {"form", to_string(d.form)}};
      result["orientation"] = d.orientation_used ? to_json(*d.orientation_used) : json(nullptr);
      const double residual = d.orientation_used ? d.orientation_used->residual : 0.0;
      result["residual"] = residual;
      if (d.orientation_used) {
        result["ellipsoid_volume"] = d.ellipsoid_volume;
        if (d.form == VolumeForm::HolmesThompson) result["g_min"] = d.g_min;
      } else {
        result["std_error"] = d.std_error;
        result["samples"] = d.samples;
      }
      const std::string status = d.orientation_used ? std::string(to_string(d.orientation_used->status)) : "ok";
      out << envelope(command, inputs, result, diagnostics(residual, d.singular_nodes, status)).dump(2) << "\n";
      return 0;
    }

    if (command == "integrate") {
      const Box box = Box::parse(domain);
      const VolumeForm f = parse_volume_form(form);
      inputs["domain"] = domain;
      inputs["form"] = to_string(f);
      inputs["res"] = res;
      const VolumeIntegral v = integrate_volume(spec, box, f, res, c.solver(), c.volume());
      if (!csv.empty()) {
        std::ofstream file(csv);
        if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write '" + csv + "'");
        for (int i = 0; i < n; ++i) file << "x" << i << ",";
        file << "weight,sigma\n";
        file.precision(17);
        for (std::size_t k = 0; k < v.grid.nodes.size(); ++k) {
          for (int i = 0; i < n; ++i) file << v.grid.nodes[k][i] << ",";
          file << v.grid.weights[k] << "," << v.sigma[k] << "\n";
        }
      }
      json result{{"value", v.value},
                  {"cells", v.grid.nodes.size()},
                  {"smoothness", v.smoothness},
                  {"box_volume", box.volume()}};
      out << envelope(command, inputs, result, diagnostics(v.max_residual, v.singular_nodes, "ok")).dump(2) << "\n";
      return 0;
    }

    if (command == "action") {
      std::vector<std::pair<std::string, std::string>> parsed_fields;
      for (const auto& f : fields) {
        const std::size_t eq = f.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--field expects name=expr");
        parsed_fields.emplace_back(f.substr(0, eq), f.substr(eq + 1));
      }
      ActionSpec a;
      a.metric = spec;
      a.density = parse_density(spec, density, parsed_fields);
      a.domain = Box::parse(domain);
      a.weighting = parse_weighting(weighting);
      inputs["density"] = density;
      inputs["fields"] = fields;
      inputs["domain"] = domain;
      inputs["weighting"] = to_string(a.weighting);
      inputs["res"] = res;
      const ActionResult r = evaluate_action(a, res, c.solver(), c.volume());
      json result{{"value", r.value}, {"cells", r.cell_values.size()}, {"smoothness", r.smoothness}};
      out << envelope(command, inputs, result, diagnostics(r.max_residual, r.singular_nodes, "ok")).dump(2) << "\n";
      return 0;
    }

    if (command == "validate") {
      ValidationOptions vo;
      vo.samples = samples;
      vo.seed = c.rng_seed;
      vo.solver = c.solver();
      vo.volume = c.volume();
      std::optional<CatalogEntry> entry;
      try {
        entry = builtin(c.metric);
      } catch (const Error&) {
      }
      const ValidationReport report = validate(spec, vo, entry ? &*entry : nullptr);
      if (as_json) {
        json checks = json::array();
        for (const auto& ch : report.checks) {
          checks.push_back(json{{"name", ch.name},
                                {"passed", ch.passed},
                                {"measured", std::isfinite(ch.measured) ? json(ch.measured) : json(nullptr)},
                                {"tolerance", ch.tolerance},
                                {"detail", ch.detail}});
        }
        out << envelope(command, inputs, json{{"passed", report.all_passed()}, {"checks", checks}},
                        diagnostics(0.0, 0, report.all_passed() ? "ok" : "failed"))
                   .dump(2)
            << "\n";
      } else {
        out << "metric: " << report.metric << "\n" << report.table();
        out << (report.all_passed() ? "all checks passed\n" : "some checks FAILED\n");
      }
      return report.all_passed() ? 0 : 1;
    }
  } catch (const Error& e) {
    err << json{{"command", command},
                {"error", {{"code", to_string(e.code())}, {"message", e.what()}}},
                {"version", FINSLERVOL_VERSION}}
               .dump()
        << "\n";
    return is_usage_error(e.code()) ? 2 : 1;
  }
  return 2;
}

}  // namespace finslervol
