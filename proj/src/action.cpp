#include "finslervol/action.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace finslervol {

std::string_view to_string(Weighting w) { return w == Weighting::DetG ? "detg" : "fallback"; }

Weighting parse_weighting(std::string_view s) {
  if (s == "detg") return Weighting::DetG;
  if (s == "fallback") return Weighting::DetGt0Fallback;
  throw Error(ErrorCode::InvalidArgument, "unknown weighting '" + std::string(s) + "'; expected detg or fallback");
}

namespace {

bool valid_field_name(const std::string& name) {
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace

Expr parse_density(const MetricSpec& metric, std::string_view source,
                   const std::vector<std::pair<std::string, std::string>>& fields) {
  ParseOptions opts;
  opts.dim = metric.dim;
  opts.symbols.emplace("L", metric.lagrangian);
  for (const auto& [name, expr] : fields) {
    if (!valid_field_name(name)) throw Error(ErrorCode::InvalidArgument, "invalid field name '" + name + "'");
    opts.symbols.insert_or_assign(name, parse(expr, opts));
  }
  return parse(source, opts);
}

ActionResult evaluate_action(const ActionSpec& a, int resolution, const SolverOptions& solver,
                             const VolumeOptions& opts) {
  const MetricSpec& spec = a.metric;
  const int n = spec.dim;
  if (a.domain.dim() != n) {
    throw Error(ErrorCode::InvalidArgument, "domain has " + std::to_string(a.domain.dim()) + " axes, metric has " +
                                                std::to_string(n));
  }
  const BoxGrid grid = box_grid(a.domain, resolution);
  const OrientationField field = orientation_field(spec, grid.nodes, solver);
  const QuadratureOrders orders = opts.resolved_orders(n);
  const QuadratureRule sphere = sphere_rule(n, orders.angular);
  const GaussRule1D radial = radial_rule(n, orders.radial);
  const double ball = unit_ball_volume(n);

  const int count = static_cast<int>(grid.nodes.size());
  ActionResult out;
  out.cell_values.assign(count, 0.0);
  out.smoothness = field.smoothness;
  std::vector<int> singular(count, 0);
  parallel_for(count, opts.threads, [&](int i) {
    try {
      const auto x = as_span(grid.nodes[i]);
      const TimeOrientation& t0 = field.points[i];
      EllipsoidMap map;
      Eigen::VectorXd weight;
      if (a.weighting == Weighting::DetG) {
        EllipsoidSamples s = sample_det_on_ellipsoid(spec, x, t0, sphere, opts);
        map = std::move(s.map);
        weight = std::move(s.det_abs);
        singular[i] = s.singular_nodes;
      } else {
        const OsculatingPair osc = osculating(spec, x, as_span(t0.t));
        map = ellipsoid_map(osc.g_t_plus);
        weight = Eigen::VectorXd::Constant(sphere.size(), std::abs(osc.g_t.det));
      }
      Eigen::VectorXd y(n);
      Eigen::VectorXd terms(sphere.size());
      for (int s = 0; s < sphere.size(); ++s) {
        if (!std::isfinite(weight[s])) {
          terms[s] = weight[s];
          continue;
        }
        const Eigen::VectorXd dir = map.factor * sphere.nodes.col(s);
        double radial_sum = 0.0;
        for (Eigen::Index r = 0; r < radial.nodes.size(); ++r) {
          y = radial.nodes[r] * dir;
          const double v = evaluate(a.density, x, as_span(y));
          if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteResult, "density is not finite on the ellipsoid");
          radial_sum += radial.weights[r] * v;
        }
        terms[s] = weight[s] * radial_sum;
      }
      out.cell_values[i] = map.jac * renormalized_sum(sphere.weights, terms) / ball;
    } catch (const Error& e) {
      throw Error(e.code(), "grid point " + std::to_string(i) + ": " + e.what());
    }
  });
  std::vector<double> weighted(count);
  for (int i = 0; i < count; ++i) {
    weighted[i] = grid.weights[i] * out.cell_values[i];
    out.singular_nodes += singular[i];
    out.max_residual = std::max(out.max_residual, field.points[i].residual);
  }
  out.value = pairwise_sum(weighted);
  return out;
}

}  // namespace finslervol
