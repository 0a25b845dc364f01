#pragma once

#include <map>
#include <string>
#include <string_view>

#include "finslervol/volume.hpp"

namespace finslervol {

enum class Weighting { DetG, DetGt0Fallback };

std::string_view to_string(Weighting w);

/// Accepts detg and fallback.
Weighting parse_weighting(std::string_view s);

struct ActionSpec {
  MetricSpec metric;
  Expr density;  // in x and y
  Box domain;
  Weighting weighting = Weighting::DetG;
};

/// Parses a Lagrangian density in x and y. `L` stands for the metric's
/// Lagrangian, and each field name expands to its closed-form expression,
/// which may itself use `L` and earlier fields.
Expr parse_density(const MetricSpec& metric, std::string_view source,
                   const std::vector<std::pair<std::string, std::string>>& fields = {});

struct ActionResult {
  double value = 0.0;
  std::vector<double> cell_values;  // inner ellipsoid integral per grid node
  double max_residual = 0.0;
  double smoothness = 0.0;
  int singular_nodes = 0;
};

/// Outer Gauss-Legendre grid over the domain, inner radial-spherical rule on
/// the ellipsoid of the privileged orientation at each node.
ActionResult evaluate_action(const ActionSpec& a, int resolution, const SolverOptions& solver = {},
                             const VolumeOptions& opts = {});

}  // namespace finslervol
