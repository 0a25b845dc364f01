#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "finslervol/finsler.hpp"

namespace finslervol {

/// A built-in metric with whatever closed-form ground truth is known at its
/// reference point.
struct CatalogEntry {
  MetricSpec spec;
  std::string description;
  Point reference_point;
  bool lorentzian = true;  // false: positive definite

  std::optional<Eigen::VectorXd> privileged_direction;
  std::optional<double> det_g;     // det g at the reference point, for every admissible y
  std::optional<double> det_g_t0;  // |det g^t0|
  std::optional<double> sigma_bh;
  std::optional<double> sigma_ht;
  std::optional<double> classical_bh;
  std::optional<double> classical_ht;
  /// |det g| blows up on the ellipsoid, so HT is unavailable.
  bool ht_prolongable = true;
  /// Where the ground truth comes from.
  std::string provenance;
};

const std::vector<std::string>& builtin_names();

/// Also accepts "euclidean-<k>" for 1 <= k <= 8; plain "euclidean-n" is the
/// plane.
CatalogEntry builtin(std::string_view name);

/// Reads a metric file:
///
///   [metric]
///   name = my-metric
///   dim = 2
///   [lagrangian]
///   expr = "y0^2 - y1^2"
///   [admissible]
///   expr = "1"
///   [meta]
///   any = text
///
/// Blank lines and lines starting with '#' or ';' are ignored.
MetricSpec load_spec(const std::filesystem::path& path);
MetricSpec parse_spec_text(std::string_view text, std::string_view origin = "<string>");

/// A catalog name, or a path to a metric file when no builtin matches.
MetricSpec resolve_metric(std::string_view name_or_path);

}  // namespace finslervol
