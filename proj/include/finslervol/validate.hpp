#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "finslervol/catalog.hpp"
#include "finslervol/orientation.hpp"
#include "finslervol/volume.hpp"

namespace finslervol {

struct SamplePoint {
  Point x;
  Eigen::VectorXd y;
};

enum class SampleFilter {
  Admissible,
  /// Admissible, |L| >= 0.05 |y|^2, and g varies by at most 25% of its
  /// largest entry within 2% of |y|.
  Smooth,
  /// L >= 0.05 |y|^2, away from the light cone.
  Timelike,
};

/// x uniform in center + [0, 1]^n, y standard normal, rejection-filtered.
std::vector<SamplePoint> sample_points(const MetricSpec& spec, int count, std::mt19937_64& rng, SampleFilter filter,
                                       const Point& center);

/// Largest entry of |hess_ad - hess_fd| relative to the largest |hess_ad|
/// entry; central second differences with steps h |y| and h |y| / 2,
/// Richardson-extrapolated.
double hessian_fd_error(const MetricSpec& spec, std::span<const double> x, std::span<const double> y,
                        double h = 1e-3);

/// det g^{t,+} computed through 1 - 2 g^{ij} t'_i t'_j.
double matrix_lemma_det(const OsculatingPair& osc);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::string metric;
  std::vector<CheckResult> checks;

  bool all_passed() const;
  std::string table() const;
};

struct ValidationOptions {
  int samples = 100;
  std::uint64_t seed = 7;
  SolverOptions solver;
  VolumeOptions volume;
};

/// Structural invariants on sampled points, then orientation and density
/// checks at the reference point, compared with `truth` when given.
ValidationReport validate(const MetricSpec& spec, const ValidationOptions& opts = {},
                          const CatalogEntry* truth = nullptr);

}  // namespace finslervol
