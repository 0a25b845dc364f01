#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "finslervol/finsler.hpp"

namespace finslervol {

struct SolverOptions {
  int seeds = 16;
  int max_iters = 500;
  /// Cartan residual accepted as critical; non-positive selects 1e-8 * n.
  double tol_residual = 0.0;
  std::uint64_t rng_seed = 0x5eedULL;
  /// Runs whose iterate reaches L < eps_cone * |t|^2 are abandoned.
  double eps_cone = 1e-6;
  double tol_angle = 1e-6;
  /// Critical values within tol_value_rel * f of the minimum are ties.
  double tol_value_rel = 1e-9;
  /// Smallest admissible eigenvalue of the projected Hessian of |det g|.
  double hessian_floor = -1e-8;
  int max_seed_attempts = 20000;

  double residual_tol(int n) const { return tol_residual > 0.0 ? tol_residual : 1e-8 * n; }
};

enum class OrientationStatus { Converged, MultipleMinima, NotFound };

std::string_view to_string(OrientationStatus s);

struct TimeOrientation {
  Point x;
  Eigen::VectorXd t;  // Euclidean unit vector
  double critical_value = 0.0;  // |det g(x, t)|
  double residual = 0.0;        // |C(x, t)|
  OrientationStatus status = OrientationStatus::NotFound;
  double min_hessian_eig = 0.0;  // projected Hessian of |det g| on the sphere
  int converged_runs = 0;
  int cone_aborts = 0;
};

struct OsculatingPair {
  MetricMatrix g_t;        // g(x, t), Lorentzian
  MetricMatrix g_t_plus;   // 2 t'_i t'_j - g_ij, positive definite
  Eigen::VectorXd t_prime;  // t / F(t)
};

OsculatingPair osculating(const MetricSpec& spec, std::span<const double> x, std::span<const double> t);

/// Timelike critical direction of |det g(x, .)| with the least critical
/// value, searched on the Euclidean unit sphere. `extra_seeds` are tried
/// before the random ones and win ties.
TimeOrientation find_privileged(const MetricSpec& spec, std::span<const double> x, const SolverOptions& opts,
                                std::span<const Eigen::VectorXd> extra_seeds = {});

struct OrientationField {
  std::vector<TimeOrientation> points;
  /// Largest angle between a point's direction and that of the neighbour it
  /// was seeded from.
  double smoothness = 0.0;
};

OrientationField orientation_field(const MetricSpec& spec, const std::vector<Point>& grid,
                                   const SolverOptions& opts);

/// Angle between two directions, accurate near zero.
double direction_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Hessian of |det g(x, .)| at t restricted to the tangent space of the
/// sphere, by central differences of the Cartan form.
Eigen::MatrixXd projected_hessian(const MetricSpec& spec, std::span<const double> x, const Eigen::VectorXd& t,
                                  double h = 1e-5);

}  // namespace finslervol
