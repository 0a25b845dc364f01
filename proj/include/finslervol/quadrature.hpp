#pragma once

// Deterministic product rules on the Euclidean unit sphere and ball, and the
// linear map taking the unit ball onto the unit ball of a positive definite
// metric.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "finslervol/finsler.hpp"

namespace finslervol {

double unit_ball_volume(int n);
double unit_sphere_area(int n);

/// Nodes and weights of a one-dimensional Gauss rule.
struct GaussRule1D {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// m-point Gauss-Jacobi rule for (1-x)^alpha (1+x)^beta on [-1, 1]
/// (Golub-Welsch).
GaussRule1D gauss_jacobi(int m, double alpha, double beta);

/// m-point Gauss-Legendre rule on [a, b].
GaussRule1D gauss_legendre(int m, double a = -1.0, double b = 1.0);

/// m-point rule on [0, 1] for the weight r^(n-1).
GaussRule1D radial_rule(int n, int m);

enum class RuleKind { Sphere, Ball };

struct QuadratureRule {
  int dim = 0;
  RuleKind kind = RuleKind::Sphere;
  Eigen::MatrixXd nodes;  // dim x size
  Eigen::VectorXd weights;
  /// Tensor grid extents. Sphere: polar angles then the periodic angle.
  /// Ball: radial count followed by the sphere extents.
  std::vector<int> shape;

  int size() const { return static_cast<int>(weights.size()); }
  Eigen::VectorXd node(int i) const { return nodes.col(i); }
};

/// Node counts: radial Gauss points, and Gauss points per polar angle. The
/// periodic angle uses twice the polar count so both directions share the
/// same polynomial degree.
struct QuadratureOrders {
  int radial = 16;
  int angular = 32;

  static QuadratureOrders defaults(int n);
};

/// Spherical product rule on S^(n-1): Gauss-Gegenbauer in cos of each polar
/// angle, trapezoid in the periodic one. Exact for polynomials of degree
/// <= 2*angular - 1.
QuadratureRule sphere_rule(int n, int angular);

/// Spherical-radial product rule on the unit ball.
QuadratureRule ball_rule(int n, QuadratureOrders orders);

/// Ball rule exact for all monomials of total degree <= order.
QuadratureRule ball_rule(int n, int order);

/// u -> factor * u maps the unit ball onto {y : g_plus(y, y) <= 1}.
struct EllipsoidMap {
  Eigen::MatrixXd factor;  // lower triangular, factor * factor^T = g_plus^-1
  double jac = 1.0;        // det(factor) = det(g_plus)^(-1/2)

  int dim() const { return static_cast<int>(factor.rows()); }
  double volume() const { return jac * unit_ball_volume(dim()); }
};

EllipsoidMap ellipsoid_map(const MetricMatrix& g_plus);

/// Handling of integrand evaluations that come back non-finite.
struct SingularNodePolicy {
  double delta = 1e-9;  // perturbation size, relative to |y|
  int max_retries = 4;  // axes tried in turn: 0, 1, ..., n-1, 0, ...
  /// Above this fraction of skipped nodes the integral throws SingularNodes.
  double max_skipped_fraction = 0.01;
};

using Integrand = std::function<double(std::span<const double>)>;

/// Integrand values at the mapped nodes of a sphere rule; NaN marks nodes
/// where every perturbation attempt failed.
struct NodeSamples {
  Eigen::VectorXd values;
  int perturbed = 0;
  int skipped = 0;
};

NodeSamples sample_mapped_sphere(const Integrand& f, const EllipsoidMap& map, const QuadratureRule& sphere,
                                 const SingularNodePolicy& policy = {});

/// Weighted sum over nodes with finite values, rescaled to the full weight
/// mass. Pairwise summation keeps the result order-independent of threading.
double renormalized_sum(const Eigen::VectorXd& weights, const Eigen::VectorXd& values);

double pairwise_sum(std::span<const double> v);

struct HomogeneousIntegral {
  double value = 0.0;
  int singular_nodes = 0;  // skipped after exhausting retries
  int perturbed_nodes = 0;
  double min_value = 0.0;  // over evaluated nodes
};

/// Integral of a positively k-homogeneous f over the ellipsoid map(B), via
/// the sphere identity: int_E f = jac/(n+k) * int_S f(A u) dlambda(u).
HomogeneousIntegral integrate_homogeneous(const Integrand& f, int k, const EllipsoidMap& map,
                                          const QuadratureRule& sphere, const SingularNodePolicy& policy = {});

/// Marks nodes whose value exceeds `ratio` times the smallest value among its
/// grid neighbours. Non-finite nodes are always marked.
std::vector<char> flag_blowup_nodes(const QuadratureRule& sphere, const Eigen::VectorXd& values, double ratio);

}  // namespace finslervol
