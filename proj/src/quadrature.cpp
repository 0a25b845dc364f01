#include "finslervol/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace finslervol {

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

GaussRule1D gauss_jacobi(int m, double alpha, double beta) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "Gauss rule needs at least one node");
  const double ab = alpha + beta;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    if (k == 0) {
      J(0, 0) = (beta - alpha) / (ab + 2.0);
    } else {
      const double s = 2.0 * k + ab;
      J(k, k) = (beta * beta - alpha * alpha) / (s * (s + 2.0));
      const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
      const double den = s * s * (s + 1.0) * (s - 1.0);
      J(k, k - 1) = J(k - 1, k) = std::sqrt(num / den);
    }
  }
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                     std::tgamma(ab + 2.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  GaussRule1D rule;
  rule.nodes = eig.eigenvalues();
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

GaussRule1D gauss_legendre(int m, double a, double b) {
  GaussRule1D r = gauss_jacobi(m, 0.0, 0.0);
  const double half = 0.5 * (b - a);
  r.nodes = (r.nodes.array() + 1.0) * half + a;
  r.weights *= half;
  return r;
}

GaussRule1D radial_rule(int n, int m) {
  // int_0^1 p(r) r^(n-1) dr = 2^-n int_{-1}^1 p((1+x)/2) (1+x)^(n-1) dx
  GaussRule1D r = gauss_jacobi(m, 0.0, n - 1.0);
  r.nodes = (r.nodes.array() + 1.0) * 0.5;
  r.weights *= std::pow(2.0, -n);
  return r;
}

QuadratureOrders QuadratureOrders::defaults(int n) {
  if (n <= 4) return {16, 32};
  return {8, 16};
}

namespace {

void check_rule_dim(int n) {
  if (n < 2 || n > 8) {
    throw Error(ErrorCode::UnsupportedDimension, "quadrature supports 2 <= n <= 8, got " + std::to_string(n));
  }
}

}  // namespace

QuadratureRule sphere_rule(int n, int angular) {
  check_rule_dim(n);
  if (angular < 1) throw Error(ErrorCode::InvalidArgument, "angular order must be positive");

  // Polar level j (j = 1..n-2) carries sin^(n-1-j); in u = cos(theta) that is
  // the Gegenbauer weight (1-u^2)^((n-2-j)/2).
  std::vector<GaussRule1D> polar;
  for (int j = 1; j <= n - 2; ++j) {
    const double a = 0.5 * (n - 2 - j);
    polar.push_back(gauss_jacobi(angular, a, a));
  }
  const int m_phi = 2 * angular;
  const double w_phi = 2.0 * std::numbers::pi / m_phi;

  QuadratureRule rule;
  rule.dim = n;
  rule.kind = RuleKind::Sphere;
  int count = m_phi;
  for (const auto& p : polar) {
    rule.shape.push_back(static_cast<int>(p.nodes.size()));
    count *= static_cast<int>(p.nodes.size());
  }
  rule.shape.push_back(m_phi);
  rule.nodes.resize(n, count);
  rule.weights.resize(count);

  std::vector<int> idx(polar.size() + 1, 0);
  for (int c = 0; c < count; ++c) {
    // idx is the row-major multi-index of node c, periodic angle last.
    int rem = c;
    for (int d = static_cast<int>(rule.shape.size()) - 1; d >= 0; --d) {
      idx[d] = rem % rule.shape[d];
      rem /= rule.shape[d];
    }
    double w = w_phi;
    double s = 1.0;  // running product of sines
    for (std::size_t j = 0; j < polar.size(); ++j) {
      const double u = polar[j].nodes[idx[j]];
      w *= polar[j].weights[idx[j]];
      rule.nodes(static_cast<Eigen::Index>(j), c) = s * u;
      s *= std::sqrt(std::max(0.0, 1.0 - u * u));
    }
    const double phi = w_phi * (idx.back() + 0.5);
    rule.nodes(n - 2, c) = s * std::cos(phi);
    rule.nodes(n - 1, c) = s * std::sin(phi);
    rule.weights[c] = w;
  }
  return rule;
}

QuadratureRule ball_rule(int n, QuadratureOrders orders) {
  check_rule_dim(n);
  if (orders.radial < 1) throw Error(ErrorCode::InvalidArgument, "radial order must be positive");
  const QuadratureRule sphere = sphere_rule(n, orders.angular);
  const GaussRule1D radial = radial_rule(n, orders.radial);

  QuadratureRule rule;
  rule.dim = n;
  rule.kind = RuleKind::Ball;
  rule.shape.push_back(orders.radial);
  rule.shape.insert(rule.shape.end(), sphere.shape.begin(), sphere.shape.end());
  const int ns = sphere.size();
  rule.nodes.resize(n, orders.radial * ns);
  rule.weights.resize(orders.radial * ns);
  for (int r = 0; r < orders.radial; ++r) {
    for (int s = 0; s < ns; ++s) {
      rule.nodes.col(r * ns + s) = radial.nodes[r] * sphere.nodes.col(s);
      rule.weights[r * ns + s] = radial.weights[r] * sphere.weights[s];
    }
  }
  return rule;
}

QuadratureRule ball_rule(int n, int order) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "order must be >= 1");
  const int m = (order + 2) / 2;  // ceil((order + 1) / 2)
  return ball_rule(n, QuadratureOrders{m, m});
}

EllipsoidMap ellipsoid_map(const MetricMatrix& g_plus) {
  const Eigen::LLT<Eigen::MatrixXd> llt(g_plus.entries);
  if (llt.info() != Eigen::Success || !g_plus.signature.positive_definite(g_plus.dim())) {
    throw Error(ErrorCode::NotPositiveDefinite, "ellipsoid map needs a positive definite metric");
  }
  const int n = g_plus.dim();
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::LLT<Eigen::MatrixXd> llt_inv(0.5 * (inv + inv.transpose()));
  if (llt_inv.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "inverse metric is not numerically positive definite");
  }
  EllipsoidMap map;
  map.factor = llt_inv.matrixL();
  map.jac = map.factor.diagonal().prod();
  return map;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double a : v) s += a;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double renormalized_sum(const Eigen::VectorXd& weights, const Eigen::VectorXd& values) {
  std::vector<double> terms;
  std::vector<double> used;
  terms.reserve(values.size());
  used.reserve(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::isfinite(values[i])) {
      terms.push_back(weights[i] * values[i]);
      used.push_back(weights[i]);
    }
  }
  if (terms.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double total = pairwise_sum({weights.data(), static_cast<std::size_t>(weights.size())});
  const double kept = pairwise_sum(used);
  const double s = pairwise_sum(terms);
  return used.size() == static_cast<std::size_t>(values.size()) ? s : s * (total / kept);
}

NodeSamples sample_mapped_sphere(const Integrand& f, const EllipsoidMap& map, const QuadratureRule& sphere,
                                 const SingularNodePolicy& policy) {
  const int n = map.dim();
  if (sphere.dim != n) throw Error(ErrorCode::InvalidArgument, "rule and map dimensions differ");
  NodeSamples out;
  out.values.resize(sphere.size());
  Eigen::VectorXd y(n);
  for (int c = 0; c < sphere.size(); ++c) {
    y.noalias() = map.factor * sphere.nodes.col(c);
    double v = f(as_span(y));
    if (!std::isfinite(v)) {
      const double step = policy.delta * y.norm();
      for (int attempt = 0; attempt < policy.max_retries && !std::isfinite(v); ++attempt) {
        Eigen::VectorXd yp = y;
        yp[attempt % n] += step;
        v = f(as_span(yp));
      }
      if (std::isfinite(v)) {
        ++out.perturbed;
      } else {
        ++out.skipped;
        v = std::numeric_limits<double>::quiet_NaN();
      }
    }
    out.values[c] = v;
  }
  return out;
}

HomogeneousIntegral integrate_homogeneous(const Integrand& f, int k, const EllipsoidMap& map,
                                          const QuadratureRule& sphere, const SingularNodePolicy& policy) {
  if (sphere.kind != RuleKind::Sphere) throw Error(ErrorCode::InvalidArgument, "expected a sphere rule");
  const int n = map.dim();
  if (n + k <= 0) throw Error(ErrorCode::InvalidArgument, "homogeneity degree must exceed -n");
  const NodeSamples s = sample_mapped_sphere(f, map, sphere, policy);
  if (s.skipped > policy.max_skipped_fraction * sphere.size() || s.skipped == sphere.size()) {
    throw Error(ErrorCode::SingularNodes, std::to_string(s.skipped) + " of " + std::to_string(sphere.size()) +
                                              " quadrature nodes are singular");
  }
  HomogeneousIntegral out;
  out.singular_nodes = s.skipped;
  out.perturbed_nodes = s.perturbed;
  out.value = map.jac / (n + k) * renormalized_sum(sphere.weights, s.values);
  out.min_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    if (std::isfinite(s.values[i])) out.min_value = std::min(out.min_value, s.values[i]);
  return out;
}

std::vector<char> flag_blowup_nodes(const QuadratureRule& sphere, const Eigen::VectorXd& values, double ratio) {
  const auto& shape = sphere.shape;
  const int dims = static_cast<int>(shape.size());
  std::vector<int> stride(dims, 1);
  for (int d = dims - 2; d >= 0; --d) stride[d] = stride[d + 1] * shape[d + 1];

  std::vector<char> flagged(values.size(), 0);
  std::vector<int> idx(dims);
  for (int c = 0; c < static_cast<int>(values.size()); ++c) {
    if (!std::isfinite(values[c])) {
      flagged[c] = 1;
      continue;
    }
    int rem = c;
    for (int d = dims - 1; d >= 0; --d) {
      idx[d] = rem % shape[d];
      rem /= shape[d];
    }
    double nmin = std::numeric_limits<double>::infinity();
    for (int d = 0; d < dims; ++d) {
      const bool periodic = d == dims - 1;
      for (int step : {-1, 1}) {
        int j = idx[d] + step;
        if (periodic) {
          j = (j + shape[d]) % shape[d];
        } else if (j < 0 || j >= shape[d]) {
          continue;
        }
        const double v = values[c + (j - idx[d]) * stride[d]];
        if (std::isfinite(v)) nmin = std::min(nmin, std::abs(v));
      }
    }
    if (std::isfinite(nmin) && std::abs(values[c]) > ratio * nmin) flagged[c] = 1;
  }
  return flagged;
}

}  // namespace finslervol
