#include "finslervol/finsler.hpp"

#include <cmath>
#include <limits>

#include "finslervol/autodiff.hpp"

namespace finslervol {

MetricSpec MetricSpec::from_source(std::string name, int dim, std::string_view lagrangian,
                                   std::string_view admissible) {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorCode::UnsupportedDimension, "dimension must be in 1.." + std::to_string(kMaxDim));
  }
  ParseOptions opts;
  opts.dim = dim;
  MetricSpec spec;
  spec.name = std::move(name);
  spec.dim = dim;
  spec.lagrangian = parse(lagrangian, opts);
  spec.admissible = parse(admissible, opts);
  return spec;
}

double MetricSpec::lagrangian_at(std::span<const double> x, std::span<const double> y) const {
  return evaluate(lagrangian, x, y);
}

bool MetricSpec::is_admissible(std::span<const double> x, std::span<const double> y) const {
  bool nonzero = false;
  for (double v : y) nonzero = nonzero || v != 0.0;
  if (!nonzero) return false;
  const double a = evaluate(admissible, x, y);
  return a > 0.0;  // NaN compares false
}

MetricMatrix MetricMatrix::from_entries(Eigen::MatrixXd entries) {
  MetricMatrix m;
  m.entries = std::move(entries);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.entries, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double tol = 1e-10 * ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) {
      ++m.signature.positives;
    } else if (ev[i] < -tol) {
      ++m.signature.negatives;
    } else {
      ++m.signature.zeros;
    }
  }
  m.det = m.entries.partialPivLu().determinant();
  return m;
}

std::string_view to_string(CausalClass c) {
  switch (c) {
    case CausalClass::Timelike: return "timelike";
    case CausalClass::Lightlike: return "lightlike";
    case CausalClass::Spacelike: return "spacelike";
    case CausalClass::Inadmissible: return "inadmissible";
  }
  return "?";
}

namespace {

void require_admissible(const MetricSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(y.size()) != spec.dim) {
    throw Error(ErrorCode::InvalidArgument, "direction has " + std::to_string(y.size()) + " components, metric '" +
                                                spec.name + "' has dimension " + std::to_string(spec.dim));
  }
  if (!spec.is_admissible(x, y)) {
    throw Error(ErrorCode::InadmissibleInput, "direction is not admissible for metric '" + spec.name + "'");
  }
}

}  // namespace

MetricMatrix metric_at(const MetricSpec& spec, std::span<const double> x, std::span<const double> y) {
  require_admissible(spec, x, y);
  HessianResult h = hessian_y(spec.lagrangian, x, y);
  return MetricMatrix::from_entries(0.5 * h.hess);
}

double det_g(const MetricSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (!spec.is_admissible(x, y)) return std::numeric_limits<double>::quiet_NaN();
  HessianResult h = hessian_y_unchecked(spec.lagrangian, x, y);
  if (!h.finite) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd g = 0.5 * h.hess;
  return g.partialPivLu().determinant();
}

double norm_F(const MetricSpec& spec, std::span<const double> x, std::span<const double> y) {
  require_admissible(spec, x, y);
  const double L = spec.lagrangian_at(x, y);
  if (!std::isfinite(L)) throw Error(ErrorCode::NonFiniteResult, "Lagrangian is not finite");
  return std::sqrt(std::abs(L));
}

CausalClass classify(const MetricSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(y.size()) != spec.dim || !spec.is_admissible(x, y)) return CausalClass::Inadmissible;
  const double L = spec.lagrangian_at(x, y);
  if (!std::isfinite(L)) return CausalClass::Inadmissible;
  double norm2 = 0.0;
  for (double v : y) norm2 += v * v;
  const double tau = 1e-12 * std::max(1.0, norm2);
  if (L > tau) return CausalClass::Timelike;
  if (L < -tau) return CausalClass::Spacelike;
  return CausalClass::Lightlike;
}

Eigen::VectorXd cartan_form(const MetricSpec& spec, std::span<const double> x, std::span<const double> y) {
  const MetricMatrix g = metric_at(spec, x, y);
  if (g.degenerate()) {
    throw Error(ErrorCode::DegenerateMetric, "metric tensor is degenerate; Cartan form undefined");
  }
  const Eigen::MatrixXd ginv = g.entries.inverse();
  const std::vector<Eigen::MatrixXd> dg = third_directional(spec.lagrangian, x, y);
  const int n = spec.dim;
  Eigen::VectorXd C = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += ginv.row(k).dot(dg[k].row(i));
    C[i] = 0.5 * s;
  }
  return C;
}

double cartan_identity_error(const MetricSpec& spec, std::span<const double> x, std::span<const double> y,
                             double h) {
  const Eigen::VectorXd C = cartan_form(spec, x, y);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  const double scale = yv.norm();
  const double step = h * scale;
  const double s0 = std::sqrt(std::abs(det_g(spec, x, y)));
  Eigen::VectorXd fd(spec.dim);
  for (int i = 0; i < spec.dim; ++i) {
    Eigen::VectorXd yp = yv, ym = yv;
    yp[i] += step;
    ym[i] -= step;
    const double sp = std::sqrt(std::abs(det_g(spec, x, as_span(yp))));
    const double sm = std::sqrt(std::abs(det_g(spec, x, as_span(ym))));
    fd[i] = (sp - sm) / (2.0 * step);
  }
  const Eigen::VectorXd ad = C * s0;
  const double denom = std::max(ad.norm(), s0 / scale);
  return (fd - ad).norm() / denom;
}

}  // namespace finslervol
