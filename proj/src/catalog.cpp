#include "finslervol/catalog.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace finslervol {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) out[i++] = a;
  return out;
}

CatalogEntry minkowski4() {
  CatalogEntry e;
  e.spec = MetricSpec::from_source("minkowski4", 4, "y0^2 - y1^2 - y2^2 - y3^2");
  e.description = "flat Minkowski space, signature (+,-,-,-)";
  e.reference_point = Point::Zero(4);
  e.privileged_direction = vec({1, 0, 0, 0});
  e.det_g = -1.0;
  e.det_g_t0 = 1.0;
  e.sigma_bh = 1.0;
  e.sigma_ht = 1.0;
  e.provenance = "closed form: g = diag(1,-1,-1,-1), every timelike t is privileged";
  return e;
}

CatalogEntry riemannian_diag() {
  CatalogEntry e;
  e.spec = MetricSpec::from_source("riemannian-diag", 4,
                                   "(2 + x0^2)*y0^2 - y1^2 - 3*y2^2 - (1 + x1^2)*y3^2");
  e.description = "position-dependent diagonal Lorentzian metric";
  e.reference_point = Point::Zero(4);
  e.privileged_direction = vec({1, 0, 0, 0});
  e.det_g = -6.0;
  e.det_g_t0 = 6.0;
  e.sigma_bh = std::sqrt(6.0);
  e.sigma_ht = std::sqrt(6.0);
  e.provenance = "closed form at x = 0: g = diag(2,-1,-3,-1), both densities equal sqrt|det g|";
  return e;
}

CatalogEntry berwald_moor() {
  CatalogEntry e;
  e.spec = MetricSpec::from_source("berwald-moor", 4, "sgn(y0*y1*y2*y3)*sqrt(abs(y0*y1*y2*y3))",
                                   "abs(y0*y1*y2*y3)");
  e.description = "sign-adjusted Berwald-Moor metric, defined off the coordinate hyperplanes";
  e.reference_point = Point::Zero(4);
  e.privileged_direction = vec({0.5, 0.5, 0.5, 0.5});
  e.det_g = -std::pow(2.0, -8);
  e.det_g_t0 = std::pow(2.0, -8);
  e.sigma_bh = std::pow(2.0, -4);
  e.sigma_ht = std::pow(2.0, -4);
  e.provenance = "closed form: det g = -2^-8 on all admissible y, Cartan form vanishes identically";
  return e;
}

CatalogEntry bogoslovsky_toy() {
  CatalogEntry e;
  e.spec = MetricSpec::from_source("bogoslovsky-toy", 2, "y0*sqrt(abs(y0^2 - y1^2))", "abs(y0^2 - y1^2)");
  e.description = "two-dimensional Bogoslovsky metric with b = 1/2";
  e.reference_point = Point::Zero(2);
  e.privileged_direction = vec({1, 0});
  e.det_g_t0 = 0.5;
  e.sigma_bh = std::sqrt(0.5);
  e.ht_prolongable = false;
  e.provenance =
      "closed form: det g = -(2 y0^2 + y1^2) / (4 |y0^2 - y1^2|), critical at y1 = 0; |det g| diverges on the "
      "light cone inside every ellipsoid";
  return e;
}

CatalogEntry linearized_quartic() {
  CatalogEntry e;
  // eta + eps * gamma with a positive definite quartic-root gamma that is
  // anisotropic and depends on x0 through a boost-like shear.
  e.spec = MetricSpec::from_source(
      "linearized-quartic", 4,
      "y0^2 - y1^2 - y2^2 - y3^2 + 0.001*sqrt((y0^2 + (y1 + 0.25*x0*y0)^2 + y2^2 + y3^2)^2"
      " - 0.5*(y0^4 + (y1 + 0.25*x0*y0)^4 + y2^4 + y3^4))");
  e.spec.metadata["epsilon"] = "0.001";
  e.description = "Minkowski perturbed by 1e-3 times a smooth positive definite quartic-root Finsler function";
  e.reference_point = Point::Constant(4, 0.5);
  e.provenance = "no closed form; checked through residual, Hessian and lower-bound properties";
  return e;
}

CatalogEntry euclidean(int k, std::string name) {
  CatalogEntry e;
  std::string lagr;
  for (int i = 0; i < k; ++i) lagr += (i ? " + y" : "y") + std::to_string(i) + "^2";
  e.spec = MetricSpec::from_source(std::move(name), k, lagr);
  e.description = "Euclidean metric in dimension " + std::to_string(k);
  e.reference_point = Point::Zero(k);
  e.lorentzian = false;
  e.det_g = 1.0;
  e.classical_bh = 1.0;
  e.classical_ht = 1.0;
  e.provenance = "closed form: B_x is the unit ball";
  return e;
}

CatalogEntry pd_quartic() {
  CatalogEntry e;
  e.spec = MetricSpec::from_source("pd-quartic", 2, "sqrt(y0^4 + y1^4)");
  e.description = "positive definite quartic Finsler norm (y0^4 + y1^4)^(1/4)";
  e.reference_point = Point::Zero(2);
  e.lorentzian = false;
  // Area of |u|^4 + |v|^4 <= 1 is 4 Gamma(5/4)^2 / Gamma(3/2).
  const double area = 4.0 * std::pow(std::tgamma(1.25), 2) / std::tgamma(1.5);
  e.classical_bh = std::numbers::pi / area;
  e.provenance = "closed form: superellipse area 4 Gamma(5/4)^2 / Gamma(3/2)";
  return e;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"minkowski4",         "riemannian-diag", "berwald-moor",
                                                 "bogoslovsky-toy",    "linearized-quartic", "euclidean-n",
                                                 "pd-quartic"};
  return names;
}

CatalogEntry builtin(std::string_view name) {
  if (name == "minkowski4") return minkowski4();
  if (name == "riemannian-diag") return riemannian_diag();
  if (name == "berwald-moor") return berwald_moor();
  if (name == "bogoslovsky-toy") return bogoslovsky_toy();
  if (name == "linearized-quartic") return linearized_quartic();
  if (name == "pd-quartic") return pd_quartic();
  if (name == "euclidean-n") return euclidean(2, "euclidean-n");
  if (name.starts_with("euclidean-")) {
    const std::string_view digits = name.substr(10);
    int k = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && end == digits.data() + digits.size() && k >= 1 && k <= 8) {
      return euclidean(k, std::string(name));
    }
  }
  throw Error(ErrorCode::UnknownMetric, "no built-in metric named '" + std::string(name) + "'");
}

}  // namespace finslervol
