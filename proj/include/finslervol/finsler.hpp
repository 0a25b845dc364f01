#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "finslervol/expr.hpp"

namespace finslervol {

/// A pseudo-Finsler structure given by a 2-homogeneous Lagrangian L(x, y)
/// on the admissible set {admissible(x, y) > 0}.
struct MetricSpec {
  std::string name;
  int dim = 0;
  Expr lagrangian;
  Expr admissible = Expr::constant(1.0);
  std::map<std::string, std::string> metadata;

  /// Builds a spec from source text, checking variable indices against `dim`.
  static MetricSpec from_source(std::string name, int dim, std::string_view lagrangian,
                                std::string_view admissible = "1");

  double lagrangian_at(std::span<const double> x, std::span<const double> y) const;
  bool is_admissible(std::span<const double> x, std::span<const double> y) const;
};

struct Signature {
  int positives = 0;
  int negatives = 0;
  int zeros = 0;

  bool lorentzian(int n) const { return positives == 1 && negatives == n - 1 && zeros == 0; }
  bool positive_definite(int n) const { return positives == n; }
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Symmetric matrix value of g at one (x, y).
struct MetricMatrix {
  Eigen::MatrixXd entries;
  Signature signature;
  double det = 0.0;

  int dim() const { return static_cast<int>(entries.rows()); }
  bool degenerate() const { return signature.zeros > 0; }

  /// Eigenvalues are classified as zero below 1e-10 * ||entries||.
  static MetricMatrix from_entries(Eigen::MatrixXd entries);
};

enum class CausalClass { Timelike, Lightlike, Spacelike, Inadmissible };

std::string_view to_string(CausalClass c);

using Point = Eigen::VectorXd;

/// g_ij = 1/2 d^2 L / dy^i dy^j. A degenerate result is reported through the
/// signature, not thrown.
MetricMatrix metric_at(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

/// det g(x, y) without signature analysis; NaN on a domain violation.
double det_g(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

/// F = sqrt(|L|).
double norm_F(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

/// Lightlike band |L| <= 1e-12 * max(1, |y|^2).
CausalClass classify(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

/// C_i = 1/2 g^{jk} d g_ij / d y^k. Throws DegenerateMetric when g is singular.
Eigen::VectorXd cartan_form(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

/// Relative mismatch between C_i sqrt|det g| and a central difference of
/// sqrt|det g| in y (step h relative to |y|).
double cartan_identity_error(const MetricSpec& spec, std::span<const double> x, std::span<const double> y,
                             double h = 1e-5);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace finslervol
