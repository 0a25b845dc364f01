#include "finslervol/autodiff.hpp"

#include <algorithm>
#include <string>

namespace finslervol {

namespace {

void check_dim(std::size_t n) {
  if (n == 0 || n > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorCode::UnsupportedDimension,
                "direction dimension " + std::to_string(n) + " outside 1.." + std::to_string(kMaxDim));
  }
}

}  // namespace

HessianResult hessian_y_unchecked(const Expr& L, std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(y.size());
  check_dim(y.size());
  using J = Jet2<double>;

  std::array<J, kMaxDim> xs;
  std::array<J, kMaxDim> ys;
  for (std::size_t i = 0; i < x.size() && i < xs.size(); ++i) xs[i] = J(x[i]);
  for (int i = 0; i < n; ++i) ys[i] = J::variable(n, i, y[i]);

  const J r = evaluate<J>(L, Env<J>{std::span<const J>(xs.data(), std::min<std::size_t>(x.size(), kMaxDim)),
                                    std::span<const J>(ys.data(), n)});

  HessianResult out;
  out.value = r.v;
  out.grad.resize(n);
  out.hess.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.grad[i] = i < r.n ? r.g[i] : 0.0;
    for (int j = i; j < n; ++j) {
      const double hij = (i < r.n && j < r.n) ? r.h[J::tri(i, j)] : 0.0;
      out.hess(i, j) = hij;
      out.hess(j, i) = hij;
    }
  }
  out.finite = std::isfinite(out.value) && out.grad.allFinite() && out.hess.allFinite();
  return out;
}

HessianResult hessian_y(const Expr& L, std::span<const double> x, std::span<const double> y) {
  HessianResult r = hessian_y_unchecked(L, x, y);
  if (!r.finite) {
    throw Error(ErrorCode::NonFiniteResult, "Lagrangian or its derivatives are not finite at this direction");
  }
  return r;
}

std::vector<Eigen::MatrixXd> third_directional(const Expr& L, std::span<const double> x,
                                               std::span<const double> y) {
  const int n = static_cast<int>(y.size());
  check_dim(y.size());
  using D = Dual<double>;
  using J = Jet2<D>;

  std::array<J, kMaxDim> xs;
  const std::size_t nx = std::min<std::size_t>(x.size(), kMaxDim);
  for (std::size_t i = 0; i < nx; ++i) xs[i] = J(x[i]);

  // raw[k](i, j) = d^3 L / dy^i dy^j dy^k
  std::vector<Eigen::MatrixXd> raw(n, Eigen::MatrixXd::Zero(n, n));
  std::array<J, kMaxDim> ys;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) ys[i] = J::variable(n, i, D(y[i], i == k ? 1.0 : 0.0));
    const J r = evaluate<J>(L, Env<J>{std::span<const J>(xs.data(), nx), std::span<const J>(ys.data(), n)});
    for (int i = 0; i < r.n; ++i)
      for (int j = i; j < r.n; ++j) {
        raw[k](i, j) = r.h[J::tri(i, j)].d;
        raw[k](j, i) = raw[k](i, j);
      }
  }

  std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        // Symmetrize over the index slots; sorting makes the sum order-free so
        // every permutation of (i, j, k) gets a bit-identical value.
        std::array<double, 3> t{raw[k](i, j), raw[j](i, k), raw[i](j, k)};
        std::sort(t.begin(), t.end());
        out[k](i, j) = 0.5 * ((t[0] + t[1] + t[2]) / 3.0);
      }
  for (const auto& m : out) {
    if (!m.allFinite()) {
      throw Error(ErrorCode::NonFiniteResult, "third derivatives of the Lagrangian are not finite");
    }
  }
  return out;
}

double directional_derivative(const Expr& e, std::span<const double> x, std::span<const double> y,
                              std::span<const double> dir) {
  using D = Dual<double>;
  std::vector<D> xs(x.begin(), x.end());
  std::vector<D> ys(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ys[i] = D(y[i], i < dir.size() ? dir[i] : 0.0);
  return evaluate<D>(e, Env<D>{xs, ys}).d;
}

}  // namespace finslervol
