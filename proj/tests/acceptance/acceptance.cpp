// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria, capped at 1.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "finslervol/autodiff.hpp"
#include "finslervol/catalog.hpp"
#include "finslervol/error.hpp"
#include "finslervol/orientation.hpp"
#include "finslervol/quadrature.hpp"
#include "finslervol/validate.hpp"
#include "finslervol/volume.hpp"

using namespace finslervol;

namespace {

struct Outcome {
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string note;
};

const Eigen::VectorXd& zeros(int n) {
  static std::vector<Eigen::VectorXd> cache = [] {
    std::vector<Eigen::VectorXd> v;
    for (int k = 0; k <= kMaxDim; ++k) v.push_back(Eigen::VectorXd::Zero(k));
    return v;
  }();
  return cache[n];
}

// 1. det g = -2^-8 for Berwald-Moor at random admissible directions.
Outcome bm_determinant() {
  const MetricSpec s = builtin("berwald-moor").spec;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (const auto& p : sample_points(s, 1000, rng, SampleFilter::Admissible, zeros(4)))
    worst = std::max(worst, std::abs(det_g(s, as_span(p.x), as_span(p.y)) + 1.0 / 256));
  return {worst <= 1e-10, worst, 1e-10, "max |det g + 2^-8| over 1000 directions"};
}

// 2. Both Berwald-Moor densities are 2^-4 for any timelike orientation.
Outcome bm_volumes() {
  const MetricSpec s = builtin("berwald-moor").spec;
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (const auto& p : sample_points(s, 5, rng, SampleFilter::Timelike, zeros(4))) {
    const TimeOrientation t0 = orientation_at(s, as_span(p.x), p.y);
    const double bh = minimal_riemannian_density(s, as_span(p.x), t0).sigma;
    const double ht = holmes_thompson_density(s, as_span(p.x), t0).sigma;
    worst = std::max({worst, std::abs(bh - 0.0625), std::abs(ht - 0.0625)});
  }
  return {worst <= 1e-6, worst, 1e-6, "max |sigma - 2^-4| over 5 orientations, both forms"};
}

// 3. Bogoslovsky toy: orientation, osculating determinant, BH density, HT refusal.
Outcome bogoslovsky() {
  const MetricSpec s = builtin("bogoslovsky-toy").spec;
  const TimeOrientation t0 = find_privileged(s, as_span(zeros(2)), SolverOptions{});
  const double angle = direction_angle(t0.t, Eigen::Vector2d(1, 0));
  const double det_err = std::abs(t0.critical_value - 0.5);
  const double bh_err = std::abs(minimal_riemannian_density(s, as_span(zeros(2)), t0).sigma - std::sqrt(0.5));
  bool refused = false;
  try {
    holmes_thompson_density(s, as_span(zeros(2)), t0);
  } catch (const Error& e) {
    refused = e.code() == ErrorCode::DetNotProlongable;
  }
  char note[160];
  std::snprintf(note, sizeof note, "angle %.2e (tol 1e-6), |det-0.5| %.2e, |sigma_bh-2^-1/2| %.2e, HT refused: %s",
                angle, det_err, bh_err, refused ? "yes" : "no");
  const bool ok = angle <= 1e-6 && det_err <= 1e-8 && bh_err <= 1e-8 && refused;
  return {ok, std::max(det_err, bh_err), 1e-8, note};
}

// 4. Diagonal Lorentzian metrics: both densities equal sqrt|det g|.
Outcome riemannian_collapse() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> entry(0.2, 5.0);
  double worst = 0.0;
  for (int n = 2; n <= 4; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      std::string src;
      double det = 1.0;
      for (int i = 0; i < n; ++i) {
        const double d = entry(rng);
        det *= d;
        char term[64];
        std::snprintf(term, sizeof term, "%s%.17g*y%d^2", i == 0 ? "" : " - ", d, i);
        src += term;
      }
      const MetricSpec s = MetricSpec::from_source("diag", n, src);
      std::vector<SamplePoint> pts = sample_points(s, 1, rng, SampleFilter::Timelike, zeros(n));
      const TimeOrientation t0 = orientation_at(s, as_span(pts[0].x), pts[0].y);
      const double expect = std::sqrt(std::abs(det_g(s, as_span(pts[0].x), as_span(pts[0].y))));
      const double bh = minimal_riemannian_density(s, as_span(pts[0].x), t0).sigma;
      const double ht = holmes_thompson_density(s, as_span(pts[0].x), t0).sigma;
      worst = std::max({worst, std::abs(bh - expect) / expect, std::abs(ht - expect) / expect,
                        std::abs(expect - std::sqrt(det)) / std::sqrt(det)});
    }
  }
  return {worst <= 1e-7, worst, 1e-7, "max relative error, n = 2..4, 3 metrics each"};
}

// 5. det g^{t,+} = |det g^t| by LU and by the matrix lemma.
Outcome determinant_identity() {
  const std::vector<std::string> names = {"minkowski4", "riemannian-diag", "berwald-moor", "bogoslovsky-toy",
                                          "linearized-quartic"};
  std::mt19937_64 rng(505);
  double worst = 0.0;
  int draws = 0;
  for (const auto& name : names) {
    const CatalogEntry e = builtin(name);
    for (const auto& p : sample_points(e.spec, 40, rng, SampleFilter::Timelike, e.reference_point)) {
      const OsculatingPair osc = osculating(e.spec, as_span(p.x), as_span(p.y));
      const double ref = std::abs(osc.g_t.det);
      worst = std::max({worst, std::abs(osc.g_t_plus.det - ref) / ref, std::abs(matrix_lemma_det(osc) - ref) / ref});
      ++draws;
    }
  }
  return {worst <= 1e-10 && draws == 200, worst, 1e-10, std::to_string(draws) + " draws, both routes"};
}

// 6. Sphere identity vs direct ball quadrature for homogeneous polynomials.
Outcome sphere_ball() {
  std::mt19937_64 rng(606);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const int k = (trial / 3) % 3;
    // random monomials of degree k
    std::vector<std::pair<double, std::vector<int>>> terms;
    for (int t = 0; t < 4; ++t) {
      std::vector<int> a(n, 0);
      for (int j = 0; j < k; ++j) ++a[rng() % n];
      terms.push_back({normal(rng), a});
    }
    const Integrand f = [&](std::span<const double> y) {
      double v = 0.0;
      for (const auto& [c, a] : terms) {
        double m = c;
        for (int i = 0; i < n; ++i) m *= std::pow(y[i], a[i]);
        v += m;
      }
      return v;
    };
    Eigen::MatrixXd R(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R(i, j) = normal(rng);
    const EllipsoidMap map =
        ellipsoid_map(MetricMatrix::from_entries(R * R.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n)));
    const double sphere = integrate_homogeneous(f, k, map, sphere_rule(n, 4)).value;
    const QuadratureRule ball = ball_rule(n, 4);
    double direct = 0.0, scale = 0.0;
    for (int i = 0; i < ball.size(); ++i) {
      const Eigen::VectorXd y = map.factor * ball.node(i);
      const double v = f(as_span(y));
      direct += ball.weights[i] * v;
      scale += ball.weights[i] * std::abs(v);
    }
    direct *= map.jac;
    scale *= map.jac;
    // Odd k integrates to zero, so the error is taken relative to int |f|.
    worst = std::max(worst, std::abs(sphere - direct) / std::max(std::abs(direct), scale));
  }
  return {worst <= 1e-8, worst, 1e-8, "50 integrands, relative to max(|int f|, int |f|)"};
}

// 7. Orientation field and HT lower bound over a 3^4 grid.
Outcome linearized_field() {
  const CatalogEntry e = builtin("linearized-quartic");
  const Box box = Box::parse("0,1;0,1;0,1;0,1");
  const BoxGrid grid = box_grid(box, 3);
  const OrientationField field = orientation_field(e.spec, grid.nodes, SolverOptions{});
  double worst_residual = 0.0;
  int bound_violations = 0, not_converged = 0;
  std::vector<double> slack(grid.nodes.size());
  parallel_for(static_cast<int>(grid.nodes.size()), 0, [&](int i) {
    const TimeOrientation& t0 = field.points[i];
    const VolumeDensity d = holmes_thompson_density(e.spec, as_span(grid.nodes[i]), t0);
    slack[i] = d.sigma - d.g_min * d.ellipsoid_volume / unit_ball_volume(4);
  });
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const TimeOrientation& t0 = field.points[i];
    worst_residual = std::max(worst_residual, t0.residual);
    if (t0.status == OrientationStatus::NotFound) ++not_converged;
    if (slack[i] < 0.0) ++bound_violations;
  }
  char note[160];
  std::snprintf(note, sizeof note, "epsilon %s, %d/81 unconverged, %d HT bound violations, smoothness %.3g rad",
                e.spec.metadata.count("epsilon") ? e.spec.metadata.at("epsilon").c_str() : "?", not_converged,
                bound_violations, field.smoothness);
  const bool ok = worst_residual <= 1e-6 && not_converged == 0 && bound_violations == 0;
  return {ok, worst_residual, 1e-6, note};
}

// 8. Berwald-Moor HT density from two orientations.
Outcome orientation_independence() {
  const MetricSpec s = builtin("berwald-moor").spec;
  const Eigen::VectorXd a = Eigen::Vector4d(1, 1, 1, 1);
  const Eigen::VectorXd b = Eigen::Vector4d(2, 1, 1, 1).normalized();
  const double sa = holmes_thompson_density(s, as_span(zeros(4)), orientation_at(s, as_span(zeros(4)), a)).sigma;
  const double sb = holmes_thompson_density(s, as_span(zeros(4)), orientation_at(s, as_span(zeros(4)), b)).sigma;
  const double rel = std::abs(sa - sb) / std::abs(sa);
  return {rel <= 1e-8, rel, 1e-8, "t = (1,1,1,1) vs (2,1,1,1)/|.|"};
}

// 9. Hessian and Cartan form against finite differences.
Outcome autodiff_fd() {
  double worst = 0.0;
  std::string where;
  for (const auto& name : builtin_names()) {
    const CatalogEntry e = builtin(name);
    std::mt19937_64 rng(909);
    const auto pts = sample_points(e.spec, 100, rng, SampleFilter::Smooth, e.reference_point);
    for (const auto& p : pts) {
      const double h = hessian_fd_error(e.spec, as_span(p.x), as_span(p.y));
      const double c = e.spec.dim >= 1 ? cartan_identity_error(e.spec, as_span(p.x), as_span(p.y)) : 0.0;
      if (std::max(h, c) > worst) {
        worst = std::max(h, c);
        where = name;
      }
    }
    if (pts.size() != 100) return {false, worst, 1e-4, name + ": too few smooth points"};
  }
  return {worst <= 1e-4, worst, 1e-4, "100 points per catalog metric, worst on " + where};
}

// 10. Classical densities of diag(4, 1).
Outcome classical() {
  const MetricSpec s = MetricSpec::from_source("diag41", 2, "4*y0^2 + y1^2");
  double worst = 0.0;
  long samples = 0;
  for (VolumeForm f : {VolumeForm::ClassicalBH, VolumeForm::ClassicalHT}) {
    const VolumeDensity d = classical_density(s, as_span(zeros(2)), f);
    worst = std::max(worst, std::abs(d.sigma - 2.0) / d.std_error);
    samples = d.samples;
  }
  return {worst <= 3.0 && samples >= 100000, worst, 3.0,
          "|sigma - 2| in standard errors, " + std::to_string(samples) + " samples each"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"Berwald-Moor determinant", 1, bm_determinant},
      {"Berwald-Moor volumes", 5, bm_volumes},
      {"Bogoslovsky toy", 5, bogoslovsky},
      {"Riemannian collapse", 10, riemannian_collapse},
      {"determinant identity", 5, determinant_identity},
      {"sphere/ball identity", 10, sphere_ball},
      {"linearized-perturbation field", 60, linearized_field},
      {"orientation independence", 5, orientation_independence},
      {"autodiff vs finite differences", 10, autodiff_fd},
      {"classical positive-definite forms", 10, classical},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.note = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < criteria[i].budget_s;
    const bool ok = o.passed && in_time;
    failed += !ok;
    std::printf("%s %2zu %-34s measured=%.3e tol=%.1e time=%.2fs/%gs%s  %s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name, o.measured, o.tolerance, secs, criteria[i].budget_s, in_time ? "" : " (over budget)",
                o.note.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
