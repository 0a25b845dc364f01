#include <doctest.h>

#include <random>

#include "finslervol/catalog.hpp"
#include "finslervol/error.hpp"
#include "finslervol/orientation.hpp"
#include "finslervol/validate.hpp"
#include "helpers.hpp"

using namespace finslervol;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("orientation") {
  TEST_CASE("osculating pair of Minkowski space") {
    const MetricSpec s = builtin("minkowski4").spec;
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(4), t = vec({2, 0, 0, 0});
    const OsculatingPair osc = osculating(s, as_span(x), as_span(t));
    CHECK((osc.g_t_plus.entries - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-15);
    CHECK((osc.t_prime - vec({1, 0, 0, 0})).norm() < 1e-15);
    CHECK(osc.g_t_plus.signature.positive_definite(4));
  }

  TEST_CASE("osculating pair determinant by two routes") {
    const MetricSpec s = builtin("linearized-quartic").spec;
    std::mt19937_64 rng(31);
    for (const auto& p : sample_points(s, 40, rng, SampleFilter::Timelike, Eigen::VectorXd::Zero(4))) {
      const OsculatingPair osc = osculating(s, as_span(p.x), as_span(p.y));
      CHECK(std::abs(osc.g_t_plus.det - matrix_lemma_det(osc)) <= 1e-10 * std::abs(osc.g_t_plus.det));
      CHECK(std::abs(osc.g_t_plus.det - std::abs(osc.g_t.det)) <= 1e-10 * std::abs(osc.g_t.det));
    }
  }

  TEST_CASE("osculating errors") {
    const MetricSpec m = builtin("minkowski4").spec;
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    CHECK(code_of([&] { osculating(m, as_span(x), as_span(vec({0, 1, 0, 0}))); }) == ErrorCode::NotTimelike);
    CHECK(code_of([&] { osculating(m, as_span(x), as_span(vec({1, 1, 0, 0}))); }) == ErrorCode::NotTimelike);
    const MetricSpec bm = builtin("berwald-moor").spec;
    CHECK(code_of([&] { osculating(bm, as_span(x), as_span(vec({1, 0, 1, 1}))); }) == ErrorCode::InadmissibleInput);
  }

  TEST_CASE("Bogoslovsky privileged direction") {
    const MetricSpec s = builtin("bogoslovsky-toy").spec;
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    const TimeOrientation t = find_privileged(s, as_span(x), SolverOptions{});
    CHECK(t.status == OrientationStatus::Converged);
    CHECK(direction_angle(t.t, vec({1, 0})) < 1e-6);
    CHECK(t.critical_value == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(t.residual <= 2e-8);
  }

  TEST_CASE("Bogoslovsky orientation field along a line") {
    const MetricSpec s = builtin("bogoslovsky-toy").spec;
    std::vector<Point> grid;
    for (int i = 0; i < 10; ++i) grid.push_back(vec({0.1 * i, -0.3 * i}));
    const OrientationField f = orientation_field(s, grid, SolverOptions{});
    REQUIRE(f.points.size() == 10);
    for (const auto& p : f.points) CHECK(direction_angle(p.t, vec({1, 0})) < 1e-6);
    CHECK(f.smoothness < 1e-6);
  }

  TEST_CASE("flat critical sets report multiple minima and keep the first seed") {
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    const std::vector<Eigen::VectorXd> seeds = {vec({1, 0, 0, 0})};
    const TimeOrientation m = find_privileged(builtin("minkowski4").spec, as_span(x), SolverOptions{}, seeds);
    CHECK(m.status == OrientationStatus::MultipleMinima);
    CHECK(direction_angle(m.t, vec({1, 0, 0, 0})) < 1e-12);
    CHECK(m.critical_value == doctest::Approx(1.0));

    const std::vector<Eigen::VectorXd> bm_seeds = {vec({1, 1, 1, 1})};
    const TimeOrientation b = find_privileged(builtin("berwald-moor").spec, as_span(x), SolverOptions{}, bm_seeds);
    CHECK(b.status == OrientationStatus::MultipleMinima);
    CHECK(direction_angle(b.t, vec({1, 1, 1, 1})) < 1e-12);
    CHECK(b.critical_value == doctest::Approx(1.0 / 256).epsilon(1e-12));
  }

  TEST_CASE("Minkowski orientation field is trivially smooth") {
    std::vector<Point> grid;
    for (int i = 0; i < 3; ++i) grid.push_back(vec({0.5 * i, 0, 0, 0}));
    const OrientationField f = orientation_field(builtin("minkowski4").spec, grid, SolverOptions{});
    CHECK(f.smoothness < 1e-12);
  }

  TEST_CASE("linearized-quartic minimum is a local minimum") {
    const MetricSpec s = builtin("linearized-quartic").spec;
    const Eigen::VectorXd x = vec({0.5, 0.5, 0.5, 0.5});
    const TimeOrientation t = find_privileged(s, as_span(x), SolverOptions{});
    REQUIRE(t.status != OrientationStatus::NotFound);
    CHECK(t.residual <= 4e-8);
    CHECK(t.min_hessian_eig >= -1e-8);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd d(4);
      for (int i = 0; i < 4; ++i) d[i] = normal(rng);
      Eigen::VectorXd u = t.t + 1e-3 * d;
      u.normalize();
      CHECK(std::abs(det_g(s, as_span(x), as_span(u))) >= t.critical_value * (1 - 1e-9));
    }
  }

  TEST_CASE("2C is the gradient of log|det g| and the search is scale invariant") {
    const MetricSpec s = builtin("bogoslovsky-toy").spec;
    const Eigen::VectorXd x = vec({0.2, 0.1});
    const Eigen::VectorXd y = vec({1.0, 0.4});
    const Eigen::VectorXd C = cartan_form(s, as_span(x), as_span(y));
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd a = y, b = y;
      a[i] += h;
      b[i] -= h;
      const double fd = (std::log(std::abs(det_g(s, as_span(x), as_span(a)))) -
                         std::log(std::abs(det_g(s, as_span(x), as_span(b))))) /
                        (2 * h);
      CHECK(std::abs(fd - 2 * C[i]) < 1e-6);
    }
    const Eigen::VectorXd y3 = 3.0 * y;
    CHECK(det_g(s, as_span(x), as_span(y3)) == doctest::Approx(det_g(s, as_span(x), as_span(y))).epsilon(1e-13));
  }

  TEST_CASE("positive definite metric has no timelike seed") {
    const MetricSpec e = builtin("euclidean-n").spec;
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    CHECK(code_of([&] { find_privileged(e, as_span(x), SolverOptions{}); }) == ErrorCode::NoTimelikeSeed);
  }

  TEST_CASE("direction angle") {
    CHECK(direction_angle(vec({1, 0}), vec({0, 1})) == doctest::Approx(M_PI / 2));
    CHECK(direction_angle(vec({1, 0}), vec({1, 1e-9})) == doctest::Approx(1e-9).epsilon(1e-6));
  }

  TEST_CASE("solver is deterministic for a fixed seed") {
    const MetricSpec s = builtin("linearized-quartic").spec;
    const Eigen::VectorXd x = vec({0.1, 0.9, 0.3, 0.2});
    const TimeOrientation a = find_privileged(s, as_span(x), SolverOptions{});
    const TimeOrientation b = find_privileged(s, as_span(x), SolverOptions{});
    CHECK(a.t == b.t);
    CHECK(a.critical_value == b.critical_value);
  }
}
