#include <doctest.h>

#include "finslervol/action.hpp"
#include "finslervol/catalog.hpp"
#include "finslervol/error.hpp"
#include "helpers.hpp"

using namespace finslervol;

namespace {

ActionSpec make(const std::string& metric, const std::string& density, const std::string& box,
                Weighting w = Weighting::DetG, const std::vector<std::pair<std::string, std::string>>& fields = {}) {
  ActionSpec a;
  a.metric = builtin(metric).spec;
  a.density = parse_density(a.metric, density, fields);
  a.domain = Box::parse(box);
  a.weighting = w;
  return a;
}

const char* kUnit4 = "0,1;0,1;0,1;0,1";

}  // namespace

TEST_SUITE("action") {
  TEST_CASE("constant density on Berwald-Moor gives the HT volume") {
    const ActionResult r = evaluate_action(make("berwald-moor", "1", kUnit4), 2);
    CHECK(r.value == doctest::Approx(1.0 / 16).epsilon(1e-8));
    CHECK(r.cell_values.size() == 16);
  }

  TEST_CASE("constant density agrees with integrate_volume") {
    const MetricSpec s = builtin("linearized-quartic").spec;
    const Box box = Box::parse("0,0.5;0,0.5;0,0.5;0,0.5");
    const double v = integrate_volume(s, box, VolumeForm::HolmesThompson, 2).value;
    ActionSpec a;
    a.metric = s;
    a.density = parse_density(s, "1");
    a.domain = box;
    const double w = evaluate_action(a, 2).value;
    CHECK(std::abs(w - v) <= 1e-12 * std::abs(v));
  }

  TEST_CASE("fallback weighting on Bogoslovsky") {
    const ActionResult r = evaluate_action(make("bogoslovsky-toy", "1", "0,1;0,1", Weighting::DetGt0Fallback), 2);
    CHECK(r.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
  }

  TEST_CASE("Bogoslovsky with det g weighting is not prolongable") {
    try {
      evaluate_action(make("bogoslovsky-toy", "1", "0,1;0,1"), 1);
      FAIL("expected DetNotProlongable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DetNotProlongable);
    }
  }

  TEST_CASE("density L on Minkowski matches the homogeneous sphere route") {
    // int_B (y0^2 - |y_vec|^2) / Vol(B) = (1 - 3) / (n + 2) = -1/3
    const ActionResult r = evaluate_action(make("minkowski4", "L", kUnit4), 1);
    const MetricSpec s = builtin("minkowski4").spec;
    const EllipsoidMap id = ellipsoid_map(MetricMatrix::from_entries(Eigen::MatrixXd::Identity(4, 4)));
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    const Integrand f = [&](std::span<const double> y) { return s.lagrangian_at(as_span(x), y); };
    const double k2 = integrate_homogeneous(f, 2, id, sphere_rule(4, 8)).value / unit_ball_volume(4);
    CHECK(std::abs(r.value - k2) <= 1e-8);
    CHECK(r.value == doctest::Approx(-1.0 / 3).epsilon(1e-10));
  }

  TEST_CASE("action is linear in the density") {
    const double a = evaluate_action(make("linearized-quartic", "L", kUnit4), 1).value;
    const double b = evaluate_action(make("linearized-quartic", "x0*y1^2", kUnit4), 1).value;
    const double c = evaluate_action(make("linearized-quartic", "2*L - 3*x0*y1^2", kUnit4), 1).value;
    CHECK(std::abs(c - (2 * a - 3 * b)) <= 1e-10 * std::max(1.0, std::abs(c)));
  }

  TEST_CASE("closed-form fields") {
    const ActionResult r =
        evaluate_action(make("minkowski4", "phi*L", kUnit4, Weighting::DetG, {{"phi", "x0"}, {"psi", "phi^2"}}), 2);
    CHECK(r.value == doctest::Approx(-1.0 / 6).epsilon(1e-10));
    const ActionResult q =
        evaluate_action(make("minkowski4", "psi", kUnit4, Weighting::DetG, {{"phi", "x0"}, {"psi", "phi^2"}}), 2);
    CHECK(q.value == doctest::Approx(1.0 / 3).epsilon(1e-10));
  }

  TEST_CASE("density parse errors") {
    const MetricSpec s = builtin("minkowski4").spec;
    CHECK_THROWS_AS(parse_density(s, "q*L"), Error);
    CHECK_THROWS_AS(parse_density(s, "1", {{"2bad", "x0"}}), Error);
    CHECK_THROWS_AS(parse_density(s, "L +"), Error);
  }

  TEST_CASE("weighting names") {
    CHECK(parse_weighting("detg") == Weighting::DetG);
    CHECK(parse_weighting("fallback") == Weighting::DetGt0Fallback);
    CHECK(to_string(Weighting::DetG) == "detg");
    CHECK_THROWS_AS(parse_weighting("other"), Error);
  }
}
