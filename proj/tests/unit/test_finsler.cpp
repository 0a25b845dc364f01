#include <doctest.h>

#include <random>

#include "finslervol/autodiff.hpp"
#include "finslervol/catalog.hpp"
#include "finslervol/finsler.hpp"
#include "finslervol/validate.hpp"
#include "helpers.hpp"

using namespace finslervol;

namespace {

const Eigen::VectorXd kZero4 = Eigen::VectorXd::Zero(4);
const Eigen::VectorXd kZero2 = Eigen::VectorXd::Zero(2);

}  // namespace

TEST_SUITE("finsler_core") {
  TEST_CASE("Minkowski metric") {
    const MetricSpec s = builtin("minkowski4").spec;
    const Eigen::VectorXd y = vec({3, 1, -2, 0.5});
    const MetricMatrix g = metric_at(s, as_span(kZero4), as_span(y));
    CHECK(g.signature == Signature{1, 3, 0});
    CHECK(g.det == -1.0);
    CHECK(g.entries(0, 0) == 1.0);
    CHECK(g.entries(2, 2) == -1.0);
  }

  TEST_CASE("Berwald-Moor determinant at the diagonal") {
    const MetricSpec s = builtin("berwald-moor").spec;
    CHECK(metric_at(s, as_span(kZero4), as_span(vec({1, 1, 1, 1}))).det == doctest::Approx(-1.0 / 256).epsilon(1e-14));
  }

  TEST_CASE("Bogoslovsky determinant formula") {
    const MetricSpec s = builtin("bogoslovsky-toy").spec;
    CHECK(det_g(s, as_span(kZero2), as_span(vec({1, 0}))) == doctest::Approx(-0.5).epsilon(1e-14));
    std::mt19937_64 rng(2);
    for (const auto& p : sample_points(s, 50, rng, SampleFilter::Admissible, kZero2)) {
      const double y0 = p.y[0], y1 = p.y[1];
      const double expect = -(2 * y0 * y0 + y1 * y1) / (4 * std::abs(y0 * y0 - y1 * y1));
      CHECK(rel_err(det_g(s, as_span(p.x), as_span(p.y)), expect) < 1e-10);
    }
  }

  TEST_CASE("inadmissible input") {
    const MetricSpec s = builtin("berwald-moor").spec;
    try {
      metric_at(s, as_span(kZero4), as_span(vec({1, 0, 1, 1})));
      FAIL("expected InadmissibleInput");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InadmissibleInput);
    }
    CHECK(std::isnan(det_g(s, as_span(kZero4), as_span(vec({0, 0, 0, 0})))));
  }

  TEST_CASE("degenerate metric is reported, not thrown") {
    const MetricSpec s = MetricSpec::from_source("null", 2, "y0^2");
    const MetricMatrix g = metric_at(s, as_span(kZero2), as_span(vec({1, 1})));
    CHECK(g.degenerate());
    CHECK(g.signature == Signature{1, 0, 1});
    CHECK_THROWS_AS(cartan_form(s, as_span(kZero2), as_span(vec({1, 1}))), Error);
  }

  TEST_CASE("norm F") {
    const MetricSpec m = builtin("minkowski4").spec;
    CHECK(norm_F(m, as_span(kZero4), as_span(vec({2, 0, 0, 0}))) == 2.0);
    CHECK(norm_F(m, as_span(kZero4), as_span(vec({1, 1, 0, 0}))) == 0.0);
    const MetricSpec bm = builtin("berwald-moor").spec;
    CHECK(norm_F(bm, as_span(kZero4), as_span(vec({16, 1, 1, 1}))) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(norm_F(bm, as_span(kZero4), as_span(vec({32, 2, 2, 2}))) == doctest::Approx(4.0).epsilon(1e-15));
  }

  TEST_CASE("causal classes") {
    const MetricSpec m = builtin("minkowski4").spec;
    CHECK(classify(m, as_span(kZero4), as_span(vec({1, 0, 0, 0}))) == CausalClass::Timelike);
    CHECK(classify(m, as_span(kZero4), as_span(vec({1, 1, 0, 0}))) == CausalClass::Lightlike);
    CHECK(classify(m, as_span(kZero4), as_span(vec({0, 1, 0, 0}))) == CausalClass::Spacelike);
    CHECK(classify(m, as_span(kZero4), as_span(vec({1e7, 1e7 + 1e-6, 0, 0}))) == CausalClass::Lightlike);
    const MetricSpec b = builtin("bogoslovsky-toy").spec;
    CHECK(classify(b, as_span(kZero2), as_span(vec({0, 1}))) == CausalClass::Lightlike);
    CHECK(classify(b, as_span(kZero2), as_span(vec({1, 1}))) == CausalClass::Inadmissible);
    CHECK(classify(b, as_span(kZero2), as_span(vec({0, 0}))) == CausalClass::Inadmissible);
  }

  TEST_CASE("Cartan form vanishes for Riemannian and Berwald-Moor metrics") {
    const MetricSpec r = builtin("riemannian-diag").spec;
    CHECK(cartan_form(r, as_span(vec({0.4, 0.2, 0, 0})), as_span(vec({2, 0.1, 0.3, 0.4}))).norm() == 0.0);
    const MetricSpec bm = builtin("berwald-moor").spec;
    std::mt19937_64 rng(8);
    for (const auto& p : sample_points(bm, 30, rng, SampleFilter::Smooth, kZero4))
      CHECK(cartan_form(bm, as_span(p.x), as_span(p.y)).norm() < 1e-12 / p.y.norm() * 10);
    const MetricSpec b = builtin("bogoslovsky-toy").spec;
    CHECK(cartan_form(b, as_span(kZero2), as_span(vec({1, 0}))).norm() < 1e-15);
  }

  TEST_CASE("Cartan identity and 2C = grad log|det g|") {
    const MetricSpec s = builtin("linearized-quartic").spec;
    std::mt19937_64 rng(4);
    for (const auto& p : sample_points(s, 20, rng, SampleFilter::Timelike, kZero4)) {
      CHECK(cartan_identity_error(s, as_span(p.x), as_span(p.y)) < 1e-6);
      const Eigen::VectorXd C = cartan_form(s, as_span(p.x), as_span(p.y));
      const double h = 1e-6;
      Eigen::VectorXd fd(4);
      for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd a = p.y, b = p.y;
        a[i] += h;
        b[i] -= h;
        fd[i] = (std::log(std::abs(det_g(s, as_span(p.x), as_span(a)))) -
                 std::log(std::abs(det_g(s, as_span(p.x), as_span(b))))) /
                (2 * h);
      }
      CHECK((fd - 2.0 * C).norm() < 1e-6);
    }
  }

  TEST_CASE("metric is 0-homogeneous and satisfies Euler's identity") {
    const MetricSpec s = builtin("berwald-moor").spec;
    std::mt19937_64 rng(9);
    for (const auto& p : sample_points(s, 30, rng, SampleFilter::Smooth, kZero4)) {
      const MetricMatrix g = metric_at(s, as_span(p.x), as_span(p.y));
      for (double a : {0.5, 2.0, 10.0}) {
        const Eigen::VectorXd ay = a * p.y;
        const MetricMatrix ga = metric_at(s, as_span(p.x), as_span(ay));
        CHECK((ga.entries - g.entries).cwiseAbs().maxCoeff() <= 1e-10 * g.entries.cwiseAbs().maxCoeff());
      }
      CHECK(rel_err(p.y.dot(g.entries * p.y), s.lagrangian_at(as_span(p.x), as_span(p.y))) < 1e-10);
    }
  }

  TEST_CASE("covariance under a linear change of basis") {
    const MetricSpec s = builtin("linearized-quartic").spec;
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal;
    for (const auto& p : sample_points(s, 20, rng, SampleFilter::Smooth, kZero4)) {
      Eigen::MatrixXd S(4, 4);
      do {
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) S(i, j) = (i == j) + 0.4 * normal(rng);
      } while (S.determinant() < 0.2);
      std::vector<double> rows;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) rows.push_back(S(i, j));
      MetricSpec moved = s;
      moved.lagrangian = substitute_linear_y(s.lagrangian, rows, 4);
      const Eigen::VectorXd yt = S.inverse() * p.y;
      const MetricMatrix g = metric_at(s, as_span(p.x), as_span(p.y));
      const MetricMatrix gt = metric_at(moved, as_span(p.x), as_span(yt));
      const Eigen::MatrixXd expect = S.transpose() * g.entries * S;
      CHECK((gt.entries - expect).cwiseAbs().maxCoeff() <= 1e-9 * expect.cwiseAbs().maxCoeff());
      CHECK(rel_err(gt.det, S.determinant() * S.determinant() * g.det) < 1e-9);
    }
  }

  TEST_CASE("Lorentzian signature on timelike directions of Lorentzian catalog metrics") {
    for (const char* name : {"minkowski4", "riemannian-diag", "berwald-moor", "bogoslovsky-toy", "linearized-quartic"}) {
      const CatalogEntry e = builtin(name);
      std::mt19937_64 rng(1);
      for (const auto& p : sample_points(e.spec, 50, rng, SampleFilter::Timelike, e.reference_point)) {
        CAPTURE(name);
        CHECK(metric_at(e.spec, as_span(p.x), as_span(p.y)).signature.lorentzian(e.spec.dim));
      }
    }
  }

  TEST_CASE("LU determinant agrees with the eigenvalue product") {
    const MetricSpec s = builtin("linearized-quartic").spec;
    std::mt19937_64 rng(6);
    for (const auto& p : sample_points(s, 20, rng, SampleFilter::Smooth, kZero4)) {
      const MetricMatrix g = metric_at(s, as_span(p.x), as_span(p.y));
      const double prod = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g.entries).eigenvalues().prod();
      CHECK(rel_err(g.det, prod) < 1e-12);
    }
  }
}
