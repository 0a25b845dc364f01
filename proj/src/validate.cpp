#include "finslervol/validate.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "finslervol/autodiff.hpp"

namespace finslervol {

std::vector<SamplePoint> sample_points(const MetricSpec& spec, int count, std::mt19937_64& rng, SampleFilter filter,
                                       const Point& center) {
  const int n = spec.dim;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  std::vector<SamplePoint> out;
  const long max_attempts = 1000L * std::max(count, 1);
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
    SamplePoint p;
    p.x = center;
    for (int i = 0; i < n; ++i) p.x[i] += unif(rng);
    p.y.resize(n);
    for (int i = 0; i < n; ++i) p.y[i] = normal(rng);
    const auto xs = as_span(p.x);
    const auto ys = as_span(p.y);
    if (!spec.is_admissible(xs, ys)) continue;
    const double L = spec.lagrangian_at(xs, ys);
    if (!std::isfinite(L)) continue;
    const double r2 = p.y.squaredNorm();
    if (filter == SampleFilter::Timelike && L < 0.05 * r2) continue;
    if (filter == SampleFilter::Smooth) {
      if (std::abs(L) < 0.05 * r2) continue;
      const HessianResult h = hessian_y_unchecked(spec.lagrangian, xs, ys);
      if (!h.finite) continue;
      const double scale = h.hess.cwiseAbs().maxCoeff();
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        for (double s : {-1.0, 1.0}) {
          Eigen::VectorXd q = p.y;
          q[i] += s * 0.02 * std::sqrt(r2);
          if (!spec.is_admissible(xs, as_span(q))) {
            ok = false;
            break;
          }
          const HessianResult hq = hessian_y_unchecked(spec.lagrangian, xs, as_span(q));
          ok = ok && hq.finite && (hq.hess - h.hess).cwiseAbs().maxCoeff() <= 0.25 * scale;
        }
      }
      if (!ok) continue;
    }
    out.push_back(std::move(p));
  }
  return out;
}

double hessian_fd_error(const MetricSpec& spec, std::span<const double> x, std::span<const double> y, double h) {
  const int n = spec.dim;
  const HessianResult ad = hessian_y(spec.lagrangian, x, y);
  const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  auto L = [&](const Eigen::VectorXd& v) { return spec.lagrangian_at(x, as_span(v)); };
  auto second_difference = [&](double step) {
    Eigen::MatrixXd fd(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Eigen::VectorXd pp = y0, pm = y0, mp = y0, mm = y0;
        pp[i] += step, pp[j] += step;
        pm[i] += step, pm[j] -= step;
        mp[i] -= step, mp[j] += step;
        mm[i] -= step, mm[j] -= step;
        fd(i, j) = fd(j, i) = (L(pp) - L(pm) - L(mp) + L(mm)) / (4.0 * step * step);
      }
    }
    return fd;
  };
  // Richardson extrapolation removes the O(step^2) term.
  const double step = h * y0.norm();
  const Eigen::MatrixXd fd = (4.0 * second_difference(0.5 * step) - second_difference(step)) / 3.0;
  const double scale = ad.hess.cwiseAbs().maxCoeff();
  return (fd - ad.hess).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

double matrix_lemma_det(const OsculatingPair& osc) {
  const int n = osc.g_t.dim();
  const Eigen::MatrixXd ginv = osc.g_t.entries.inverse();
  const Eigen::VectorXd lowered = osc.g_t.entries * osc.t_prime;
  const double q = lowered.dot(ginv * lowered);
  return (n % 2 == 0 ? 1.0 : -1.0) * (1.0 - 2.0 * q) * osc.g_t.det;
}

bool ValidationReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string ValidationReport::table() const {
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "check"
     << "  result  measured     tolerance    detail\n";
  for (const auto& c : checks) {
    os << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << std::setw(6)
       << (c.passed ? "PASS" : "FAIL") << "  " << std::scientific << std::setprecision(3) << std::setw(11)
       << c.measured << "  " << std::setw(11) << c.tolerance << "  " << c.detail << "\n";
  }
  return os.str();
}

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

class Checker {
 public:
  explicit Checker(ValidationReport& r) : report_(r) {}

  // Runs body, which returns the worst measured error; a thrown Error fails
  // the check with its message.
  template <class F>
  void run(std::string name, double tol, F&& body, std::string detail = {}) {
    CheckResult c;
    c.name = std::move(name);
    c.tolerance = tol;
    try {
      c.measured = body();
      c.passed = c.measured <= tol;
      c.detail = std::move(detail);
    } catch (const Error& e) {
      c.passed = false;
      c.measured = std::numeric_limits<double>::quiet_NaN();
      c.detail = std::string(to_string(e.code())) + ": " + e.what();
    }
    report_.checks.push_back(std::move(c));
  }

 private:
  ValidationReport& report_;
};

}  // namespace

ValidationReport validate(const MetricSpec& spec, const ValidationOptions& opts, const CatalogEntry* truth) {
  ValidationReport report;
  report.metric = spec.name;
  Checker check(report);
  const int n = spec.dim;
  const Point center = truth ? truth->reference_point : Point::Zero(n);
  std::mt19937_64 rng(opts.seed);
  const std::vector<SamplePoint> pts = sample_points(spec, opts.samples, rng, SampleFilter::Admissible, center);
  const std::vector<SamplePoint> smooth = sample_points(spec, opts.samples, rng, SampleFilter::Smooth, center);

  check.run("admissible samples found", 0.0, [&] {
    if (pts.empty()) throw Error(ErrorCode::InadmissibleInput, "no admissible direction among random samples");
    return 0.0;
  });
  if (pts.empty()) return report;

  check.run("lagrangian 2-homogeneous", 1e-10, [&] {
    double worst = 0.0;
    for (const auto& p : pts) {
      const double L = spec.lagrangian_at(as_span(p.x), as_span(p.y));
      for (double a : {0.5, 2.0, 3.0}) {
        const Eigen::VectorXd ay = a * p.y;
        const double err = std::abs(spec.lagrangian_at(as_span(p.x), as_span(ay)) - a * a * L);
        worst = std::max(worst, err / (std::abs(a * a * L) + 1e-2));
      }
    }
    return worst;
  });

  check.run("admissible set conic", 0.0, [&] {
    double failures = 0.0;
    for (const auto& p : pts)
      for (double a : {0.5, 2.0, 3.0}) {
        const Eigen::VectorXd ay = a * p.y;
        if (!spec.is_admissible(as_span(p.x), as_span(ay))) failures += 1.0;
      }
    return failures;
  });

  check.run("metric 0-homogeneous", 1e-10, [&] {
    double worst = 0.0;
    for (const auto& p : smooth) {
      const MetricMatrix g = metric_at(spec, as_span(p.x), as_span(p.y));
      const double scale = g.entries.cwiseAbs().maxCoeff();
      for (double a : {0.5, 2.0, 10.0}) {
        const Eigen::VectorXd ay = a * p.y;
        const MetricMatrix ga = metric_at(spec, as_span(p.x), as_span(ay));
        worst = std::max(worst, (ga.entries - g.entries).cwiseAbs().maxCoeff() / scale);
      }
    }
    return worst;
  });

  check.run("g(y, y) = L", 1e-10, [&] {
    double worst = 0.0;
    for (const auto& p : smooth) {
      const MetricMatrix g = metric_at(spec, as_span(p.x), as_span(p.y));
      const double L = spec.lagrangian_at(as_span(p.x), as_span(p.y));
      worst = std::max(worst, std::abs(p.y.dot(g.entries * p.y) - L) / std::max(std::abs(L), 1e-300));
    }
    return worst;
  });

  bool lorentzian = truth ? truth->lorentzian : false;
  if (!truth) {
    for (const auto& p : smooth) {
      const MetricMatrix g = metric_at(spec, as_span(p.x), as_span(p.y));
      if (!g.signature.positive_definite(n)) lorentzian = true;
    }
  }

  // Lorentzian signature is required on the timelike cone only; spacelike
  // directions may carry another one (Berwald-Moor has (3, 1) there).
  check.run(lorentzian ? "signature (1, n-1, 0) when timelike" : "signature (n, 0, 0)", 0.0, [&] {
    double bad = 0.0;
    for (const auto& p : smooth) {
      if (lorentzian && classify(spec, as_span(p.x), as_span(p.y)) != CausalClass::Timelike) continue;
      const Signature s = metric_at(spec, as_span(p.x), as_span(p.y)).signature;
      if (lorentzian ? !s.lorentzian(n) : !s.positive_definite(n)) bad += 1.0;
    }
    return bad;
  }, "count of sampled points with another signature");

  check.run("hessian vs finite differences", 1e-4, [&] {
    double worst = 0.0;
    for (const auto& p : smooth) worst = std::max(worst, hessian_fd_error(spec, as_span(p.x), as_span(p.y)));
    return worst;
  });

  check.run("cartan form vs d log sqrt|det g|", 1e-4, [&] {
    double worst = 0.0;
    for (const auto& p : smooth) worst = std::max(worst, cartan_identity_error(spec, as_span(p.x), as_span(p.y)));
    return worst;
  });

  check.run("cartan form annihilates y", 1e-9, [&] {
    double worst = 0.0;
    for (const auto& p : smooth) {
      const Eigen::VectorXd C = cartan_form(spec, as_span(p.x), as_span(p.y));
      worst = std::max(worst, std::abs(C.dot(p.y)) / (1.0 + C.norm() * p.y.norm()));
    }
    return worst;
  });

  check.run("covariance under y -> S y", 1e-9, [&] {
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(smooth.size(), 20); ++k) {
      Eigen::MatrixXd S(n, n);
      do {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) S(i, j) = (i == j ? 1.0 : 0.0) + 0.3 * normal(rng);
      } while (S.determinant() <= 0.1);
      std::vector<double> rows(static_cast<std::size_t>(n * n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rows[static_cast<std::size_t>(i * n + j)] = S(i, j);
      MetricSpec moved = spec;
      moved.lagrangian = substitute_linear_y(spec.lagrangian, rows, n);
      moved.admissible = substitute_linear_y(spec.admissible, rows, n);
      const auto& p = smooth[k];
      const Eigen::VectorXd yt = S.partialPivLu().solve(p.y);
      const MetricMatrix g = metric_at(spec, as_span(p.x), as_span(p.y));
      const MetricMatrix gt = metric_at(moved, as_span(p.x), as_span(yt));
      const Eigen::MatrixXd expect = S.transpose() * g.entries * S;
      worst = std::max(worst, (gt.entries - expect).cwiseAbs().maxCoeff() / expect.cwiseAbs().maxCoeff());
      worst = std::max(worst, rel(gt.det, S.determinant() * S.determinant() * g.det));
    }
    return worst;
  });

  if (truth && truth->det_g) {
    check.run("det g matches closed form", 1e-10, [&] {
      double worst = 0.0;
      for (const auto& p : smooth) {
        const double d = det_g(spec, as_span(center), as_span(p.y));
        if (std::isfinite(d)) worst = std::max(worst, std::abs(d - *truth->det_g));
      }
      return worst;
    }, "absolute error at the reference point");
  }

  const Point& x0 = center;
  if (lorentzian) {
    const std::vector<SamplePoint> timelike =
        sample_points(spec, std::min(opts.samples, 50), rng, SampleFilter::Timelike, center);
    check.run("det g+ = |det g^t| (two routes)", 1e-10, [&] {
      if (timelike.empty()) throw Error(ErrorCode::NoTimelikeSeed, "no timelike samples");
      double worst = 0.0;
      for (const auto& p : timelike) {
        const OsculatingPair osc = osculating(spec, as_span(p.x), as_span(p.y));
        const double target = std::abs(osc.g_t.det);
        worst = std::max(worst, rel(osc.g_t_plus.det, target));
        worst = std::max(worst, rel(matrix_lemma_det(osc), target));
      }
      return worst;
    });

    std::optional<TimeOrientation> t0;
    check.run("privileged orientation converges", opts.solver.residual_tol(n), [&] {
      t0 = find_privileged(spec, as_span(x0), opts.solver);
      return t0->residual;
    }, "Cartan residual at the reference point");

    if (t0 && truth && truth->privileged_direction && t0->status == OrientationStatus::Converged) {
      check.run("privileged direction", 1e-6, [&] { return direction_angle(t0->t, *truth->privileged_direction); },
                "angle to the known direction");
    }
    if (t0 && truth && truth->det_g_t0) {
      check.run("|det g^t0|", 1e-8, [&] { return rel(t0->critical_value, *truth->det_g_t0); });
    }
    if (t0) {
      check.run("minimal Riemannian density", 1e-8, [&] {
        const VolumeDensity d = minimal_riemannian_density(spec, as_span(x0), *t0);
        return truth && truth->sigma_bh ? rel(d.sigma, *truth->sigma_bh) : 0.0;
      }, truth && truth->sigma_bh ? "relative to the known value" : "two routes agree");

      if (truth && !truth->ht_prolongable) {
        check.run("HT reports det g not prolongable", 0.0, [&] {
          try {
            holmes_thompson_density(spec, as_span(x0), *t0, opts.volume);
          } catch (const Error& e) {
            if (e.code() == ErrorCode::DetNotProlongable) return 0.0;
            throw;
          }
          return 1.0;
        });
      } else {
        check.run("Holmes-Thompson density", 1e-6, [&] {
          const VolumeDensity d = holmes_thompson_density(spec, as_span(x0), *t0, opts.volume);
          return truth && truth->sigma_ht ? rel(d.sigma, *truth->sigma_ht) : 0.0;
        }, truth && truth->sigma_ht ? "relative to the known value" : "lower bound holds");
      }
    }
  } else {
    for (VolumeForm form : {VolumeForm::ClassicalBH, VolumeForm::ClassicalHT}) {
      const std::optional<double> expect =
          !truth ? std::nullopt : form == VolumeForm::ClassicalBH ? truth->classical_bh : truth->classical_ht;
      const bool known = expect.has_value();
      const double target = expect.value_or(0.0);
      std::string detail = known ? "in units of the standard error" : "density is positive";
      check.run(std::string(to_string(form)) + " density", 3.0, [&] {
        const VolumeDensity d = classical_density(spec, as_span(x0), form, opts.volume);
        if (!(d.sigma > 0.0)) return std::numeric_limits<double>::infinity();
        return known ? std::abs(d.sigma - target) / std::max(d.std_error, 1e-15) : 0.0;
      }, detail);
    }
  }
  return report;
}

}  // namespace finslervol
