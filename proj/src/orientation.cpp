#include "finslervol/orientation.hpp"

#include "finslervol/autodiff.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace finslervol {

std::string_view to_string(OrientationStatus s) {
  switch (s) {
    case OrientationStatus::Converged: return "Converged";
    case OrientationStatus::MultipleMinima: return "MultipleMinima";
    case OrientationStatus::NotFound: return "NotFound";
  }
  return "?";
}

double direction_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ua = a.normalized();
  const Eigen::VectorXd ub = b.normalized();
  return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

OsculatingPair osculating(const MetricSpec& spec, std::span<const double> x, std::span<const double> t) {
  const CausalClass c = classify(spec, x, t);
  if (c == CausalClass::Inadmissible) {
    throw Error(ErrorCode::InadmissibleInput, "osculating point is not admissible");
  }
  if (c != CausalClass::Timelike) {
    throw Error(ErrorCode::NotTimelike, "osculating direction is " + std::string(to_string(c)));
  }
  OsculatingPair out;
  out.g_t = metric_at(spec, x, t);
  const int n = spec.dim;
  if (out.g_t.degenerate()) throw Error(ErrorCode::DegenerateMetric, "g(x, t) is degenerate");
  if (!out.g_t.signature.lorentzian(n)) {
    throw Error(ErrorCode::NotLorentzian, "g(x, t) does not have signature (+, -, ..., -)");
  }
  const double F = std::sqrt(spec.lagrangian_at(x, t));
  out.t_prime = Eigen::Map<const Eigen::VectorXd>(t.data(), n) / F;
  const Eigen::VectorXd lowered = out.g_t.entries * out.t_prime;
  out.g_t_plus = MetricMatrix::from_entries(2.0 * lowered * lowered.transpose() - out.g_t.entries);
  return out;
}

namespace {

constexpr double kMaxStepAngle = 0.25;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

struct Probe {
  bool valid = false;
  double L = 0.0;
  double log_f = 0.0;
};

// Objective log|det g| at a unit t, valid only inside the timelike cone
// where g is Lorentzian.
Probe probe(const MetricSpec& spec, std::span<const double> x, const Eigen::VectorXd& t) {
  Probe p;
  if (classify(spec, x, as_span(t)) != CausalClass::Timelike) return p;
  p.L = spec.lagrangian_at(x, as_span(t));
  const HessianResult h = hessian_y_unchecked(spec.lagrangian, x, as_span(t));
  if (!h.finite) return p;
  const MetricMatrix g = MetricMatrix::from_entries(0.5 * h.hess);
  if (!g.signature.lorentzian(spec.dim) || !std::isfinite(g.det) || g.det == 0.0) return p;
  p.log_f = std::log(std::abs(g.det));
  p.valid = std::isfinite(p.log_f);
  return p;
}

Eigen::VectorXd tangent(const Eigen::VectorXd& v, const Eigen::VectorXd& t) { return v - v.dot(t) * t; }

enum class RunOutcome { Converged, ConeAbort, Stalled };

struct Run {
  RunOutcome outcome = RunOutcome::Stalled;
  Eigen::VectorXd t;
  double log_f = 0.0;
  double residual = std::numeric_limits<double>::infinity();
};

Run descend(const MetricSpec& spec, std::span<const double> x, Eigen::VectorXd t, const SolverOptions& opts) {
  const double tol = opts.residual_tol(spec.dim);
  Run run;
  t.normalize();
  Probe cur = probe(spec, x, t);
  if (!cur.valid) return run;

  Eigen::VectorXd prev_t, prev_grad;
  double alpha = 0.0;
  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    const Eigen::VectorXd C = cartan_form(spec, x, as_span(t));
    run.t = t;
    run.log_f = cur.log_f;
    run.residual = C.norm();
    if (run.residual <= tol) {
      run.outcome = RunOutcome::Converged;
      return run;
    }
    if (iter == opts.max_iters) break;

    // grad log|det g| = 2C; C.t = 0 by homogeneity, project anyway.
    const Eigen::VectorXd grad = tangent(2.0 * C, t);
    const double gnorm = grad.norm();
    if (prev_grad.size() > 0) {
      const Eigen::VectorXd s = t - prev_t;
      const double sy = s.dot(grad - prev_grad);
      alpha = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * alpha;
    } else {
      alpha = 0.1 / gnorm;
    }
    alpha = std::min(alpha, kMaxStepAngle / gnorm);

    bool accepted = false;
    Eigen::VectorXd trial;
    Probe next;
    for (int k = 0; k < kMaxBacktracks; ++k, alpha *= 0.5) {
      trial = (t - alpha * grad).normalized();
      next = probe(spec, x, trial);
      if (!next.valid) continue;
      if (next.log_f <= cur.log_f - kArmijo * alpha * gnorm * gnorm) {
        accepted = true;
        break;
      }
      // Near the minimum the decrease drowns in rounding; accept a step that
      // does not raise the objective beyond noise and shrinks the residual.
      const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.log_f));
      if (next.log_f <= cur.log_f + noise && cartan_form(spec, x, as_span(trial)).norm() < run.residual) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (next.L < opts.eps_cone * trial.squaredNorm()) {
      run.outcome = RunOutcome::ConeAbort;
      return run;
    }
    prev_t = t;
    prev_grad = grad;
    t = trial;
    cur = next;
  }
  run.outcome = RunOutcome::Stalled;
  return run;
}

bool valid_seed(const MetricSpec& spec, std::span<const double> x, const Eigen::VectorXd& t,
                const SolverOptions& opts) {
  const Probe p = probe(spec, x, t);
  return p.valid && p.L >= opts.eps_cone * t.squaredNorm();
}

}  // namespace

Eigen::MatrixXd projected_hessian(const MetricSpec& spec, std::span<const double> x, const Eigen::VectorXd& t,
                                  double h) {
  const int n = spec.dim;
  const Eigen::VectorXd u = t.normalized();
  const double f = std::abs(det_g(spec, x, as_span(u)));
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd tp = u, tm = u;
    tp[j] += h;
    tm[j] -= h;
    J.col(j) = (cartan_form(spec, x, as_span(tp)) - cartan_form(spec, x, as_span(tm))) / h;  // d(2C)/dt
  }
  // At a critical point the sphere Hessian of f is f * P (d 2C) P.
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - u * u.transpose();
  const Eigen::MatrixXd H = f * P * J * P;
  return 0.5 * (H + H.transpose());
}

TimeOrientation find_privileged(const MetricSpec& spec, std::span<const double> x, const SolverOptions& opts,
                                std::span<const Eigen::VectorXd> extra_seeds) {
  const int n = spec.dim;
  if (static_cast<int>(x.size()) != n) throw Error(ErrorCode::InvalidArgument, "point dimension mismatch");
  if (n < 2) throw Error(ErrorCode::UnsupportedDimension, "time orientation needs n >= 2");

  std::vector<Eigen::VectorXd> seeds;
  for (const auto& s : extra_seeds) {
    if (s.size() == n && s.norm() > 0.0 && valid_seed(spec, x, s.normalized(), opts)) seeds.push_back(s.normalized());
  }
  std::mt19937_64 rng(opts.rng_seed);
  std::normal_distribution<double> normal;
  int random_found = 0;
  for (int attempt = 0; attempt < opts.max_seed_attempts && random_found < opts.seeds; ++attempt) {
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = normal(rng);
    if (s.norm() == 0.0) continue;
    s.normalize();
    if (!valid_seed(spec, x, s, opts)) continue;
    seeds.push_back(s);
    ++random_found;
  }
  if (seeds.empty()) {
    throw Error(ErrorCode::NoTimelikeSeed, "no timelike Lorentzian seed found after " +
                                               std::to_string(opts.max_seed_attempts) + " samples");
  }

  struct Candidate {
    Run run;
    double min_eig;
  };
  std::vector<Candidate> minima;
  int cone_aborts = 0;
  int saddles = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  for (const auto& seed : seeds) {
    Run r = descend(spec, x, seed, opts);
    best_residual = std::min(best_residual, r.residual);
    if (r.outcome == RunOutcome::ConeAbort) ++cone_aborts;
    if (r.outcome != RunOutcome::Converged) continue;
    const Eigen::MatrixXd H = projected_hessian(spec, x, r.t);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues();
    // One eigenvalue belongs to the radial direction and vanishes identically.
    double min_eig = std::numeric_limits<double>::infinity();
    Eigen::Index zero_at = 0;
    ev.cwiseAbs().minCoeff(&zero_at);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (i != zero_at) min_eig = std::min(min_eig, ev[i]);
    if (ev.size() == 1) min_eig = 0.0;
    if (min_eig < opts.hessian_floor) {
      ++saddles;
      continue;
    }
    minima.push_back({std::move(r), min_eig});
  }
  if (minima.empty()) {
    throw Error(ErrorCode::NoConvergence,
                std::to_string(seeds.size()) + " runs, none reached a local minimum (" + std::to_string(cone_aborts) +
                    " reached the light cone, " + std::to_string(saddles) + " saddles, best residual " +
                    std::to_string(best_residual) + ")");
  }

  double f_min = std::numeric_limits<double>::infinity();
  for (const auto& c : minima) f_min = std::min(f_min, std::exp(c.run.log_f));
  const Candidate* chosen = nullptr;
  bool distinct = false;
  for (const auto& c : minima) {
    if (std::exp(c.run.log_f) > f_min + opts.tol_value_rel * f_min) continue;
    if (!chosen) {
      chosen = &c;
    } else if (direction_angle(c.run.t, chosen->run.t) > opts.tol_angle) {
      distinct = true;
    }
  }

  TimeOrientation out;
  out.x = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  out.t = chosen->run.t;
  out.critical_value = std::exp(chosen->run.log_f);
  out.residual = chosen->run.residual;
  out.min_hessian_eig = chosen->min_eig;
  out.status = distinct ? OrientationStatus::MultipleMinima : OrientationStatus::Converged;
  out.converged_runs = static_cast<int>(minima.size());
  out.cone_aborts = cone_aborts;
  return out;
}

OrientationField orientation_field(const MetricSpec& spec, const std::vector<Point>& grid, const SolverOptions& opts) {
  OrientationField field;
  field.points.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<Eigen::VectorXd> extra;
    std::size_t nearest = 0;
    if (i > 0) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < i; ++j) {
        const double d = (grid[j] - grid[i]).squaredNorm();
        if (d < best) {
          best = d;
          nearest = j;
        }
      }
      extra.push_back(field.points[nearest].t);
    }
    SolverOptions local = opts;
    local.rng_seed = opts.rng_seed + 0x9e3779b97f4a7c15ULL * i;
    try {
      field.points.push_back(find_privileged(spec, as_span(grid[i]), local, extra));
    } catch (const Error& e) {
      throw Error(e.code(), "grid point " + std::to_string(i) + ": " + e.what());
    }
    if (i > 0) field.smoothness = std::max(field.smoothness, direction_angle(field.points[i].t, field.points[nearest].t));
  }
  return field;
}

}  // namespace finslervol
