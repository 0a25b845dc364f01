#include "finslervol/volume.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include <boost/random/sobol.hpp>

namespace finslervol {

std::string_view to_string(VolumeForm f) {
  switch (f) {
    case VolumeForm::MinimalRiemannian: return "bh";
    case VolumeForm::HolmesThompson: return "ht";
    case VolumeForm::ClassicalBH: return "classical-bh";
    case VolumeForm::ClassicalHT: return "classical-ht";
  }
  return "?";
}

VolumeForm parse_volume_form(std::string_view s) {
  for (VolumeForm f : {VolumeForm::MinimalRiemannian, VolumeForm::HolmesThompson, VolumeForm::ClassicalBH,
                       VolumeForm::ClassicalHT}) {
    if (s == to_string(f)) return f;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown volume form '" + std::string(s) + "'; expected bh, ht, classical-bh or classical-ht");
}

QuadratureOrders VolumeOptions::resolved_orders(int n) const {
  const QuadratureOrders d = QuadratureOrders::defaults(n);
  return {orders.radial > 0 ? orders.radial : d.radial, orders.angular > 0 ? orders.angular : d.angular};
}

TimeOrientation orientation_at(const MetricSpec& spec, std::span<const double> x, const Eigen::VectorXd& t,
                               const SolverOptions& opts) {
  osculating(spec, x, as_span(t));  // rejects non-timelike and non-Lorentzian t
  TimeOrientation out;
  out.x = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  out.t = t.normalized();
  out.critical_value = std::abs(det_g(spec, x, as_span(out.t)));
  out.residual = cartan_form(spec, x, as_span(out.t)).norm();
  out.status = out.residual <= opts.residual_tol(spec.dim) ? OrientationStatus::Converged : OrientationStatus::NotFound;
  return out;
}

namespace {

void require_found(const TimeOrientation& t0) {
  if (t0.status == OrientationStatus::NotFound) {
    throw Error(ErrorCode::NoConvergence, "time orientation is not a critical direction (residual " +
                                              std::to_string(t0.residual) + ")");
  }
}

Point point_of(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace

VolumeDensity minimal_riemannian_density(const MetricSpec& spec, std::span<const double> x,
                                         const TimeOrientation& t0) {
  require_found(t0);
  const OsculatingPair osc = osculating(spec, x, as_span(t0.t));
  const EllipsoidMap map = ellipsoid_map(osc.g_t_plus);
  VolumeDensity d;
  d.x = point_of(x);
  d.form = VolumeForm::MinimalRiemannian;
  d.orientation_used = t0;
  d.sigma = std::sqrt(std::abs(osc.g_t.det));
  d.ellipsoid_volume = map.volume();
  const double via_ellipsoid = unit_ball_volume(spec.dim) / d.ellipsoid_volume;
  if (std::abs(via_ellipsoid - d.sigma) > 1e-10 * std::max(1.0, d.sigma)) {
    throw Error(ErrorCode::ConsistencyCheck, "sqrt|det g^t0| = " + std::to_string(d.sigma) +
                                                 " but Vol(B)/Vol(E) = " + std::to_string(via_ellipsoid));
  }
  return d;
}

EllipsoidSamples sample_det_on_ellipsoid(const MetricSpec& spec, std::span<const double> x,
                                         const TimeOrientation& t0, const QuadratureRule& sphere,
                                         const VolumeOptions& opts) {
  require_found(t0);
  const OsculatingPair osc = osculating(spec, x, as_span(t0.t));
  EllipsoidSamples out;
  out.map = ellipsoid_map(osc.g_t_plus);
  const Integrand f = [&](std::span<const double> y) { return std::abs(det_g(spec, x, y)); };
  const NodeSamples s = sample_mapped_sphere(f, out.map, sphere, opts.policy);
  out.det_abs = s.values;
  out.singular_nodes = s.skipped;
  out.perturbed_nodes = s.perturbed;
  const std::vector<char> flags = flag_blowup_nodes(sphere, s.values, opts.blowup_ratio);
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    if (flags[i] && std::isfinite(s.values[i])) ++out.blowup_nodes;
  const int bad = out.singular_nodes + out.blowup_nodes;
  if (bad > opts.prolongation_fraction * sphere.size() || out.singular_nodes == sphere.size()) {
    throw Error(ErrorCode::DetNotProlongable,
                "|det g| cannot be prolonged over the ellipsoid: " + std::to_string(out.singular_nodes) +
                    " singular and " + std::to_string(out.blowup_nodes) + " blow-up nodes of " +
                    std::to_string(sphere.size()));
  }
  out.g_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    if (std::isfinite(s.values[i])) out.g_min = std::min(out.g_min, s.values[i]);
  return out;
}

VolumeDensity holmes_thompson_density(const MetricSpec& spec, std::span<const double> x, const TimeOrientation& t0,
                                      const QuadratureRule& sphere, const VolumeOptions& opts) {
  const EllipsoidSamples s = sample_det_on_ellipsoid(spec, x, t0, sphere, opts);
  const int n = spec.dim;
  VolumeDensity d;
  d.x = point_of(x);
  d.form = VolumeForm::HolmesThompson;
  d.orientation_used = t0;
  d.ellipsoid_volume = s.map.volume();
  d.g_min = s.g_min;
  d.singular_nodes = s.singular_nodes;
  d.perturbed_nodes = s.perturbed_nodes;
  d.blowup_nodes = s.blowup_nodes;
  // det g is 0-homogeneous, so the ellipsoid integral reduces to the sphere.
  d.sigma = s.map.jac / n * renormalized_sum(sphere.weights, s.det_abs) / unit_ball_volume(n);
  const double bound = s.g_min * s.map.jac;
  if (!(d.sigma > 0.0) || d.sigma < bound * (1.0 - 1e-12)) {
    throw Error(ErrorCode::ConsistencyCheck, "HT density " + std::to_string(d.sigma) +
                                                 " violates the lower bound " + std::to_string(bound));
  }
  return d;
}

VolumeDensity holmes_thompson_density(const MetricSpec& spec, std::span<const double> x, const TimeOrientation& t0,
                                      const VolumeOptions& opts) {
  return holmes_thompson_density(spec, x, t0, sphere_rule(spec.dim, opts.resolved_orders(spec.dim).angular), opts);
}

namespace {

void require_positive_definite(const MetricSpec& spec, std::span<const double> x, const Eigen::VectorXd& y) {
  if (!spec.is_admissible(x, as_span(y))) {
    throw Error(ErrorCode::NotPositiveDefinite, "direction outside the admissible set; classical forms need A = TM\\0");
  }
  const MetricMatrix g = metric_at(spec, x, as_span(y));
  if (!g.signature.positive_definite(spec.dim)) {
    throw Error(ErrorCode::NotPositiveDefinite, "g is not positive definite at a sampled direction");
  }
}

}  // namespace

VolumeDensity classical_density(const MetricSpec& spec, std::span<const double> x, VolumeForm form,
                                const VolumeOptions& opts) {
  if (form != VolumeForm::ClassicalBH && form != VolumeForm::ClassicalHT) {
    throw Error(ErrorCode::InvalidArgument, "classical_density computes classical-bh or classical-ht");
  }
  const int n = spec.dim;
  if (n < 1) throw Error(ErrorCode::UnsupportedDimension, "dimension must be positive");
  if (opts.classical_samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");

  // Boundary points d / F(d) along axes, box corners and random directions.
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < n; ++i) {
    for (double s : {-1.0, 1.0}) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      d[i] = s;
      dirs.push_back(d);
    }
  }
  for (int mask = 0; mask < (1 << n); ++mask) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    dirs.push_back(d);
  }
  std::mt19937_64 rng(opts.classical_seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 64 * n; ++k) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = normal(rng);
    dirs.push_back(d);
  }
  Eigen::VectorXd extent = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const Eigen::VectorXd& d = dirs[k];
    // Axes and corners may sit where g degenerates (quartic norms); the
    // random directions carry the definiteness test.
    if (k >= 2 * static_cast<std::size_t>(n) + (1u << n)) require_positive_definite(spec, x, d);
    const double F = norm_F(spec, x, as_span(d));
    if (!(F > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "F vanishes on a nonzero direction");
    extent = extent.cwiseMax((d / F).cwiseAbs());
  }
  extent *= 1.05;
  const Eigen::VectorXd lo = -extent;
  const double box_volume = (2.0 * extent).prod();

  // Scrambled Sobol points with a Cranley-Patterson shift.
  boost::random::sobol qrng(static_cast<std::size_t>(n));
  const double qscale = 1.0 / (static_cast<double>(qrng.max() - qrng.min()) + 1.0);
  std::uniform_real_distribution<double> unif;
  Eigen::VectorXd shift(n);
  for (int i = 0; i < n; ++i) shift[i] = unif(rng);

  const long N = opts.classical_samples;
  std::vector<double> inside_terms;
  std::vector<double> det_terms;
  inside_terms.reserve(static_cast<std::size_t>(N));
  det_terms.reserve(static_cast<std::size_t>(N));
  Eigen::VectorXd y(n);
  for (long s = 0; s < N; ++s) {
    for (int i = 0; i < n; ++i) {
      double u = static_cast<double>(qrng() - qrng.min()) * qscale + shift[i];
      u -= std::floor(u);
      y[i] = lo[i] + 2.0 * extent[i] * u;
    }
    double in = 0.0, det = 0.0;
    if (spec.is_admissible(x, as_span(y)) && spec.lagrangian_at(x, as_span(y)) <= 1.0) {
      in = 1.0;
      if (form == VolumeForm::ClassicalHT) {
        det = det_g(spec, x, as_span(y));
        if (!std::isfinite(det)) throw Error(ErrorCode::NonFiniteResult, "det g is not finite inside B_x");
      }
    }
    inside_terms.push_back(in);
    det_terms.push_back(det);
  }

  auto mean_and_se = [N](std::vector<double>& v) {
    const double mean = pairwise_sum(v) / static_cast<double>(N);
    for (double& a : v) a = (a - mean) * (a - mean);
    const double var = pairwise_sum(v) / static_cast<double>(N - 1);
    return std::pair{mean, std::sqrt(var / static_cast<double>(N))};
  };

  VolumeDensity d;
  d.x = point_of(x);
  d.form = form;
  d.samples = N;
  const double ball = unit_ball_volume(n);
  if (form == VolumeForm::ClassicalBH) {
    const auto [frac, se] = mean_and_se(inside_terms);
    if (!(frac > 0.0)) throw Error(ErrorCode::NonFiniteResult, "no sample fell inside B_x");
    const double vol = frac * box_volume;
    d.sigma = ball / vol;
    d.std_error = d.sigma * se / frac;
  } else {
    const auto [m, se] = mean_and_se(det_terms);
    d.sigma = m * box_volume / ball;
    d.std_error = se * box_volume / ball;
  }
  return d;
}

Box Box::parse(std::string_view s) {
  std::vector<std::pair<double, double>> axes;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t semi = std::min(s.find(';', pos), s.size());
    const std::string_view part = s.substr(pos, semi - pos);
    const std::size_t comma = part.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument, "domain axis '" + std::string(part) + "' is not of the form a,b");
    }
    auto number = [&](std::string_view t) {
      while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
      while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
      double v = 0.0;
      const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || end != t.data() + t.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, "bad number '" + std::string(t) + "' in domain");
      }
      return v;
    };
    const double a = number(part.substr(0, comma));
    const double b = number(part.substr(comma + 1));
    if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "domain axis needs lower < upper");
    axes.emplace_back(a, b);
    pos = semi + 1;
  }
  Box box;
  box.lo.resize(static_cast<Eigen::Index>(axes.size()));
  box.hi.resize(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t i = 0; i < axes.size(); ++i) {
    box.lo[static_cast<Eigen::Index>(i)] = axes[i].first;
    box.hi[static_cast<Eigen::Index>(i)] = axes[i].second;
  }
  return box;
}

BoxGrid box_grid(const Box& box, int res) {
  if (res < 1) throw Error(ErrorCode::InvalidArgument, "grid resolution must be positive");
  const int n = box.dim();
  std::vector<GaussRule1D> axes;
  for (int i = 0; i < n; ++i) axes.push_back(gauss_legendre(res, box.lo[i], box.hi[i]));
  long count = 1;
  for (int i = 0; i < n; ++i) count *= res;
  BoxGrid grid;
  grid.nodes.reserve(static_cast<std::size_t>(count));
  grid.weights.reserve(static_cast<std::size_t>(count));
  std::vector<int> idx(n, 0);
  for (long c = 0; c < count; ++c) {
    long rem = c;
    for (int d = n - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(rem % res);
      rem /= res;
    }
    Point p(n);
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      p[d] = axes[d].nodes[idx[d]];
      w *= axes[d].weights[idx[d]];
    }
    grid.nodes.push_back(std::move(p));
    grid.weights.push_back(w);
  }
  return grid;
}

void parallel_for(int count, int threads, const std::function<void(int)>& f) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  int first_index = count;
  std::mutex mu;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        f(i);
      } catch (...) {
        // Keep the lowest failing index so the reported error is deterministic.
        const std::lock_guard lock(mu);
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

VolumeIntegral integrate_volume(const MetricSpec& spec, const Box& domain, VolumeForm form, int res,
                                const SolverOptions& solver, const VolumeOptions& opts) {
  if (domain.dim() != spec.dim) {
    throw Error(ErrorCode::InvalidArgument, "domain has " + std::to_string(domain.dim()) + " axes, metric has " +
                                                std::to_string(spec.dim));
  }
  VolumeIntegral out;
  out.grid = box_grid(domain, res);
  const int count = static_cast<int>(out.grid.nodes.size());
  out.sigma.assign(count, 0.0);

  const bool classical = form == VolumeForm::ClassicalBH || form == VolumeForm::ClassicalHT;
  OrientationField field;
  if (!classical) {
    field = orientation_field(spec, out.grid.nodes, solver);
    out.smoothness = field.smoothness;
    for (const auto& p : field.points) out.max_residual = std::max(out.max_residual, p.residual);
  }
  const QuadratureRule sphere =
      form == VolumeForm::HolmesThompson ? sphere_rule(spec.dim, opts.resolved_orders(spec.dim).angular)
                                         : QuadratureRule{};
  std::vector<int> singular(count, 0);
  parallel_for(count, opts.threads, [&](int i) {
    try {
      const auto x = as_span(out.grid.nodes[i]);
      VolumeDensity d;
      switch (form) {
        case VolumeForm::MinimalRiemannian: d = minimal_riemannian_density(spec, x, field.points[i]); break;
        case VolumeForm::HolmesThompson: d = holmes_thompson_density(spec, x, field.points[i], sphere, opts); break;
        default: d = classical_density(spec, x, form, opts); break;
      }
      out.sigma[i] = d.sigma;
      singular[i] = d.singular_nodes;
    } catch (const Error& e) {
      throw Error(e.code(), "grid point " + std::to_string(i) + ": " + e.what());
    }
  });
  std::vector<double> terms(count);
  for (int i = 0; i < count; ++i) {
    terms[i] = out.grid.weights[i] * out.sigma[i];
    out.singular_nodes += singular[i];
  }
  out.value = pairwise_sum(terms);
  return out;
}

}  // namespace finslervol
