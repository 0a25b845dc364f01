#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "finslervol/finsler.hpp"
#include "finslervol/orientation.hpp"
#include "finslervol/quadrature.hpp"

namespace finslervol {

enum class VolumeForm { MinimalRiemannian, HolmesThompson, ClassicalBH, ClassicalHT };

std::string_view to_string(VolumeForm f);

/// Accepts bh, ht, classical-bh, classical-ht.
VolumeForm parse_volume_form(std::string_view s);

struct VolumeDensity {
  Point x;
  double sigma = 0.0;
  VolumeForm form = VolumeForm::MinimalRiemannian;
  std::optional<TimeOrientation> orientation_used;

  double ellipsoid_volume = 0.0;  // Vol(E), Lorentzian forms
  double g_min = 0.0;             // least |det g| over the sampled ellipsoid boundary
  int singular_nodes = 0;
  int perturbed_nodes = 0;
  int blowup_nodes = 0;
  double std_error = 0.0;  // classical forms
  long samples = 0;
};

struct VolumeOptions {
  /// Zero entries select QuadratureOrders::defaults(n).
  QuadratureOrders orders{0, 0};
  SingularNodePolicy policy;
  /// A node whose |det g| exceeds this multiple of its smallest neighbour
  /// counts as sitting on a blow-up.
  double blowup_ratio = 2.0;
  /// Above this fraction of singular or blow-up nodes, det g is treated as
  /// not prolongable over the ellipsoid.
  double prolongation_fraction = 0.01;
  long classical_samples = 1L << 17;
  std::uint64_t classical_seed = 0x51ab1eULL;
  int threads = 0;  // 0: hardware concurrency

  QuadratureOrders resolved_orders(int n) const;
};

/// Wraps a caller-chosen direction as a time orientation, recording its
/// Cartan residual. Status is Converged when the residual is within the
/// solver tolerance and NotFound otherwise.
TimeOrientation orientation_at(const MetricSpec& spec, std::span<const double> x, const Eigen::VectorXd& t,
                               const SolverOptions& opts = {});

/// sqrt|det g^t0|, cross-checked against Vol(B)/Vol(E).
VolumeDensity minimal_riemannian_density(const MetricSpec& spec, std::span<const double> x,
                                         const TimeOrientation& t0);

/// |det g| at the mapped nodes of a sphere rule on the ellipsoid E_x^t0.
struct EllipsoidSamples {
  EllipsoidMap map;
  Eigen::VectorXd det_abs;  // NaN for skipped nodes
  int singular_nodes = 0;
  int perturbed_nodes = 0;
  int blowup_nodes = 0;
  double g_min = 0.0;
};

/// Throws DetNotProlongable when singular plus blow-up nodes exceed the
/// prolongation fraction.
EllipsoidSamples sample_det_on_ellipsoid(const MetricSpec& spec, std::span<const double> x,
                                         const TimeOrientation& t0, const QuadratureRule& sphere,
                                         const VolumeOptions& opts = {});

VolumeDensity holmes_thompson_density(const MetricSpec& spec, std::span<const double> x, const TimeOrientation& t0,
                                      const QuadratureRule& sphere, const VolumeOptions& opts = {});
VolumeDensity holmes_thompson_density(const MetricSpec& spec, std::span<const double> x, const TimeOrientation& t0,
                                      const VolumeOptions& opts = {});

/// Positive definite BH or HT density by quasi-random sampling of a box
/// around the unit ball B_x = {F(x, .) <= 1}.
VolumeDensity classical_density(const MetricSpec& spec, std::span<const double> x, VolumeForm form,
                                const VolumeOptions& opts = {});

/// Axis-aligned box.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
  /// "a0,b0;a1,b1;..."
  static Box parse(std::string_view s);
};

/// Tensor Gauss-Legendre nodes of a box, row-major with the last axis
/// fastest.
struct BoxGrid {
  std::vector<Point> nodes;
  std::vector<double> weights;
};

BoxGrid box_grid(const Box& box, int res);

struct VolumeIntegral {
  double value = 0.0;
  BoxGrid grid;
  std::vector<double> sigma;
  double smoothness = 0.0;    // orientation field diagnostic
  double max_residual = 0.0;  // worst Cartan residual over the grid
  int singular_nodes = 0;
};

VolumeIntegral integrate_volume(const MetricSpec& spec, const Box& domain, VolumeForm form, int res,
                                const SolverOptions& solver = {}, const VolumeOptions& opts = {});

/// Runs f(i) for i in [0, count) on up to `threads` workers; the first
/// exception thrown is rethrown after all workers finish.
void parallel_for(int count, int threads, const std::function<void(int)>& f);

}  // namespace finslervol
