#pragma once

// Curves on compact Stiefel manifolds through training points, and the
// space-time interpolation of POD-truncated snapshot matrices
//   S(lambda) = Phi(lambda) M(lambda) Psi(lambda)^T.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stpod/manifold.hpp"
#include "stpod/osvd.hpp"
#include "stpod/snapshot.hpp"

namespace stpod {

enum class WeightScheme {
  Lagrange,         ///< global Lagrange polynomial through all nodes
  PiecewiseLinear,  ///< hat functions; avoids Runge oscillation for many nodes
};

/// w_i(lambda) = prod_{j != i} (lambda - lambda_j) / (lambda_i - lambda_j).
/// Throws InvalidArgumentError unless params are strictly increasing.
std::vector<double> lagrange_weights(std::span<const double> params, double lambda);

/// Hat-function weights; linear extrapolation from the end intervals.
std::vector<double> piecewise_linear_weights(std::span<const double> params, double lambda);

std::vector<double> interpolation_weights(std::span<const double> params, double lambda,
                                          WeightScheme scheme);

/// Index of the node closest to the median parameter value.
std::size_t default_reference_index(std::span<const double> params);

struct TrainingSet {
  std::vector<double> params;        // strictly increasing, N >= 2
  std::vector<StiefelPoint> points;  // N points of identical shape
  std::size_t ref_index = 0;

  /// Throws InvalidArgumentError / DimensionError on a broken invariant.
  void validate() const;
};

/// lambda -> Y(lambda) on St(p,n): tangent lifts of every node at the
/// reference point are combined with interpolation weights and mapped back
/// with the geodesic formula. Y(lambda_k) spans the same subspace as Y_k but is
/// in general a different matrix (only the reference node is reproduced
/// exactly).
class StiefelCurve {
 public:
  explicit StiefelCurve(TrainingSet train, WeightScheme scheme = WeightScheme::Lagrange,
                        double cond_max = kCondMax);

  StiefelPoint at(double lambda, SvdStatus* status = nullptr) const;

  const TrainingSet& training() const noexcept { return train_; }
  /// Z_k; Z_{ref} is the zero matrix.
  const std::vector<Eigen::MatrixXd>& lifts() const noexcept { return lifts_; }
  /// NonGeneric if any chart coordinate matrix had repeated singular values.
  SvdStatus lift_status() const noexcept { return lift_status_; }
  /// p == n: the Grassmannian is a single point and the curve is constant.
  bool degenerate() const noexcept { return degenerate_; }

 private:
  TrainingSet train_;
  WeightScheme scheme_;
  std::vector<Eigen::MatrixXd> lifts_;
  SvdStatus lift_status_ = SvdStatus::Deterministic;
  bool degenerate_ = false;
};

StiefelPoint stiefel_curve(const TrainingSet& train, double lambda, SvdStatus* status = nullptr);

/// Per-node POD factors of the training snapshots.
struct RomDatabase {
  static constexpr int kFormatVersion = 1;

  std::vector<double> params;
  Eigen::Index mode = 0;
  std::vector<PodFactors> factors;
  std::size_t ref_index = 0;
  FieldKind field_kind = FieldKind::Velocity;
  int format_version = kFormatVersion;

  Eigen::Index rows() const;
  Eigen::Index cols() const;
  void validate() const;
};

/// Oriented SVD and mode-p truncation of every snapshot. Snapshots are sorted
/// by parameter; ref_param selects the reference node (default: nearest the
/// median). Throws InvalidArgumentError when p exceeds the smallest rank.
RomDatabase build_database(std::span<const SnapshotMatrix> snapshots, Eigen::Index mode,
                           std::optional<double> ref_param = std::nullopt);

/// M_k = Phi(lambda_k)^T S_p^(k) Psi(lambda_k), one p x p matrix per node.
using MixedPart = std::vector<Eigen::MatrixXd>;

MixedPart mixed_part(const RomDatabase& db, std::span<const StiefelPoint> phi_at_nodes,
                     std::span<const StiefelPoint> psi_at_nodes);

struct InterpolationOptions {
  WeightScheme scheme = WeightScheme::Lagrange;
  double cond_max = kCondMax;
};

struct InterpolationStatus {
  SvdStatus spatial = SvdStatus::Deterministic;
  SvdStatus temporal = SvdStatus::Deterministic;
  bool extrapolated = false;

  bool deterministic() const noexcept {
    return spatial == SvdStatus::Deterministic && temporal == SvdStatus::Deterministic;
  }
};

/// Online stage of the space-time interpolation. Construction evaluates the
/// spatial and temporal curves at the training nodes and the mixed parts;
/// each call then costs two curve evaluations and a few small products.
class SpaceTimeInterpolator {
 public:
  explicit SpaceTimeInterpolator(const RomDatabase& db, InterpolationOptions opts = {});

  SnapshotMatrix operator()(double lambda, InterpolationStatus* status = nullptr) const;

  const StiefelCurve& spatial_curve() const noexcept { return spatial_; }
  const StiefelCurve& temporal_curve() const noexcept { return temporal_; }
  const MixedPart& mixed() const noexcept { return mixed_; }

 private:
  std::vector<double> params_;
  Eigen::Index mode_;
  FieldKind kind_;
  InterpolationOptions opts_;
  StiefelCurve spatial_;
  StiefelCurve temporal_;
  MixedPart mixed_;
  SvdStatus node_status_ = SvdStatus::Deterministic;
};

SnapshotMatrix st_interpolate(const RomDatabase& db, double lambda, InterpolationOptions opts = {},
                              InterpolationStatus* status = nullptr);

}  // namespace stpod
