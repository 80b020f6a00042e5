#include "stpod/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "stpod/errors.hpp"

namespace stpod {

namespace {

void require_increasing(std::span<const double> params, const char* who) {
  if (params.empty()) throw InvalidArgumentError(std::string(who) + ": no parameter values");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(params[i])) {
      throw InvalidArgumentError(std::string(who) + ": non-finite parameter value");
    }
    if (i > 0 && !(params[i] > params[i - 1])) {
      throw InvalidArgumentError(std::string(who) +
                                 ": parameter values must be strictly increasing (duplicate or "
                                 "unordered value " +
                                 std::to_string(params[i]) + ")");
    }
  }
}

SvdStatus worst(SvdStatus a, SvdStatus b) {
  return (a == SvdStatus::NonGeneric || b == SvdStatus::NonGeneric) ? SvdStatus::NonGeneric
                                                                     : SvdStatus::Deterministic;
}

}  // namespace

std::vector<double> lagrange_weights(std::span<const double> params, double lambda) {
  require_increasing(params, "lagrange_weights");
  const std::size_t n = params.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) w[i] *= (lambda - params[j]) / (params[i] - params[j]);
    }
  }
  return w;
}

std::vector<double> piecewise_linear_weights(std::span<const double> params, double lambda) {
  require_increasing(params, "piecewise_linear_weights");
  const std::size_t n = params.size();
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  // Interval [params[k], params[k+1]] containing lambda, clamped to the ends.
  const auto it = std::upper_bound(params.begin(), params.end(), lambda);
  std::size_t k = it == params.begin() ? 0 : static_cast<std::size_t>(it - params.begin()) - 1;
  k = std::min(k, n - 2);
  const double t = (lambda - params[k]) / (params[k + 1] - params[k]);
  w[k] = 1.0 - t;
  w[k + 1] = t;
  return w;
}

std::vector<double> interpolation_weights(std::span<const double> params, double lambda,
                                          WeightScheme scheme) {
  return scheme == WeightScheme::Lagrange ? lagrange_weights(params, lambda)
                                          : piecewise_linear_weights(params, lambda);
}

std::size_t default_reference_index(std::span<const double> params) {
  require_increasing(params, "default_reference_index");
  const std::size_t n = params.size();
  const double median =
      n % 2 == 1 ? params[n / 2] : 0.5 * (params[n / 2 - 1] + params[n / 2]);
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(params[i] - median) < std::abs(params[best] - median)) best = i;
  }
  return best;
}

void TrainingSet::validate() const {
  require_increasing(params, "TrainingSet");
  if (params.size() < 2) throw InvalidArgumentError("TrainingSet: at least two nodes required");
  if (points.size() != params.size()) {
    throw DimensionError("TrainingSet: " + std::to_string(points.size()) + " points for " +
                         std::to_string(params.size()) + " parameter values");
  }
  if (ref_index >= params.size()) {
    throw InvalidArgumentError("TrainingSet: reference index out of range");
  }
  for (const auto& y : points) {
    if (y.rows() != points.front().rows() || y.cols() != points.front().cols()) {
      throw DimensionError("TrainingSet: points have different shapes");
    }
  }
}

StiefelCurve::StiefelCurve(TrainingSet train, WeightScheme scheme, double cond_max)
    : train_(std::move(train)), scheme_(scheme) {
  train_.validate();
  const StiefelPoint& ref = train_.points[train_.ref_index];
  degenerate_ = ref.rows() == ref.cols();
  lifts_.reserve(train_.points.size());
  for (std::size_t k = 0; k < train_.points.size(); ++k) {
    if (k == train_.ref_index || degenerate_) {
      lifts_.push_back(Eigen::MatrixXd::Zero(ref.rows(), ref.cols()));
      continue;
    }
    SvdStatus st = SvdStatus::Deterministic;
    TangentLift z = log_map(ref, train_.points[k], cond_max, &st);
    if (st == SvdStatus::Deterministic && !is_generic(z.matrix())) st = SvdStatus::NonGeneric;
    lift_status_ = worst(lift_status_, st);
    lifts_.push_back(z.matrix());
  }
  if (lift_status_ == SvdStatus::NonGeneric) {
    spdlog::warn("stiefel curve: a tangent lift is not generic; singular vectors are not "
                 "uniquely oriented");
  }
}

StiefelPoint StiefelCurve::at(double lambda, SvdStatus* status) const {
  const StiefelPoint& ref = train_.points[train_.ref_index];
  if (status) *status = lift_status_;
  if (degenerate_) return ref;
  const std::vector<double> w = interpolation_weights(train_.params, lambda, scheme_);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(ref.rows(), ref.cols());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i != train_.ref_index) z.noalias() += w[i] * lifts_[i];
  }
  if (z.isZero(0.0)) return ref;
  SvdStatus st = SvdStatus::Deterministic;
  ThinSvd svd = thin_svd(z, &st);
  if (status) *status = worst(*status, st);
  return StiefelPoint(geodesic_from_svd(ref.matrix(), svd.u, svd.sigma, svd.v, 1.0));
}

StiefelPoint stiefel_curve(const TrainingSet& train, double lambda, SvdStatus* status) {
  return StiefelCurve(train).at(lambda, status);
}

Eigen::Index RomDatabase::rows() const {
  return factors.empty() ? 0 : factors.front().phi_p.rows();
}

Eigen::Index RomDatabase::cols() const {
  return factors.empty() ? 0 : factors.front().psi_p.rows();
}

void RomDatabase::validate() const {
  require_increasing(params, "RomDatabase");
  if (params.size() < 2) throw InvalidArgumentError("RomDatabase: at least two nodes required");
  if (factors.size() != params.size()) {
    throw DimensionError("RomDatabase: factor count does not match parameter count");
  }
  if (ref_index >= params.size()) throw InvalidArgumentError("RomDatabase: bad reference index");
  for (const auto& f : factors) {
    if (f.mode() != mode || f.phi_p.rows() != rows() || f.psi_p.rows() != cols()) {
      throw DimensionError("RomDatabase: nodes have inconsistent n, m or p");
    }
  }
}

RomDatabase build_database(std::span<const SnapshotMatrix> snapshots, Eigen::Index mode,
                           std::optional<double> ref_param) {
  if (snapshots.size() < 2) throw InvalidArgumentError("build_database: need at least two snapshots");
  std::vector<std::size_t> order(snapshots.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return snapshots[a].parameter < snapshots[b].parameter;
  });

  RomDatabase db;
  db.mode = mode;
  db.field_kind = snapshots[order.front()].kind;
  const Eigen::Index n = snapshots[order.front()].values.rows();
  const Eigen::Index m = snapshots[order.front()].values.cols();
  for (std::size_t idx : order) {
    const SnapshotMatrix& s = snapshots[idx];
    if (s.values.rows() != n || s.values.cols() != m) {
      throw DimensionError("build_database: snapshot at parameter " + std::to_string(s.parameter) +
                           " has shape " + std::to_string(s.values.rows()) + "x" +
                           std::to_string(s.values.cols()) + ", expected " + std::to_string(n) +
                           "x" + std::to_string(m));
    }
    if (s.kind != db.field_kind) throw InvalidArgumentError("build_database: mixed field kinds");
    const OrientedSvd f = oriented_svd(s.values);
    if (mode < 1 || mode > f.rank) {
      throw InvalidArgumentError("build_database: mode " + std::to_string(mode) +
                                 " exceeds the rank " + std::to_string(f.rank) +
                                 " of the snapshot at parameter " + std::to_string(s.parameter));
    }
    db.params.push_back(s.parameter);
    db.factors.push_back(pod_truncate(f, mode));
  }
  require_increasing(db.params, "build_database");

  if (ref_param) {
    const double scale = std::max(1.0, std::abs(*ref_param));
    auto it = std::find_if(db.params.begin(), db.params.end(),
                           [&](double p) { return std::abs(p - *ref_param) <= 1e-12 * scale; });
    if (it == db.params.end()) {
      throw InvalidArgumentError("build_database: reference parameter " +
                                 std::to_string(*ref_param) + " is not a training value");
    }
    db.ref_index = static_cast<std::size_t>(it - db.params.begin());
  } else {
    db.ref_index = default_reference_index(db.params);
  }
  db.validate();
  return db;
}

MixedPart mixed_part(const RomDatabase& db, std::span<const StiefelPoint> phi_at_nodes,
                     std::span<const StiefelPoint> psi_at_nodes) {
  db.validate();
  const std::size_t n_nodes = db.params.size();
  if (phi_at_nodes.size() != n_nodes || psi_at_nodes.size() != n_nodes) {
    throw DimensionError("mixed_part: expected one spatial and one temporal point per node");
  }
  MixedPart m;
  m.reserve(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const PodFactors& f = db.factors[k];
    const StiefelPoint& phi = phi_at_nodes[k];
    const StiefelPoint& psi = psi_at_nodes[k];
    if (phi.rows() != db.rows() || psi.rows() != db.cols() || phi.cols() != db.mode ||
        psi.cols() != db.mode) {
      throw DimensionError("mixed_part: curve points do not match the database shape");
    }
    // Phi^T (Phi_p Sigma_p Psi_p^T) Psi without forming the n x m product.
    m.push_back((phi.matrix().transpose() * f.phi_p.matrix()) * f.sigma_p.asDiagonal() *
                (f.psi_p.matrix().transpose() * psi.matrix()));
  }
  return m;
}

namespace {

TrainingSet make_training(const RomDatabase& db, bool spatial) {
  TrainingSet t;
  t.params = db.params;
  t.ref_index = db.ref_index;
  t.points.reserve(db.factors.size());
  for (const auto& f : db.factors) t.points.push_back(spatial ? f.phi_p : f.psi_p);
  return t;
}

}  // namespace

SpaceTimeInterpolator::SpaceTimeInterpolator(const RomDatabase& db, InterpolationOptions opts)
    : params_(db.params),
      mode_(db.mode),
      kind_(db.field_kind),
      opts_(opts),
      spatial_((db.validate(), make_training(db, true)), opts.scheme, opts.cond_max),
      temporal_(make_training(db, false), opts.scheme, opts.cond_max) {
  std::vector<StiefelPoint> phi_nodes;
  std::vector<StiefelPoint> psi_nodes;
  for (double lambda : params_) {
    SvdStatus a = SvdStatus::Deterministic;
    SvdStatus b = SvdStatus::Deterministic;
    phi_nodes.push_back(spatial_.at(lambda, &a));
    psi_nodes.push_back(temporal_.at(lambda, &b));
    node_status_ = worst(node_status_, worst(a, b));
  }
  mixed_ = mixed_part(db, phi_nodes, psi_nodes);
}

SnapshotMatrix SpaceTimeInterpolator::operator()(double lambda, InterpolationStatus* status) const {
  if (!std::isfinite(lambda)) throw InvalidArgumentError("st_interpolate: non-finite parameter");
  InterpolationStatus st;
  st.extrapolated = lambda < params_.front() || lambda > params_.back();
  if (st.extrapolated) {
    spdlog::warn("st_interpolate: parameter {} lies outside the training range [{}, {}]; "
                 "extrapolating",
                 lambda, params_.front(), params_.back());
  }
  const StiefelPoint phi = spatial_.at(lambda, &st.spatial);
  const StiefelPoint psi = temporal_.at(lambda, &st.temporal);
  if (node_status_ == SvdStatus::NonGeneric) st.spatial = SvdStatus::NonGeneric;
  if (!st.deterministic()) {
    spdlog::warn("st_interpolate: genericity assumption violated; result is valid but its "
                 "singular vectors are not uniquely oriented");
  }

  const std::vector<double> w = interpolation_weights(params_, lambda, opts_.scheme);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(mode_, mode_);
  for (std::size_t i = 0; i < w.size(); ++i) m.noalias() += w[i] * mixed_[i];

  SnapshotMatrix out;
  out.kind = kind_;
  out.parameter = lambda;
  out.units = std::string(default_units(kind_));
  out.mode = static_cast<int>(mode_);
  out.values = phi.matrix() * m * psi.matrix().transpose();
  if (status) *status = st;
  return out;
}

SnapshotMatrix st_interpolate(const RomDatabase& db, double lambda, InterpolationOptions opts,
                              InterpolationStatus* status) {
  return SpaceTimeInterpolator(db, opts)(lambda, status);
}

}  // namespace stpod
