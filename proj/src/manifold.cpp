#include "stpod/manifold.hpp"

#include <cmath>
#include <string>

#include "stpod/errors.hpp"
#include "stpod/osvd.hpp"

namespace stpod {

namespace {

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

bool is_orthonormal(const Eigen::MatrixXd& y, double tol) {
  if (y.cols() > y.rows()) throw DimensionError("is_orthonormal: p > n for " + shape(y));
  const Eigen::MatrixXd gram = y.transpose() * y;
  const Eigen::MatrixXd dev = gram - Eigen::MatrixXd::Identity(y.cols(), y.cols());
  return dev.size() == 0 || dev.cwiseAbs().maxCoeff() <= tol;
}

StiefelPoint::StiefelPoint(Eigen::MatrixXd y, double tol) : y_(std::move(y)) {
  if (y_.size() == 0) throw DimensionError("StiefelPoint: empty matrix");
  if (!is_orthonormal(y_, tol)) {
    throw OrthonormalityError("StiefelPoint: columns of the " + shape(y_) +
                              " matrix are not orthonormal");
  }
}

TangentLift::TangentLift(StiefelPoint base, Eigen::MatrixXd z, double tol)
    : base_(std::move(base)), z_(std::move(z)) {
  if (z_.rows() != base_.rows() || z_.cols() != base_.cols()) {
    throw DimensionError("TangentLift: lift " + shape(z_) + " does not match base " +
                         shape(base_.matrix()));
  }
  const Eigen::MatrixXd zty = z_.transpose() * base_.matrix();
  if (zty.cwiseAbs().maxCoeff() > tol) {
    throw OrthonormalityError("TangentLift: lift is not horizontal (max |Z^T Y| = " +
                              std::to_string(zty.cwiseAbs().maxCoeff()) + ")");
  }
}

TangentLift TangentLift::zero(const StiefelPoint& base) {
  return TangentLift(base, Eigen::MatrixXd::Zero(base.rows(), base.cols()));
}

double TangentLift::inner(const TangentLift& other) const {
  if (other.z_.rows() != z_.rows() || other.z_.cols() != z_.cols()) {
    throw DimensionError("TangentLift::inner: shape mismatch");
  }
  return (z_.transpose() * other.z_).trace();
}

bool GrassmannPoint::equals(const GrassmannPoint& other, double tol) const {
  return same_subspace(rep_, other.rep_, tol);
}

bool same_subspace(const StiefelPoint& a, const StiefelPoint& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("same_subspace: " + shape(a.matrix()) + " vs " + shape(b.matrix()));
  }
  return (a.projector() - b.projector()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::MatrixXd geodesic_from_svd(const Eigen::MatrixXd& base, const Eigen::MatrixXd& u,
                                  const Eigen::VectorXd& sigma, const Eigen::MatrixXd& v,
                                  double t) {
  const Eigen::ArrayXd ts = t * sigma.array();
  // cos and sin act on the diagonal only.
  const Eigen::MatrixXd moving =
      base * v * ts.cos().matrix().asDiagonal() + u * ts.sin().matrix().asDiagonal();
  return moving * v.transpose();
}

StiefelPoint geodesic(const TangentLift& lift, double t, SvdStatus* status) {
  if (status) *status = SvdStatus::Deterministic;
  const Eigen::MatrixXd& z = lift.matrix();
  if (t == 0.0 || z.isZero(0.0)) return lift.base();
  ThinSvd svd = thin_svd(z, status);
  return StiefelPoint(geodesic_from_svd(lift.base().matrix(), svd.u, svd.sigma, svd.v, t));
}

StiefelPoint exp_map(const TangentLift& lift, SvdStatus* status) {
  return geodesic(lift, 1.0, status);
}

Eigen::MatrixXd chart_coordinates(const StiefelPoint& base, const StiefelPoint& target,
                                  double cond_max) {
  if (base.rows() != target.rows() || base.cols() != target.cols()) {
    throw DimensionError("log_map: base " + shape(base.matrix()) + " vs target " +
                         shape(target.matrix()));
  }
  const Eigen::MatrixXd overlap = base.matrix().transpose() * target.matrix();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(overlap).singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > cond_max) {
    throw CutLocusError("log_map: base^T target is singular (condition " +
                        std::to_string(smin > 0.0 ? sv(0) / smin : INFINITY) +
                        "); target lies outside the logarithm chart");
  }
  // X = target * overlap^{-1}  <=>  overlap^T X^T = target^T
  const Eigen::MatrixXd xt = overlap.transpose().partialPivLu().solve(target.matrix().transpose());
  return xt.transpose() - base.matrix();
}

TangentLift log_map(const StiefelPoint& base, const StiefelPoint& target, double cond_max,
                    SvdStatus* status) {
  const Eigen::MatrixXd coords = chart_coordinates(base, target, cond_max);
  ThinSvd svd = thin_svd(coords, status);
  Eigen::MatrixXd z = svd.u * svd.sigma.array().atan().matrix().asDiagonal() * svd.v.transpose();
  // Remove the rounding-level vertical component so the lift passes the
  // horizontality check.
  z -= base.matrix() * (base.matrix().transpose() * z);
  return TangentLift(base, std::move(z));
}

}  // namespace stpod
