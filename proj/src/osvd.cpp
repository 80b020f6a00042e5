#include "stpod/osvd.hpp"

#include <cmath>
#include <string>

#include "stpod/errors.hpp"

namespace stpod {

namespace {

ThinSvd backend_svd(const Eigen::MatrixXd& s) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw SvdError("SVD backend failed");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace

Eigen::MatrixXd OrientedSvd::reconstruct() const {
  return phi * sigma.asDiagonal() * psi.transpose();
}

Eigen::MatrixXd PodFactors::reconstruct() const {
  return phi_p.matrix() * sigma_p.asDiagonal() * psi_p.matrix().transpose();
}

Eigen::Index numerical_rank(const Eigen::VectorXd& sigma, double tol_rank) {
  if (sigma.size() == 0 || !(sigma(0) > 0.0)) return 0;
  const double cut = tol_rank * sigma(0);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > cut) ++r;
  return r;
}

bool has_distinct_values(const Eigen::VectorXd& sigma, double rel_gap, double tol_rank) {
  const Eigen::Index r = numerical_rank(sigma, tol_rank);
  for (Eigen::Index i = 0; i + 1 < r; ++i) {
    if ((sigma(i) - sigma(i + 1)) / sigma(0) <= rel_gap) return false;
  }
  return true;
}

bool is_generic(const Eigen::MatrixXd& s, double rel_gap) {
  if (s.size() == 0) return true;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
  return has_distinct_values(svd.singularValues(), rel_gap);
}

int oriented_sign(const Eigen::MatrixXd& columns, const Eigen::VectorXd& phi, double tol_proj) {
  if (columns.rows() != phi.size()) {
    throw DimensionError("oriented_sign: column length " + std::to_string(columns.rows()) +
                         " does not match vector length " + std::to_string(phi.size()));
  }
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const double proj = columns.col(j).dot(phi);
    if (std::abs(proj) > tol_proj) return proj > 0.0 ? 1 : -1;
  }
  throw NoWitnessColumnError("oriented_sign: every column is orthogonal to the singular vector");
}

OrientedSvd orient(const Eigen::MatrixXd& s, Eigen::MatrixXd u, Eigen::VectorXd sigma,
                   Eigen::MatrixXd v) {
  const Eigen::Index r = numerical_rank(sigma);
  const double tol_proj = kTolProjRel * s.norm();
  for (Eigen::Index i = 0; i < r; ++i) {
    if (oriented_sign(s, u.col(i), tol_proj) < 0) {
      u.col(i) = -u.col(i);
      v.col(i) = -v.col(i);
    }
  }
  OrientedSvd out;
  out.rank = r;
  out.phi = u.leftCols(r);
  out.sigma = sigma.head(r);
  out.psi = v.leftCols(r);
  return out;
}

OrientedSvd oriented_svd(const Eigen::MatrixXd& s) {
  if (s.cols() > s.rows()) {
    throw DimensionError("oriented_svd: expected m <= n, got " + std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + " (transpose the input)");
  }
  ThinSvd raw = backend_svd(s);
  if (!has_distinct_values(raw.sigma)) {
    throw NotGenericError("oriented_svd: matrix has repeated nonzero singular values");
  }
  return orient(s, std::move(raw.u), std::move(raw.sigma), std::move(raw.v));
}

PodFactors pod_truncate(const OrientedSvd& f, Eigen::Index p) {
  if (p < 1 || p > f.rank) {
    throw InvalidArgumentError("pod_truncate: mode " + std::to_string(p) +
                               " outside [1, " + std::to_string(f.rank) + "]");
  }
  return PodFactors{StiefelPoint(f.phi.leftCols(p)), f.sigma.head(p), StiefelPoint(f.psi.leftCols(p))};
}

ThinSvd thin_svd(const Eigen::MatrixXd& s, SvdStatus* status) {
  ThinSvd raw = backend_svd(s);
  if (!has_distinct_values(raw.sigma)) {
    if (status) *status = SvdStatus::NonGeneric;
    return raw;
  }
  if (status) *status = SvdStatus::Deterministic;
  const Eigen::Index r = numerical_rank(raw.sigma);
  const double tol_proj = kTolProjRel * s.norm();
  for (Eigen::Index i = 0; i < r; ++i) {
    if (oriented_sign(s, raw.u.col(i), tol_proj) < 0) {
      raw.u.col(i) = -raw.u.col(i);
      raw.v.col(i) = -raw.v.col(i);
    }
  }
  return raw;
}

}  // namespace stpod
