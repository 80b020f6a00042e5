#pragma once

// Riemannian primitives on the compact Stiefel manifold St(p,n) and on the
// Grassmann manifold G(p,n) of p-dimensional subspaces of R^n.
//
// A Grassmann point is handled through one of its orthonormal
// representatives (a StiefelPoint); tangent vectors are handled through their
// horizontal lifts Z with Z^T Y = 0.

#include <Eigen/Dense>

namespace stpod {

inline constexpr double kTolOrth = 1e-10;
inline constexpr double kCondMax = 1e12;

/// Determinism of an SVD-based result. `NonGeneric` means an intermediate
/// matrix had repeated nonzero singular values, so the raw backend SVD was
/// used without the orientation rule.
enum class SvdStatus { Deterministic, NonGeneric };

/// n x p matrix with orthonormal columns.
class StiefelPoint {
 public:
  /// Throws OrthonormalityError if ||y^T y - I||_max > tol and DimensionError
  /// if y has more columns than rows or is empty.
  explicit StiefelPoint(Eigen::MatrixXd y, double tol = kTolOrth);

  const Eigen::MatrixXd& matrix() const noexcept { return y_; }
  Eigen::Index rows() const noexcept { return y_.rows(); }
  Eigen::Index cols() const noexcept { return y_.cols(); }

  /// Orthogonal projector Y Y^T onto the represented subspace.
  Eigen::MatrixXd projector() const { return y_ * y_.transpose(); }

 private:
  Eigen::MatrixXd y_;
};

/// Horizontal lift of a Grassmann tangent vector at `base`.
class TangentLift {
 public:
  /// Throws OrthonormalityError if ||z^T base||_max > tol.
  TangentLift(StiefelPoint base, Eigen::MatrixXd z, double tol = kTolOrth);

  /// The zero tangent vector at `base`.
  static TangentLift zero(const StiefelPoint& base);

  const StiefelPoint& base() const noexcept { return base_; }
  const Eigen::MatrixXd& matrix() const noexcept { return z_; }

  /// Riemannian inner product tr(Z1^T Z2).
  double inner(const TangentLift& other) const;

 private:
  StiefelPoint base_;
  Eigen::MatrixXd z_;
};

/// Grassmann point, compared through projection matrices.
class GrassmannPoint {
 public:
  explicit GrassmannPoint(StiefelPoint representative) : rep_(std::move(representative)) {}
  const StiefelPoint& representative() const noexcept { return rep_; }
  bool equals(const GrassmannPoint& other, double tol = kTolOrth) const;

 private:
  StiefelPoint rep_;
};

/// true iff max|y^T y - I_p| <= tol. Throws DimensionError when p > n.
bool is_orthonormal(const Eigen::MatrixXd& y, double tol);

/// true iff the projection matrices of a and b agree within tol (max-abs).
bool same_subspace(const StiefelPoint& a, const StiefelPoint& b, double tol);

/// Point at parameter t of the geodesic leaving base with initial velocity Z:
/// [Y V cos(t S) + U sin(t S)] V^T where Z = U S V^T.
StiefelPoint geodesic(const TangentLift& lift, double t, SvdStatus* status = nullptr);

/// geodesic(lift, 1).
StiefelPoint exp_map(const TangentLift& lift, SvdStatus* status = nullptr);

/// Horizontal lift Z = U atan(S) V^T of the tangent vector pointing from base
/// to target, where target (base^T target)^{-1} - base = U S V^T.
/// Throws CutLocusError when cond(base^T target) exceeds cond_max.
TangentLift log_map(const StiefelPoint& base, const StiefelPoint& target,
                    double cond_max = kCondMax, SvdStatus* status = nullptr);

/// target (base^T target)^{-1} - base, solved by LU on p x p systems.
Eigen::MatrixXd chart_coordinates(const StiefelPoint& base, const StiefelPoint& target,
                                  double cond_max = kCondMax);

/// Evaluates Y(t) for a base matrix and an already factored thin SVD of the
/// lift. Shared by the geodesic and by the interpolation curves.
Eigen::MatrixXd geodesic_from_svd(const Eigen::MatrixXd& base, const Eigen::MatrixXd& u,
                                  const Eigen::VectorXd& sigma, const Eigen::MatrixXd& v,
                                  double t);

}  // namespace stpod
