#pragma once

// Oriented SVD: a sign-fixed thin SVD that is a pure function of the input
// matrix whenever its nonzero singular values are pairwise distinct.
//
// Orientation rule: every left singular vector phi_i is flipped (together with
// its right partner psi_i) so that <s(phi_i), phi_i> > 0, where s(phi_i) is the
// first column of S whose projection on phi_i is not negligible.

#include <Eigen/Dense>

#include "stpod/manifold.hpp"

namespace stpod {

inline constexpr double kTolRank = 1e-12;
inline constexpr double kRelGap = 1e-10;
/// Witness threshold, relative to ||S||_F.
inline constexpr double kTolProjRel = 1e-12;

struct OrientedSvd {
  Eigen::MatrixXd phi;    // n x r
  Eigen::VectorXd sigma;  // r, strictly decreasing
  Eigen::MatrixXd psi;    // m x r
  Eigen::Index rank = 0;

  Eigen::MatrixXd reconstruct() const;
};

/// Leading p triples of an oriented SVD.
struct PodFactors {
  StiefelPoint phi_p;      // n x p
  Eigen::VectorXd sigma_p; // p
  StiefelPoint psi_p;      // m x p

  Eigen::Index mode() const noexcept { return sigma_p.size(); }
  /// S_p = phi_p diag(sigma_p) psi_p^T.
  Eigen::MatrixXd reconstruct() const;
};

/// Full thin SVD (k = min(n, m) triples, zero values included).
struct ThinSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
};

/// Number of singular values above tol_rank * sigma_1.
Eigen::Index numerical_rank(const Eigen::VectorXd& sigma, double tol_rank = kTolRank);

/// Genericity test on a descending list of singular values.
bool has_distinct_values(const Eigen::VectorXd& sigma, double rel_gap = kRelGap,
                         double tol_rank = kTolRank);

/// true iff every adjacent pair of nonzero singular values of s is separated by
/// more than rel_gap * sigma_1.
bool is_generic(const Eigen::MatrixXd& s, double rel_gap = kRelGap);

/// Sign of <s_j, phi> for the first column s_j with |<s_j, phi>| > tol_proj.
/// Throws NoWitnessColumnError when there is no such column.
int oriented_sign(const Eigen::MatrixXd& columns, const Eigen::VectorXd& phi, double tol_proj);

/// Applies the orientation rule to an arbitrary SVD of s (u: n x k,
/// sigma: k descending, v: m x k) and drops the zero singular triples.
OrientedSvd orient(const Eigen::MatrixXd& s, Eigen::MatrixXd u, Eigen::VectorXd sigma,
                   Eigen::MatrixXd v);

/// Oriented SVD of an n x m matrix with m <= n.
/// Throws DimensionError when m > n and NotGenericError when s is not generic.
OrientedSvd oriented_svd(const Eigen::MatrixXd& s);

/// POD of mode p. Throws InvalidArgumentError unless 1 <= p <= f.rank.
PodFactors pod_truncate(const OrientedSvd& f, Eigen::Index p);

/// Thin SVD that keeps all min(n, m) triples. The nonzero triples follow the
/// orientation rule when the matrix is generic; otherwise the backend signs
/// are kept and *status is set to NonGeneric.
ThinSvd thin_svd(const Eigen::MatrixXd& s, SvdStatus* status = nullptr);

}  // namespace stpod
