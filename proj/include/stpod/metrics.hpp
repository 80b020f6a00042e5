#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stpod/mesh.hpp"
#include "stpod/snapshot.hpp"

namespace stpod {

/// ||s~_i - s_i|| / ||s_i|| per column. Throws DimensionError on a shape
/// mismatch and InvalidArgumentError on a zero reference column.
std::vector<double> col_l2_errors(const Eigen::MatrixXd& s_tilde, const Eigen::MatrixXd& s_fem);
std::vector<double> col_l2_errors(const SnapshotMatrix& s_tilde, const SnapshotMatrix& s_fem);

/// ||S~ - S||_F / ||S||_F.
double frob_error(const Eigen::MatrixXd& s_tilde, const Eigen::MatrixXd& s_fem);
double frob_error(const SnapshotMatrix& s_tilde, const SnapshotMatrix& s_fem);

/// Cumulative energy fractions E(k) = sum_{i<=k} sigma_i^2 / sum sigma_i^2,
/// k = 1..min(n, m). Throws InvalidArgumentError for a zero matrix.
std::vector<double> energy_spectrum(const Eigen::MatrixXd& s);
std::vector<double> energy_spectrum(const SnapshotMatrix& s);

/// Euclidean distance per node (rows) and time level (columns).
Eigen::MatrixXd position_error(const std::vector<fem::Coords>& x_tilde,
                               const std::vector<fem::Coords>& x_fem);

struct ErrorReport {
  std::optional<int> mode;
  double parameter = 0.0;
  std::vector<double> per_column_l2;
  double frobenius = 0.0;
  std::vector<double> energy_curve;  // of the reference matrix
};

ErrorReport error_report(const SnapshotMatrix& s_tilde, const SnapshotMatrix& s_fem);

/// Human-readable table.
std::string format_report(const ErrorReport& r);
/// One-line JSON record.
std::string report_json(const ErrorReport& r);

}  // namespace stpod
