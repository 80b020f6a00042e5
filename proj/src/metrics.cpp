#include "stpod/metrics.hpp"

#include <cstdio>
#include <sstream>

#include <Eigen/SVD>
#include <json.hpp>

#include "stpod/errors.hpp"

namespace stpod {

namespace {

void check_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shapes differ (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
}

}  // namespace

std::vector<double> col_l2_errors(const Eigen::MatrixXd& s_tilde, const Eigen::MatrixXd& s_fem) {
  check_same_shape(s_tilde, s_fem, "col_l2_errors");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(s_fem.cols()));
  for (Eigen::Index j = 0; j < s_fem.cols(); ++j) {
    const double ref = s_fem.col(j).norm();
    if (ref == 0.0) throw InvalidArgumentError("col_l2_errors: reference column " + std::to_string(j) + " is zero");
    out.push_back((s_tilde.col(j) - s_fem.col(j)).norm() / ref);
  }
  return out;
}

std::vector<double> col_l2_errors(const SnapshotMatrix& s_tilde, const SnapshotMatrix& s_fem) {
  return col_l2_errors(s_tilde.values, s_fem.values);
}

double frob_error(const Eigen::MatrixXd& s_tilde, const Eigen::MatrixXd& s_fem) {
  check_same_shape(s_tilde, s_fem, "frob_error");
  const double ref = s_fem.norm();
  if (ref == 0.0) throw InvalidArgumentError("frob_error: reference matrix is zero");
  return (s_tilde - s_fem).norm() / ref;
}

double frob_error(const SnapshotMatrix& s_tilde, const SnapshotMatrix& s_fem) {
  return frob_error(s_tilde.values, s_fem.values);
}

std::vector<double> energy_spectrum(const Eigen::MatrixXd& s) {
  if (s.size() == 0 || s.norm() == 0.0) throw InvalidArgumentError("energy_spectrum: zero matrix");
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(s).singularValues();
  const double total = sv.squaredNorm();
  std::vector<double> out;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    acc += sv(i) * sv(i);
    out.push_back(acc / total);
  }
  out.back() = 1.0;
  return out;
}

std::vector<double> energy_spectrum(const SnapshotMatrix& s) { return energy_spectrum(s.values); }

Eigen::MatrixXd position_error(const std::vector<fem::Coords>& x_tilde,
                               const std::vector<fem::Coords>& x_fem) {
  if (x_tilde.size() != x_fem.size() || x_fem.empty()) {
    throw DimensionError("position_error: time grids differ");
  }
  const Eigen::Index n = x_fem.front().rows();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(x_fem.size()));
  for (std::size_t k = 0; k < x_fem.size(); ++k) {
    if (x_tilde[k].rows() != n || x_fem[k].rows() != n) {
      throw DimensionError("position_error: node counts differ at time level " + std::to_string(k));
    }
    out.col(static_cast<Eigen::Index>(k)) = (x_tilde[k] - x_fem[k]).rowwise().norm();
  }
  return out;
}

ErrorReport error_report(const SnapshotMatrix& s_tilde, const SnapshotMatrix& s_fem) {
  ErrorReport r;
  r.mode = s_tilde.mode;
  r.parameter = s_fem.parameter;
  r.per_column_l2 = col_l2_errors(s_tilde, s_fem);
  r.frobenius = frob_error(s_tilde, s_fem);
  r.energy_curve = energy_spectrum(s_fem);
  return r;
}

std::string format_report(const ErrorReport& r) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "parameter %.6g  mode %s\n", r.parameter,
                r.mode ? std::to_string(*r.mode).c_str() : "-");
  out << buf;
  out << "column  rel_l2_error  energy\n";
  for (std::size_t j = 0; j < r.per_column_l2.size(); ++j) {
    const double e = j < r.energy_curve.size() ? r.energy_curve[j] : 1.0;
    std::snprintf(buf, sizeof buf, "%6zu  %12.6e  %.12f\n", j + 1, r.per_column_l2[j], e);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "frobenius %.6e\n", r.frobenius);
  out << buf;
  return out.str();
}

std::string report_json(const ErrorReport& r) {
  nlohmann::json j;
  j["parameter"] = r.parameter;
  j["mode"] = r.mode ? nlohmann::json(*r.mode) : nlohmann::json(nullptr);
  j["per_column_l2"] = r.per_column_l2;
  j["frobenius"] = r.frobenius;
  j["energy_curve"] = r.energy_curve;
  return j.dump();
}

}  // namespace stpod
