#pragma once

#include <Eigen/Dense>

#include "stpod/mesh.hpp"
#include "stpod/rvpfem.hpp"

namespace stpod::fem {

/// Nodal temperatures with the matrices of the last step. Boundaries are
/// adiabatic; the die does not exchange heat with the workpiece.
struct ThermalState {
  Eigen::VectorXd temperature;  // degC
  Eigen::VectorXd capacity;     // lumped (diagonal) heat capacity
  Eigen::MatrixXd conduction;
  Eigen::VectorXd source;       // plastic heating

  static ThermalState uniform(const Mesh& mesh, double t0);
};

/// Assembles C, K_c and Q on the current geometry of `mech` and advances the
/// temperatures by the theta scheme
///   [C + theta dt K_c] T1 = [C - (1 - theta) dt K_c] T0 + dt Q.
/// Throws SingularSystemError if the left-hand matrix cannot be factored.
ThermalState thermal_step(const ThermalState& th, const MechState& mech, const Mesh& mesh,
                          const MaterialModel& mat, double dt, double theta = 1.0);

}  // namespace stpod::fem
