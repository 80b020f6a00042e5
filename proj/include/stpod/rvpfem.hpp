#pragma once

// Plane-strain rigid-viscoplastic flow formulation with penalty
// incompressibility and arctan-regularized shear friction on the die.
//
// The discrete functional is
//   Pi(v) = sum_gp E(rate) w J + sum_el K/2 (rate_v)^2 A + sum_contact phi(|v_s|) w J
// with E' = flow stress, so the residual is dPi/dv and the Jacobian its
// (symmetric) Hessian.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "stpod/mesh.hpp"

namespace stpod::fem {

/// Power-law material sigma = c rate^p with a linear-viscous floor below the
/// limiting strain rate, plus friction and thermal constants.
struct MaterialModel {
  double flow_c = 1000.0;            // MPa
  double flow_exponent = 0.1;        // dimensionless
  double strain_rate_limit = 0.01;   // 1/s
  double penalty = 1e5;              // MPa s
  double friction = 0.5;             // shear friction factor m
  double friction_v0 = 1e-3;         // mm/s
  double taylor_quinney = 0.9;
  double rho_c = 3.6;                // N/(mm^2 degC)
  double conductivity = 30.0;        // N/(s degC)

  /// Throws InvalidArgumentError on out-of-range constants. Friction may be
  /// zero (frictionless limit).
  void validate() const;

  /// Regularized flow stress; linear in rate below strain_rate_limit.
  double flow_stress(double rate) const;
  /// Integral of the flow stress from 0 to rate (dissipation potential).
  double dissipation_potential(double rate) const;
};

/// Tangential friction traction -m k (2/pi) atan(|v_s|/v0) sign(v_s), with the
/// shear yield stress k = flow_stress / sqrt(3).
double friction_traction(double slip, double flow_stress, const MaterialModel& mat);

struct GaussState {
  double strain_rate = 0.0;  // effective strain rate
  double flow_stress = 0.0;  // MPa
  double strain = 0.0;       // accumulated effective strain
};

struct MechState {
  Eigen::VectorXd velocity;                      // 2 N_s, interleaved (vx, vy)
  Coords coords;                                 // current nodal coordinates
  std::vector<std::array<GaussState, 4>> gauss;  // per element
  Eigen::VectorXd volumetric_rate;               // per element, at the centroid
  /// Flow stress used for the friction law on each boundary edge; held fixed
  /// during one Newton solve so the functional stays a potential.
  Eigen::VectorXd contact_flow_stress;

  /// Zero velocity on the reference geometry of `mesh`.
  static MechState initial(const Mesh& mesh);
};

struct MechAssembly {
  double energy = 0.0;
  Eigen::VectorXd residual;  // dPi/dv
  Eigen::MatrixXd jacobian;  // d2Pi/dv2 (empty when not requested)
};

enum class Linearization { Newton, Direct };

/// Functional value, residual and Jacobian at state.velocity on state.coords.
/// Direct linearization returns the secant (fixed-point) matrix instead of
/// the Hessian. Throws DegenerateElementError for inverted elements.
MechAssembly assemble_mech(const MechState& state, const MaterialModel& mat, const Mesh& mesh,
                           bool with_jacobian = true,
                           Linearization lin = Linearization::Newton);

/// Prescribed velocity components.
struct VelocityBc {
  std::vector<int> dofs;
  std::vector<double> values;
};

/// Symmetry planes (zero normal velocity) and a die moving down at die_speed
/// with the contact nodes stuck to it in the normal direction.
VelocityBc forging_bc(const Mesh& mesh, double die_speed);

/// Initial guess: the homogeneous incompressible compression field
/// v_x = s x / h, v_y = -s y / h on the current geometry.
Eigen::VectorXd homogeneous_guess(const Coords& coords, double die_speed);

struct SolverOptions {
  double tol_v = 1e-6;
  double tol_r = 1e-6;
  int max_iter = 200;
  int direct_iterations = 0;      // fixed-point iterations before Newton
  double shear_update_tol = 1e-3; // relative change of the friction flow stress
  int max_shear_updates = 20;
};

struct SolveReport {
  int iterations = 0;
  int shear_updates = 0;
  double velocity_norm = 0.0;  // ||dv|| / ||v|| of the last update
  double residual_norm = 0.0;  // ||dPi/dv|| over free dofs
  std::vector<double> energy;  // functional after each accepted update
  std::vector<double> step_lengths;
};

/// Newton iteration with backtracking line search on the functional; the
/// friction flow stress is refreshed between solves until it settles.
/// Throws NoConvergenceError after max_iter iterations.
MechState solve_mech_step(MechState state, const MaterialModel& mat, const Mesh& mesh,
                          const VelocityBc& bc, const SolverOptions& opts = {},
                          SolveReport* report = nullptr);

/// Recomputes the Gauss-point strain rates, flow stresses and element
/// volumetric rates from state.velocity.
void update_rates(MechState& state, const MaterialModel& mat, const Mesh& mesh);

/// Sets contact_flow_stress from the mean Gauss flow stress of each contact
/// edge's element. Returns the largest relative change.
double refresh_contact_flow_stress(MechState& state, const Mesh& mesh);

}  // namespace stpod::fem
