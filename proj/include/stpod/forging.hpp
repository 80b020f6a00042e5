#pragma once

// Open-die compression of a rectangular bar on a quarter model, with
// staggered mechanical and thermal steps and a Lagrangian geometry update.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stpod/mesh.hpp"
#include "stpod/rvpfem.hpp"
#include "stpod/snapshot.hpp"
#include "stpod/thermal.hpp"

namespace stpod::fem {

struct ForgingConfig {
  int nx = 10;                       // elements across the quarter width
  int ny = 10;
  double width = 20.0;               // full bar dimensions (mm)
  double height = 20.0;
  double die_speed = 1.0;            // mm/s
  int steps = 7;
  double dt = 0.5;                   // s
  double initial_temperature = 25.0; // degC
  double theta = 1.0;
  MaterialModel material;            // friction_v0 <= 0 means 1e-3 * die_speed
  SolverOptions solver;

  /// Throws InvalidArgumentError on a bad value.
  void validate() const;
  MaterialModel effective_material() const;
};

/// Parses `key = value` lines ('#' starts a comment). Keys not given keep their
/// defaults; unknown keys and malformed values raise ParseError naming the
/// line and the source.
ForgingConfig parse_forging_config(const std::string& text, const std::string& source = "<config>");
ForgingConfig load_forging_config(const std::filesystem::path& path);

struct StepLog {
  int step = 0;
  int iterations = 0;
  int shear_updates = 0;
  double velocity_norm = 0.0;
  double residual_norm = 0.0;
  double energy = 0.0;
  double max_temperature = 0.0;
  double height = 0.0;  // current top surface height of the quarter model
};

struct ForgingResult {
  Mesh mesh;
  SnapshotMatrix velocity;     // 2 N_s x steps, column k = velocity of step k
  SnapshotMatrix temperature;  // N_s x steps, after the thermal update of step k
  /// steps + 1 coordinate sets: the reference geometry and the geometry after
  /// every update.
  std::vector<Coords> positions;
  std::vector<StepLog> log;
  MechState mech;
  ThermalState thermal;
};

/// Runs the benchmark for the configured friction factor. Element inversion
/// aborts with DegenerateElementError naming the step.
ForgingResult run_forging(const ForgingConfig& config);

/// Free-surface nodes that reached the die plane are put back on it, and free
/// edges lying entirely on the die become contact edges (fold-over of the
/// lateral surface). Returns the number of converted edges.
int activate_contact(Mesh& mesh, Coords& coords);

/// x_{k+1} = x_k + v_k dt for every column of a velocity snapshot matrix.
std::vector<Coords> integrate_positions(const Coords& reference, const Eigen::MatrixXd& velocity,
                                        double dt);

/// Coordinates over time levels as a 2 N_s x levels matrix (x, y interleaved)
/// and back.
Eigen::MatrixXd stack_positions(const std::vector<Coords>& positions);
std::vector<Coords> unstack_positions(const Eigen::MatrixXd& stacked);

}  // namespace stpod::fem
