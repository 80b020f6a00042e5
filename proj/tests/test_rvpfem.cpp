#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "stpod/errors.hpp"
#include "stpod/forging.hpp"
#include "stpod/metrics.hpp"
#include "stpod/rvpfem.hpp"
#include "stpod/thermal.hpp"

using namespace stpod;
using namespace stpod::fem;

namespace {

// Effective strain rate from the deviator of the 3D plane-strain rate tensor.
double effective_rate(double exx, double eyy, double gxy) {
  const double mean = (exx + eyy) / 3.0;
  const double dx = exx - mean, dy = eyy - mean, dz = -mean, sxy = 0.5 * gxy;
  return std::sqrt(2.0 / 3.0 * (dx * dx + dy * dy + dz * dz + 2.0 * sxy * sxy));
}

// Velocity field v = (a x + b y, c x + d y) sampled at the nodes.
Eigen::VectorXd affine_field(const Coords& x, double a, double b, double c, double d) {
  Eigen::VectorXd v(2 * x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    v(2 * i) = a * x(i, 0) + b * x(i, 1);
    v(2 * i + 1) = c * x(i, 0) + d * x(i, 1);
  }
  return v;
}

MaterialModel frictionless() {
  MaterialModel m;
  m.friction = 0.0;
  return m;
}

MechState state_with(const Mesh& mesh, const Eigen::VectorXd& v) {
  MechState s = MechState::initial(mesh);
  s.velocity = v;
  return s;
}

// Frictionless compression of a block of height h stays affine, v = (a x, -y/h),
// but a finite penalty lets it dilate: a minimizes phi(rate) + K/2 (a - 1/h)^2.
double affine_rate(const MaterialModel& mat, double h) {
  auto f = [&](double a) {
    const double div = a - 1.0 / h;
    return mat.dissipation_potential(effective_rate(a, -1.0 / h, 0.0)) + 0.5 * mat.penalty * div * div;
  };
  double lo = 0.0, hi = 2.0 / h;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    (f(m1) < f(m2) ? hi : lo) = f(m1) < f(m2) ? m2 : m1;
  }
  return 0.5 * (lo + hi);
}

ForgingConfig benchmark(double m) {
  ForgingConfig c = load_forging_config(STPOD_SOURCE_DIR "/configs/benchmark.cfg");
  c.material.friction = m;
  return c;
}

}  // namespace

TEST(Material, FlowStressAndPotential) {
  const MaterialModel m;
  EXPECT_NEAR(m.flow_stress(0.5), 1000.0 * std::pow(0.5, 0.1), 1e-9);
  // Continuous at the limiting rate, linear below it.
  EXPECT_NEAR(m.flow_stress(0.01 - 1e-12), m.flow_stress(0.01), 1e-6);
  EXPECT_NEAR(m.flow_stress(0.005), 0.5 * m.flow_stress(0.01), 1e-9);
  for (double e : {0.002, 0.01, 0.05, 0.3, 2.0}) {
    const double h = 1e-7 * std::max(e, 0.01);
    const double fd = (m.dissipation_potential(e + h) - m.dissipation_potential(e - h)) / (2 * h);
    EXPECT_NEAR(fd, m.flow_stress(e), 1e-5 * m.flow_stress(e));
  }
}

TEST(Material, Validation) {
  MaterialModel m;
  EXPECT_NO_THROW(m.validate());
  m.flow_exponent = 1.2;
  EXPECT_THROW(m.validate(), InvalidArgumentError);
  m = MaterialModel{};
  m.penalty = 10.0;
  EXPECT_THROW(m.validate(), InvalidArgumentError);
  m = MaterialModel{};
  m.taylor_quinney = 0.0;
  EXPECT_THROW(m.validate(), InvalidArgumentError);
}

TEST(Friction, TractionLaw) {
  MaterialModel m;
  m.friction = 0.4;
  m.friction_v0 = 1e-3;
  const double sigma = 800.0;
  EXPECT_EQ(friction_traction(0.0, sigma, m), 0.0);
  EXPECT_NEAR(std::abs(friction_traction(1e3, sigma, m)), 0.4 * sigma / std::sqrt(3.0), 1e-3);
  EXPECT_NEAR(std::abs(friction_traction(1e-3, sigma, m)), 0.4 * sigma / (2.0 * std::sqrt(3.0)), 1e-9);
  EXPECT_LT(friction_traction(0.5, sigma, m), 0.0);
  EXPECT_GT(friction_traction(-0.5, sigma, m), 0.0);
}

TEST(Assembly, SingleElementPureShearCompression) {
  const Mesh mesh = make_quarter_mesh(1, 1, 1.0, 1.0);
  const MaterialModel mat = frictionless();
  const MechState s = state_with(mesh, affine_field(mesh.nodes, 1.0, 0.0, 0.0, -1.0));
  const MechAssembly a = assemble_mech(s, mat, mesh);
  const double e = effective_rate(1.0, -1.0, 0.0);
  EXPECT_NEAR(e, 2.0 / std::sqrt(3.0), 1e-15);
  // Unit square: the functional is the potential at the uniform rate.
  EXPECT_NEAR(a.energy, mat.dissipation_potential(e), 1e-9);
  // Power identity: v . dPi/dv = sigma_bar * e * area for a homogeneous field.
  EXPECT_NEAR(s.velocity.dot(a.residual), mat.flow_stress(e) * e, 1e-8);
}

TEST(Assembly, SingleElementDilatationPenalty) {
  const Mesh mesh = make_quarter_mesh(1, 1, 2.0, 1.0);
  MaterialModel mat = frictionless();
  const MechState s = state_with(mesh, affine_field(mesh.nodes, 0.3, 0.0, 0.0, 0.2));
  const MechAssembly a = assemble_mech(s, mat, mesh);
  const double ev = 0.5, area = 2.0;
  const double e = effective_rate(0.3, 0.2, 0.0);
  EXPECT_NEAR(a.energy, mat.dissipation_potential(e) * area + 0.5 * mat.penalty * ev * ev * area, 1e-6);
  EXPECT_NEAR(s.velocity.dot(a.residual), (mat.flow_stress(e) * e + mat.penalty * ev * ev) * area, 1e-6);
}

TEST(Assembly, ZeroVelocityUsesRegularizedFloor) {
  const Mesh mesh = make_quarter_mesh(2, 2, 1.0, 1.0);
  const MaterialModel mat = frictionless();
  const MechAssembly a = assemble_mech(state_with(mesh, Eigen::VectorXd::Zero(18)), mat, mesh);
  EXPECT_TRUE(a.residual.allFinite());
  EXPECT_TRUE(a.jacobian.allFinite());
  EXPECT_EQ(a.residual.cwiseAbs().maxCoeff(), 0.0);
  // Tangent at rest is the linear-viscous matrix sigma_0 / e_0 B^T D B + penalty.
  EXPECT_GT(a.jacobian.diagonal().minCoeff(), 0.0);
}

TEST(Assembly, DerivativesMatchFiniteDifferences) {
  std::mt19937 rng(83);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Mesh mesh = make_quarter_mesh(3, 2, 3.0, 2.0);
  MaterialModel mat;
  mat.friction = 0.6;
  MechState s = state_with(mesh, Eigen::VectorXd::NullaryExpr(2 * mesh.num_nodes(), [&] { return u(rng); }));
  update_rates(s, mat, mesh);
  refresh_contact_flow_stress(s, mesh);
  const MechAssembly a = assemble_mech(s, mat, mesh);
  const double jmax = a.jacobian.cwiseAbs().maxCoeff();
  EXPECT_LE((a.jacobian - a.jacobian.transpose()).cwiseAbs().maxCoeff(), 1e-8 * jmax);

  const double h = 1e-6;
  for (int d = 0; d < 2 * mesh.num_nodes(); ++d) {
    MechState p = s, m = s;
    p.velocity(d) += h;
    m.velocity(d) -= h;
    const MechAssembly ap = assemble_mech(p, mat, mesh), am = assemble_mech(m, mat, mesh, false);
    EXPECT_NEAR((ap.energy - am.energy) / (2 * h), a.residual(d), 1e-4 * (1.0 + std::abs(a.residual(d))));
    const Eigen::VectorXd col = (ap.residual - am.residual) / (2 * h);
    EXPECT_LE((col - a.jacobian.col(d)).cwiseAbs().maxCoeff(), 1e-4 * jmax);
  }
}

TEST(Assembly, InvertedElementThrows) {
  const Mesh mesh = make_quarter_mesh(1, 1, 1.0, 1.0);
  MechState s = state_with(mesh, Eigen::VectorXd::Zero(8));
  s.coords(2, 0) = -1.0;
  s.coords(2, 1) = -1.0;
  EXPECT_THROW(assemble_mech(s, frictionless(), mesh), DegenerateElementError);
  EXPECT_THROW(check_jacobians(mesh, s.coords), DegenerateElementError);
}

TEST(Mesh, QuarterModelBoundaryCover) {
  const Mesh mesh = make_quarter_mesh(10, 10, 10.0, 10.0);
  EXPECT_EQ(mesh.num_nodes(), 121);
  EXPECT_EQ(mesh.num_elems(), 100);
  EXPECT_EQ(mesh.edges.size(), 40u);
  for (const auto& e : mesh.edges) {
    const double xa = mesh.nodes(e.a, 0), xb = mesh.nodes(e.b, 0);
    const double ya = mesh.nodes(e.a, 1), yb = mesh.nodes(e.b, 1);
    switch (e.kind) {
      case BoundaryKind::SymmetryX: EXPECT_TRUE(xa == 0.0 && xb == 0.0); break;
      case BoundaryKind::SymmetryY: EXPECT_TRUE(ya == 0.0 && yb == 0.0); break;
      case BoundaryKind::Contact: EXPECT_TRUE(ya == 10.0 && yb == 10.0); break;
      case BoundaryKind::Free: EXPECT_TRUE(xa == 10.0 && xb == 10.0); break;
    }
  }
  EXPECT_NO_THROW(check_jacobians(mesh, mesh.nodes));
}

TEST(Solver, FrictionlessCompressionIsAffine) {
  const Mesh mesh = make_quarter_mesh(10, 10, 10.0, 10.0);
  MechState s = MechState::initial(mesh);
  // Start away from the answer.
  s.velocity = 0.3 * homogeneous_guess(s.coords, 1.0);
  const MechState out = solve_mech_step(s, frictionless(), mesh, forging_bc(mesh, 1.0));
  const Eigen::VectorXd want = affine_field(mesh.nodes, affine_rate(frictionless(), 10.0), 0.0, 0.0, -0.1);
  EXPECT_LE((out.velocity - want).norm() / want.norm(), 1e-6);
}

TEST(Solver, FunctionalDecreasesMonotonically) {
  const Mesh mesh = make_quarter_mesh(10, 10, 10.0, 10.0);
  MaterialModel mat;
  mat.friction = 0.7;
  SolverOptions opts;
  opts.max_shear_updates = 1;  // one functional: the friction flow stress stays frozen
  MechState s = MechState::initial(mesh);
  s.velocity = homogeneous_guess(s.coords, 1.0);
  SolveReport rep;
  solve_mech_step(s, mat, mesh, forging_bc(mesh, 1.0), opts, &rep);
  ASSERT_GE(rep.energy.size(), 2u);
  for (std::size_t i = 1; i < rep.energy.size(); ++i) {
    EXPECT_LE(rep.energy[i], rep.energy[i - 1] + 1e-12 * std::abs(rep.energy[i - 1]));
  }
  for (double a : rep.step_lengths) {
    EXPECT_GT(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Solver, ConvergedStateSatisfiesBoundaryConditionsAndTolerances) {
  const Mesh mesh = make_quarter_mesh(10, 10, 10.0, 10.0);
  MaterialModel mat;
  mat.friction = 0.5;
  const VelocityBc bc = forging_bc(mesh, 1.0);
  MechState s = MechState::initial(mesh);
  s.velocity = homogeneous_guess(s.coords, 1.0);
  SolveReport rep;
  const MechState out = solve_mech_step(s, mat, mesh, bc, {}, &rep);
  EXPECT_LE(rep.velocity_norm, 1e-6);
  EXPECT_LE(rep.residual_norm, 1e-6);
  for (int n : mesh.nodes_on(BoundaryKind::SymmetryX)) EXPECT_EQ(out.velocity(2 * n), 0.0);
  for (int n : mesh.nodes_on(BoundaryKind::SymmetryY)) EXPECT_EQ(out.velocity(2 * n + 1), 0.0);
  for (int n : mesh.nodes_on(BoundaryKind::Contact)) EXPECT_EQ(out.velocity(2 * n + 1), -1.0);
}

TEST(Solver, ReportsNoConvergence) {
  const Mesh mesh = make_quarter_mesh(10, 10, 10.0, 10.0);
  MaterialModel mat;
  mat.friction = 0.5;
  SolverOptions opts;
  opts.max_iter = 2;
  MechState s = MechState::initial(mesh);
  s.velocity = homogeneous_guess(s.coords, 1.0);
  try {
    solve_mech_step(s, mat, mesh, forging_bc(mesh, 1.0), opts);
    FAIL() << "expected NoConvergenceError";
  } catch (const NoConvergenceError& e) {
    EXPECT_GT(e.velocity_norm(), 0.0);
    EXPECT_GT(e.residual_norm(), 0.0);
  }
}

TEST(Solver, DirectWarmStartConvergesToSameField) {
  const Mesh mesh = make_quarter_mesh(10, 10, 10.0, 10.0);
  MaterialModel mat;
  mat.friction = 0.3;
  MechState s = MechState::initial(mesh);
  s.velocity = homogeneous_guess(s.coords, 1.0);
  SolverOptions warm;
  warm.direct_iterations = 3;
  const MechState a = solve_mech_step(s, mat, mesh, forging_bc(mesh, 1.0));
  const MechState b = solve_mech_step(s, mat, mesh, forging_bc(mesh, 1.0), warm);
  EXPECT_LE((a.velocity - b.velocity).norm() / a.velocity.norm(), 1e-5);
}

// Converged element-mean dilatation relative to the effective strain rate,
// with K = 1e5.
TEST(Solver, PenaltyKeepsDilatationSmall) {
  const ForgingResult r = run_forging(benchmark(0.5));
  double worst = 0.0;
  for (int e = 0; e < r.mesh.num_elems(); ++e) {
    double rate = 0.0;
    for (const auto& g : r.mech.gauss[e]) rate += 0.25 * g.strain_rate;
    worst = std::max(worst, std::abs(r.mech.volumetric_rate(e)) / rate);
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(Solver, MeanStressFollowsPenaltyRelation) {
  const Mesh mesh = make_quarter_mesh(10, 10, 10.0, 10.0);
  MaterialModel mat;
  mat.friction = 0.5;
  MechState s = MechState::initial(mesh);
  s.velocity = homogeneous_guess(s.coords, 1.0);
  const MechState out = solve_mech_step(s, mat, mesh, forging_bc(mesh, 1.0));
  // The penalty term is linear in K with slope sum 1/2 rate_v^2 A, so the
  // element mean stress is K rate_v.
  double slope = 0.0;
  for (int e = 0; e < mesh.num_elems(); ++e) {
    const auto x = element_coords(mesh, out.coords, e);
    const double area = 4.0 * (shape_functions(0.0, 0.0).dn * x).determinant();
    slope += 0.5 * out.volumetric_rate(e) * out.volumetric_rate(e) * area;
  }
  MaterialModel stiffer = mat;
  stiffer.penalty *= 1.5;
  const double diff = assemble_mech(out, stiffer, mesh, false).energy - assemble_mech(out, mat, mesh, false).energy;
  EXPECT_NEAR(diff, 0.5 * mat.penalty * slope, 1e-6 * diff);
}

TEST(Thermal, UniformStateWithoutWorkIsSteady) {
  const Mesh mesh = make_quarter_mesh(4, 4, 10.0, 10.0);
  MechState mech = MechState::initial(mesh);
  update_rates(mech, frictionless(), mesh);
  for (auto& e : mech.gauss)
    for (auto& g : e) g.strain_rate = g.flow_stress = 0.0;
  const ThermalState t0 = ThermalState::uniform(mesh, 25.0);
  const ThermalState t1 = thermal_step(t0, mech, mesh, MaterialModel{}, 0.5);
  EXPECT_LE((t1.temperature.array() - 25.0).abs().maxCoeff(), 1e-12);
}

TEST(Thermal, SingleElementUniformSource) {
  const Mesh mesh = make_quarter_mesh(1, 1, 2.0, 3.0);
  MaterialModel mat;
  MechState mech = MechState::initial(mesh);
  update_rates(mech, mat, mesh);
  for (auto& g : mech.gauss[0]) {
    g.strain_rate = 0.2;
    g.flow_stress = 700.0;
  }
  const double q = mat.taylor_quinney * 700.0 * 0.2;
  const ThermalState t1 = thermal_step(ThermalState::uniform(mesh, 25.0), mech, mesh, mat, 0.5);
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(t1.temperature(n) - 25.0, q * 0.5 / mat.rho_c, 1e-10);
}

TEST(Thermal, ConservesEnergyAndNeverCools) {
  const ForgingConfig cfg = benchmark(0.5);
  const MaterialModel mat = cfg.effective_material();
  const Mesh mesh = make_quarter_mesh(10, 10, 10.0, 10.0);
  MechState mech = MechState::initial(mesh);
  mech.velocity = homogeneous_guess(mech.coords, 1.0);
  mech = solve_mech_step(mech, mat, mesh, forging_bc(mesh, 1.0));
  ThermalState th = ThermalState::uniform(mesh, 25.0);
  for (double theta : {1.0, 0.5}) {
    const ThermalState next = thermal_step(th, mech, mesh, mat, 0.5, theta);
    const double stored = next.capacity.dot(next.temperature - th.temperature);
    EXPECT_NEAR(stored, 0.5 * next.source.sum(), 1e-9 * stored);
    EXPECT_GE(next.temperature.minCoeff(), th.temperature.minCoeff() - 1e-12);
  }
}

TEST(Forging, ConfigParsing) {
  const ForgingConfig c = parse_forging_config("# comment\nnx = 4\n friction = 0.3 # inline\n\nrho_c=4.5\n");
  EXPECT_EQ(c.nx, 4);
  EXPECT_EQ(c.material.friction, 0.3);
  EXPECT_EQ(c.material.rho_c, 4.5);
  EXPECT_THROW(parse_forging_config("bogus = 1\n"), ParseError);
  EXPECT_THROW(parse_forging_config("nx = four\n"), ParseError);
  EXPECT_THROW(parse_forging_config("nx 4\n"), ParseError);
  EXPECT_THROW(load_forging_config("/nonexistent/config.cfg"), ParseError);
  ForgingConfig bad;
  bad.steps = 0;
  EXPECT_THROW(bad.validate(), InvalidArgumentError);
}

TEST(Forging, SnapshotShapes) {
  const ForgingResult r = run_forging(benchmark(0.5));
  EXPECT_EQ(r.velocity.values.rows(), 242);
  EXPECT_EQ(r.velocity.values.cols(), 7);
  EXPECT_EQ(r.temperature.values.rows(), 121);
  EXPECT_EQ(r.temperature.values.cols(), 7);
  EXPECT_EQ(r.positions.size(), 8u);
  EXPECT_NEAR(r.log.back().height, 6.5, 1e-12);
  for (const auto& s : r.log) EXPECT_LE(s.iterations, 200);
}

TEST(Forging, FrictionlessSurfaceStaysStraight) {
  const ForgingResult r = run_forging(benchmark(0.0));
  const Coords& x = r.positions.back();
  for (int j = 0; j <= 10; ++j) EXPECT_NEAR(x(r.mesh.node_at(10, j), 0), x(r.mesh.node_at(10, 0), 0), 1e-6);
  // Affine at every step, so the width follows the scalar recurrence.
  const ForgingConfig c = benchmark(0.0);
  double w = 10.0;
  for (int k = 0; k < c.steps; ++k) w *= 1.0 + c.dt * affine_rate(c.effective_material(), 10.0 - c.dt * k);
  EXPECT_NEAR(x(r.mesh.node_at(10, 0), 0), w, 1e-5);
}

TEST(Forging, HighFrictionBarrels) {
  const ForgingResult r = run_forging(benchmark(0.9));
  const Coords& x = r.positions.back();
  const Coords& x0 = r.positions.front();
  const int mid = r.mesh.node_at(10, 0), corner = r.mesh.node_at(10, 10);
  EXPECT_GT(x(mid, 0) - x0(mid, 0), x(corner, 0) - x0(corner, 0));
}

TEST(Forging, ConvergesAcrossFrictionRange) {
  for (double m : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const ForgingResult r = run_forging(benchmark(m));
    for (const auto& s : r.log) {
      EXPECT_LE(s.velocity_norm, 1e-6);
      EXPECT_LE(s.residual_norm, 1e-6);
    }
  }
}

TEST(Forging, InversionAbortsWithStep) {
  ForgingConfig c = benchmark(0.9);
  c.dt = 4.0;
  c.steps = 3;
  try {
    run_forging(c);
    FAIL() << "expected DegenerateElementError";
  } catch (const DegenerateElementError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Forging, PositionsFollowExplicitEuler) {
  const ForgingResult r = run_forging(benchmark(0.3));
  const auto x = integrate_positions(r.mesh.nodes, r.velocity.values, 0.5);
  ASSERT_EQ(x.size(), r.positions.size());
  // Fold-over snapping moves nodes that touched the die by less than one
  // step of travel.
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_LE((x[k] - r.positions[k]).cwiseAbs().maxCoeff(), 0.5);
}

TEST(Forging, SnapshotEnergyConcentratesInTwoModes) {
  for (double m : {0.1, 0.5, 0.9}) {
    const ForgingResult r = run_forging(benchmark(m));
    EXPECT_GE(energy_spectrum(r.velocity.values)[1], 0.99) << "m = " << m;
    EXPECT_GE(energy_spectrum(r.temperature.values)[1], 0.99) << "m = " << m;
  }
}

TEST(Forging, SingularValueSpread) {
  for (double m : {0.1, 0.5, 0.9}) {
    const ForgingResult r = run_forging(benchmark(m));
    for (const auto* s : {&r.velocity.values, &r.temperature.values}) {
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(*s).singularValues();
      const double ratio = sv(0) / sv(6);
      EXPECT_GE(ratio, 1e4) << "m = " << m << (s == &r.velocity.values ? " velocity" : " temperature");
      EXPECT_LE(ratio, 1e7) << "m = " << m << (s == &r.velocity.values ? " velocity" : " temperature");
    }
  }
}
