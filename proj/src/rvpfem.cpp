#include "stpod/rvpfem.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <spdlog/spdlog.h>

#include "stpod/errors.hpp"

namespace stpod::fem {

namespace {

using Mat38 = Eigen::Matrix<double, 3, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat88 = Eigen::Matrix<double, 8, 8>;

// rate^T D rate is the squared effective strain rate of the deviatoric
// plane-strain rate (rate = [exx, eyy, gxy], ezz = 0).
const Eigen::Matrix3d& deviatoric_metric() {
  static const Eigen::Matrix3d d = [] {
    Eigen::Matrix3d m;
    m << 4.0 / 9.0, -2.0 / 9.0, 0.0, -2.0 / 9.0, 4.0 / 9.0, 0.0, 0.0, 0.0, 1.0 / 3.0;
    return m;
  }();
  return d;
}

struct PointKinematics {
  Mat38 b;
  double det = 0.0;
};

PointKinematics kinematics(const Eigen::Matrix<double, 4, 2>& x, double xi, double eta, int elem) {
  const ShapeEval s = shape_functions(xi, eta);
  const Eigen::Matrix2d jac = s.dn * x;
  PointKinematics k;
  k.det = jac.determinant();
  if (!(k.det > 0.0)) {
    throw DegenerateElementError("element " + std::to_string(elem) +
                                     " has non-positive Jacobian determinant",
                                 elem);
  }
  const Eigen::Matrix<double, 2, 4> dx = jac.inverse() * s.dn;
  k.b.setZero();
  for (int a = 0; a < 4; ++a) {
    k.b(0, 2 * a) = dx(0, a);
    k.b(1, 2 * a + 1) = dx(1, a);
    k.b(2, 2 * a) = dx(1, a);
    k.b(2, 2 * a + 1) = dx(0, a);
  }
  return k;
}

Vec8 element_velocity(const Mesh& mesh, const Eigen::VectorXd& v, int e) {
  Vec8 ve;
  for (int a = 0; a < 4; ++a) {
    ve(2 * a) = v(2 * mesh.elems[e][a]);
    ve(2 * a + 1) = v(2 * mesh.elems[e][a] + 1);
  }
  return ve;
}

double friction_potential(double slip, double shear, const MaterialModel& mat) {
  const double u = std::abs(slip);
  const double v0 = mat.friction_v0;
  return mat.friction * shear * (2.0 / std::numbers::pi) *
         (u * std::atan(u / v0) - 0.5 * v0 * std::log1p((u / v0) * (u / v0)));
}

}  // namespace

void MaterialModel::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgumentError("material: " + what); };
  if (!(flow_c > 0.0)) fail("flow stress coefficient must be positive");
  if (!(flow_exponent > 0.0 && flow_exponent < 1.0)) fail("flow exponent must lie in (0, 1)");
  if (!(strain_rate_limit > 0.0)) fail("limiting strain rate must be positive");
  if (!(penalty > flow_c)) fail("penalty constant must dominate the flow stress coefficient");
  if (!(friction >= 0.0 && friction < 1.0)) fail("friction factor must lie in [0, 1)");
  if (!(friction_v0 > 0.0)) fail("friction regularization velocity must be positive");
  if (!(taylor_quinney > 0.0 && taylor_quinney <= 1.0)) fail("Taylor-Quinney coefficient must lie in (0, 1]");
  if (!(rho_c > 0.0)) fail("volumetric heat capacity must be positive");
  if (!(conductivity >= 0.0)) fail("conductivity must be non-negative");
}

double MaterialModel::flow_stress(double rate) const {
  if (rate < strain_rate_limit) {
    return flow_c * std::pow(strain_rate_limit, flow_exponent) * rate / strain_rate_limit;
  }
  return flow_c * std::pow(rate, flow_exponent);
}

double MaterialModel::dissipation_potential(double rate) const {
  const double s0 = flow_c * std::pow(strain_rate_limit, flow_exponent);
  if (rate < strain_rate_limit) return 0.5 * s0 * rate * rate / strain_rate_limit;
  return 0.5 * s0 * strain_rate_limit +
         flow_c * (std::pow(rate, flow_exponent + 1.0) -
                   std::pow(strain_rate_limit, flow_exponent + 1.0)) /
             (flow_exponent + 1.0);
}

double friction_traction(double slip, double flow_stress, const MaterialModel& mat) {
  const double shear = flow_stress / std::sqrt(3.0);
  return -mat.friction * shear * (2.0 / std::numbers::pi) * std::atan(slip / mat.friction_v0);
}

MechState MechState::initial(const Mesh& mesh) {
  MechState s;
  s.velocity = Eigen::VectorXd::Zero(2 * mesh.num_nodes());
  s.coords = mesh.nodes;
  s.gauss.assign(mesh.num_elems(), {});
  s.volumetric_rate = Eigen::VectorXd::Zero(mesh.num_elems());
  return s;
}

MechAssembly assemble_mech(const MechState& state, const MaterialModel& mat, const Mesh& mesh,
                           bool with_jacobian, Linearization lin) {
  const int ndof = 2 * mesh.num_nodes();
  if (state.velocity.size() != ndof || state.coords.rows() != mesh.num_nodes()) {
    throw DimensionError("assemble_mech: state does not match the mesh");
  }
  const Eigen::Matrix3d& dmat = deviatoric_metric();
  const double e0 = mat.strain_rate_limit;
  const double s0 = mat.flow_stress(e0);
  const Eigen::RowVector3d vol(1.0, 1.0, 0.0);

  MechAssembly out;
  out.residual = Eigen::VectorXd::Zero(ndof);
  if (with_jacobian) out.jacobian = Eigen::MatrixXd::Zero(ndof, ndof);

  for (int e = 0; e < mesh.num_elems(); ++e) {
    const auto x = element_coords(mesh, state.coords, e);
    const Vec8 ve = element_velocity(mesh, state.velocity, e);
    Vec8 re = Vec8::Zero();
    Mat88 ke = Mat88::Zero();

    for (const auto& gp : gauss_points_2x2()) {
      const PointKinematics k = kinematics(x, gp(0), gp(1), e);
      const Eigen::Vector3d rate = k.b * ve;
      const double eff = std::sqrt(std::max(0.0, rate.dot(dmat * rate)));
      const Vec8 g = k.b.transpose() * (dmat * rate);
      out.energy += mat.dissipation_potential(eff) * k.det;
      if (eff < e0) {
        const double coef = s0 / e0;
        re += coef * g * k.det;
        if (with_jacobian) ke += coef * k.b.transpose() * dmat * k.b * k.det;
      } else {
        const double coef = mat.flow_stress(eff) / eff;
        re += coef * g * k.det;
        if (with_jacobian) {
          ke += coef * k.b.transpose() * dmat * k.b * k.det;
          if (lin == Linearization::Newton) {
            ke -= coef * (1.0 - mat.flow_exponent) / (eff * eff) * (g * g.transpose()) * k.det;
          }
        }
      }
    }

    // One-point rule for the dilatation term.
    const PointKinematics kc = kinematics(x, 0.0, 0.0, e);
    const Eigen::Matrix<double, 1, 8> cv = vol * kc.b;
    const double area = 4.0 * kc.det;
    const double ev = cv.dot(ve);
    out.energy += 0.5 * mat.penalty * ev * ev * area;
    re += mat.penalty * ev * area * cv.transpose();
    if (with_jacobian) ke += mat.penalty * area * (cv.transpose() * cv);

    for (int a = 0; a < 4; ++a) {
      const int na = mesh.elems[e][a];
      out.residual.segment<2>(2 * na) += re.segment<2>(2 * a);
      if (!with_jacobian) continue;
      for (int b = 0; b < 4; ++b) {
        const int nb = mesh.elems[e][b];
        out.jacobian.block<2, 2>(2 * na, 2 * nb) += ke.block<2, 2>(2 * a, 2 * b);
      }
    }
  }

  if (mat.friction > 0.0) {
    static const double g = 1.0 / std::sqrt(3.0);
    const bool have_stress = state.contact_flow_stress.size() == static_cast<Eigen::Index>(mesh.edges.size());
    for (std::size_t i = 0; i < mesh.edges.size(); ++i) {
      const BoundaryEdge& edge = mesh.edges[i];
      if (edge.kind != BoundaryKind::Contact) continue;
      const double sigma = have_stress ? state.contact_flow_stress(static_cast<Eigen::Index>(i)) : s0;
      const double shear = sigma / std::sqrt(3.0);
      const double half_len = 0.5 * (state.coords.row(edge.b) - state.coords.row(edge.a)).norm();
      const double amp = mat.friction * shear * (2.0 / std::numbers::pi);
      for (double t : {-g, g}) {
        const Eigen::Vector2d n(0.5 * (1.0 - t), 0.5 * (1.0 + t));
        const int dofs[2] = {2 * edge.a, 2 * edge.b};
        const double slip = n(0) * state.velocity(dofs[0]) + n(1) * state.velocity(dofs[1]);
        out.energy += friction_potential(slip, shear, mat) * half_len;
        const double force = amp * std::atan(slip / mat.friction_v0);
        for (int a = 0; a < 2; ++a) out.residual(dofs[a]) += force * n(a) * half_len;
        if (!with_jacobian) continue;
        const double v0 = mat.friction_v0;
        const double stiff = (lin == Linearization::Newton || std::abs(slip) < 1e-12 * v0)
                                 ? amp * v0 / (v0 * v0 + slip * slip)
                                 : std::abs(force) / std::abs(slip);
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) out.jacobian(dofs[a], dofs[b]) += stiff * n(a) * n(b) * half_len;
        }
      }
    }
  }
  return out;
}

void update_rates(MechState& state, const MaterialModel& mat, const Mesh& mesh) {
  const Eigen::Matrix3d& dmat = deviatoric_metric();
  state.gauss.resize(mesh.num_elems());
  state.volumetric_rate.resize(mesh.num_elems());
  for (int e = 0; e < mesh.num_elems(); ++e) {
    const auto x = element_coords(mesh, state.coords, e);
    const Vec8 ve = element_velocity(mesh, state.velocity, e);
    const auto& pts = gauss_points_2x2();
    for (int q = 0; q < 4; ++q) {
      const PointKinematics k = kinematics(x, pts[q](0), pts[q](1), e);
      const Eigen::Vector3d rate = k.b * ve;
      const double eff = std::sqrt(std::max(0.0, rate.dot(dmat * rate)));
      state.gauss[e][q].strain_rate = eff;
      state.gauss[e][q].flow_stress = mat.flow_stress(eff);
    }
    const PointKinematics kc = kinematics(x, 0.0, 0.0, e);
    const Eigen::Vector3d rc = kc.b * ve;
    state.volumetric_rate(e) = rc(0) + rc(1);
  }
}

double refresh_contact_flow_stress(MechState& state, const Mesh& mesh) {
  const auto n_edges = static_cast<Eigen::Index>(mesh.edges.size());
  const bool had = state.contact_flow_stress.size() == n_edges;
  Eigen::VectorXd fresh = Eigen::VectorXd::Zero(n_edges);
  double change = had ? 0.0 : INFINITY;
  for (Eigen::Index i = 0; i < n_edges; ++i) {
    const BoundaryEdge& edge = mesh.edges[static_cast<std::size_t>(i)];
    if (edge.kind != BoundaryKind::Contact) continue;
    double mean = 0.0;
    for (const auto& gp : state.gauss[edge.element]) mean += 0.25 * gp.flow_stress;
    fresh(i) = mean;
    if (had && mean > 0.0) {
      change = std::max(change, std::abs(mean - state.contact_flow_stress(i)) / mean);
    }
  }
  state.contact_flow_stress = std::move(fresh);
  return change;
}

VelocityBc forging_bc(const Mesh& mesh, double die_speed) {
  VelocityBc bc;
  auto add = [&](int dof, double value) {
    bc.dofs.push_back(dof);
    bc.values.push_back(value);
  };
  for (int n : mesh.nodes_on(BoundaryKind::SymmetryX)) add(2 * n, 0.0);
  for (int n : mesh.nodes_on(BoundaryKind::SymmetryY)) add(2 * n + 1, 0.0);
  for (int n : mesh.nodes_on(BoundaryKind::Contact)) add(2 * n + 1, -die_speed);
  return bc;
}

Eigen::VectorXd homogeneous_guess(const Coords& coords, double die_speed) {
  const double h = coords.col(1).maxCoeff();
  Eigen::VectorXd v(2 * coords.rows());
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    v(2 * i) = die_speed * coords(i, 0) / h;
    v(2 * i + 1) = -die_speed * coords(i, 1) / h;
  }
  return v;
}

namespace {

struct NewtonResult {
  int iterations = 0;
  double velocity_norm = 0.0;
  double residual_norm = 0.0;
};

NewtonResult newton(MechState& state, const MaterialModel& mat, const Mesh& mesh,
                    const std::vector<int>& free, const SolverOptions& opts, int budget,
                    int direct_iterations, SolveReport* report) {
  const auto nf = static_cast<Eigen::Index>(free.size());
  auto gather = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd out(nf);
    for (Eigen::Index i = 0; i < nf; ++i) out(i) = full(free[i]);
    return out;
  };

  NewtonResult res;
  bool have_update = false;
  MechAssembly asm_ = assemble_mech(state, mat, mesh, true,
                                    direct_iterations > 0 ? Linearization::Direct : Linearization::Newton);
  while (true) {
    const Eigen::VectorXd rf = gather(asm_.residual);
    res.residual_norm = rf.norm();
    if (have_update && res.velocity_norm <= opts.tol_v && res.residual_norm <= opts.tol_r) break;
    if (res.iterations >= budget) {
      throw NoConvergenceError("solve_mech_step: no convergence after " +
                                   std::to_string(res.iterations) + " iterations (velocity norm " +
                                   std::to_string(res.velocity_norm) + ", residual norm " +
                                   std::to_string(res.residual_norm) + ")",
                               res.velocity_norm, res.residual_norm);
    }

    Eigen::MatrixXd kff(nf, nf);
    for (Eigen::Index j = 0; j < nf; ++j) {
      for (Eigen::Index i = 0; i < nf; ++i) kff(i, j) = asm_.jacobian(free[i], free[j]);
    }
    Eigen::VectorXd delta;
    Eigen::LLT<Eigen::MatrixXd> llt(kff);
    if (llt.info() == Eigen::Success) {
      delta = llt.solve(-rf);
    } else {
      delta = kff.ldlt().solve(-rf);
    }

    // Backtracking on the functional; near the solution the predicted
    // decrease falls below rounding and the full step is taken.
    const double slope = rf.dot(delta);
    double alpha = 1.0;
    if (slope < 0.0 && -slope > 1e-13 * (std::abs(asm_.energy) + 1.0)) {
      MechState trial = state;
      while (true) {
        trial.velocity = state.velocity;
        for (Eigen::Index i = 0; i < nf; ++i) trial.velocity(free[i]) += alpha * delta(i);
        const double e_trial = assemble_mech(trial, mat, mesh, false).energy;
        if (e_trial <= asm_.energy + 1e-4 * alpha * slope || alpha < 1e-8) break;
        alpha *= 0.5;
      }
    }
    for (Eigen::Index i = 0; i < nf; ++i) state.velocity(free[i]) += alpha * delta(i);
    res.velocity_norm = alpha * delta.norm() / std::max(state.velocity.norm(), 1e-300);
    have_update = true;
    ++res.iterations;

    const Linearization lin =
        res.iterations < direct_iterations ? Linearization::Direct : Linearization::Newton;
    asm_ = assemble_mech(state, mat, mesh, true, lin);
    if (report) {
      report->energy.push_back(asm_.energy);
      report->step_lengths.push_back(alpha);
    }
  }
  return res;
}

}  // namespace

MechState solve_mech_step(MechState state, const MaterialModel& mat, const Mesh& mesh,
                          const VelocityBc& bc, const SolverOptions& opts, SolveReport* report) {
  mat.validate();
  const int ndof = 2 * mesh.num_nodes();
  if (state.velocity.size() != ndof) state.velocity = Eigen::VectorXd::Zero(ndof);
  std::vector<bool> fixed(static_cast<std::size_t>(ndof), false);
  for (std::size_t i = 0; i < bc.dofs.size(); ++i) {
    state.velocity(bc.dofs[i]) = bc.values[i];
    fixed[static_cast<std::size_t>(bc.dofs[i])] = true;
  }
  std::vector<int> free;
  for (int d = 0; d < ndof; ++d) {
    if (!fixed[static_cast<std::size_t>(d)]) free.push_back(d);
  }

  update_rates(state, mat, mesh);
  if (state.contact_flow_stress.size() != static_cast<Eigen::Index>(mesh.edges.size())) {
    refresh_contact_flow_stress(state, mesh);
  }

  SolveReport local;
  SolveReport& rep = report ? *report : local;
  rep = SolveReport{};
  int direct = opts.direct_iterations;
  for (int outer = 0;; ++outer) {
    const NewtonResult r =
        newton(state, mat, mesh, free, opts, opts.max_iter - rep.iterations, direct, &rep);
    direct = 0;
    rep.iterations += r.iterations;
    rep.velocity_norm = r.velocity_norm;
    rep.residual_norm = r.residual_norm;
    update_rates(state, mat, mesh);
    if (mat.friction == 0.0) break;
    const double change = refresh_contact_flow_stress(state, mesh);
    if (change <= opts.shear_update_tol) break;
    if (outer + 1 >= opts.max_shear_updates) {
      spdlog::warn("solve_mech_step: friction flow stress still changing by {:.3g} after {} updates",
                   change, outer + 1);
      break;
    }
    ++rep.shear_updates;
  }
  return state;
}

}  // namespace stpod::fem
