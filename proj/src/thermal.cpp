#include "stpod/thermal.hpp"

#include <string>

#include "stpod/errors.hpp"

namespace stpod::fem {

ThermalState ThermalState::uniform(const Mesh& mesh, double t0) {
  ThermalState th;
  th.temperature = Eigen::VectorXd::Constant(mesh.num_nodes(), t0);
  th.capacity = Eigen::VectorXd::Zero(mesh.num_nodes());
  th.conduction = Eigen::MatrixXd::Zero(mesh.num_nodes(), mesh.num_nodes());
  th.source = Eigen::VectorXd::Zero(mesh.num_nodes());
  return th;
}

ThermalState thermal_step(const ThermalState& th, const MechState& mech, const Mesh& mesh,
                          const MaterialModel& mat, double dt, double theta) {
  const int n = mesh.num_nodes();
  if (th.temperature.size() != n) throw DimensionError("thermal_step: temperature size mismatch");
  if (static_cast<int>(mech.gauss.size()) != mesh.num_elems()) {
    throw DimensionError("thermal_step: mechanical state has no Gauss data for this mesh");
  }
  if (!(dt > 0.0)) throw InvalidArgumentError("thermal_step: time step must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgumentError("thermal_step: theta must lie in [0, 1]");

  ThermalState out;
  out.capacity = Eigen::VectorXd::Zero(n);
  out.conduction = Eigen::MatrixXd::Zero(n, n);
  out.source = Eigen::VectorXd::Zero(n);

  const auto& pts = gauss_points_2x2();
  for (int e = 0; e < mesh.num_elems(); ++e) {
    const auto x = element_coords(mesh, mech.coords, e);
    for (int q = 0; q < 4; ++q) {
      const ShapeEval s = shape_functions(pts[q](0), pts[q](1));
      const Eigen::Matrix2d jac = s.dn * x;
      const double det = jac.determinant();
      if (!(det > 0.0)) {
        throw DegenerateElementError("thermal_step: element " + std::to_string(e) + " is inverted", e);
      }
      const Eigen::Matrix<double, 2, 4> dx = jac.inverse() * s.dn;
      const Eigen::Matrix4d ke = mat.conductivity * dx.transpose() * dx * det;
      const GaussState& g = mech.gauss[e][q];
      const double heat = mat.taylor_quinney * g.flow_stress * g.strain_rate;
      for (int a = 0; a < 4; ++a) {
        const int na = mesh.elems[e][a];
        out.capacity(na) += mat.rho_c * s.n(a) * det;
        out.source(na) += heat * s.n(a) * det;
        for (int b = 0; b < 4; ++b) out.conduction(na, mesh.elems[e][b]) += ke(a, b);
      }
    }
  }

  Eigen::MatrixXd lhs = theta * dt * out.conduction;
  lhs.diagonal() += out.capacity;
  Eigen::VectorXd rhs = out.capacity.cwiseProduct(th.temperature) -
                        (1.0 - theta) * dt * (out.conduction * th.temperature) + dt * out.source;
  Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() != Eigen::Success) throw SingularSystemError("thermal_step: system matrix is not positive definite");
  out.temperature = llt.solve(rhs);
  return out;
}

}  // namespace stpod::fem
