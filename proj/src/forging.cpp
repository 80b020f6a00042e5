#include "stpod/forging.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "stpod/errors.hpp"

namespace stpod::fem {

void ForgingConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgumentError("forging config: " + what); };
  if (nx < 1 || ny < 1) fail("mesh divisions must be positive");
  if (!(width > 0.0 && height > 0.0)) fail("bar dimensions must be positive");
  if (!(die_speed > 0.0)) fail("die speed must be positive");
  if (steps < 1) fail("number of steps must be positive");
  if (!(dt > 0.0)) fail("time step must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) fail("theta must lie in [0, 1]");
  if (solver.max_iter < 1) fail("max_iter must be positive");
  if (!(solver.tol_v > 0.0 && solver.tol_r > 0.0)) fail("tolerances must be positive");
  effective_material().validate();
}

MaterialModel ForgingConfig::effective_material() const {
  MaterialModel m = material;
  if (!(m.friction_v0 > 0.0)) m.friction_v0 = 1e-3 * die_speed;
  return m;
}

namespace {

using Setter = std::function<void(ForgingConfig&, const std::string&)>;

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

int to_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto real = [&t](const std::string& key, double ForgingConfig::*field) {
      t[key] = [field](ForgingConfig& c, const std::string& v) { c.*field = to_double(v); };
    };
    auto mat = [&t](const std::string& key, double MaterialModel::*field) {
      t[key] = [field](ForgingConfig& c, const std::string& v) { c.material.*field = to_double(v); };
    };
    auto integer = [&t](const std::string& key, int ForgingConfig::*field) {
      t[key] = [field](ForgingConfig& c, const std::string& v) { c.*field = to_int(v); };
    };
    integer("nx", &ForgingConfig::nx);
    integer("ny", &ForgingConfig::ny);
    integer("steps", &ForgingConfig::steps);
    real("width", &ForgingConfig::width);
    real("height", &ForgingConfig::height);
    real("die_speed", &ForgingConfig::die_speed);
    real("dt", &ForgingConfig::dt);
    real("initial_temperature", &ForgingConfig::initial_temperature);
    real("theta", &ForgingConfig::theta);
    mat("flow_c", &MaterialModel::flow_c);
    mat("flow_exponent", &MaterialModel::flow_exponent);
    mat("strain_rate_limit", &MaterialModel::strain_rate_limit);
    mat("penalty", &MaterialModel::penalty);
    mat("friction", &MaterialModel::friction);
    mat("friction_v0", &MaterialModel::friction_v0);
    mat("taylor_quinney", &MaterialModel::taylor_quinney);
    mat("rho_c", &MaterialModel::rho_c);
    mat("conductivity", &MaterialModel::conductivity);
    t["tol_v"] = [](ForgingConfig& c, const std::string& v) { c.solver.tol_v = to_double(v); };
    t["tol_r"] = [](ForgingConfig& c, const std::string& v) { c.solver.tol_r = to_double(v); };
    t["max_iter"] = [](ForgingConfig& c, const std::string& v) { c.solver.max_iter = to_int(v); };
    t["direct_iterations"] = [](ForgingConfig& c, const std::string& v) {
      c.solver.direct_iterations = to_int(v);
    };
    return t;
  }();
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ForgingConfig parse_forging_config(const std::string& text, const std::string& source) {
  ForgingConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(where + ": unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const std::logic_error&) {
      throw ParseError(where + ": bad value '" + value + "' for '" + key + "'");
    }
  }
  return cfg;
}

ForgingConfig load_forging_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_forging_config(ss.str(), path.string());
}

std::vector<Coords> integrate_positions(const Coords& reference, const Eigen::MatrixXd& velocity,
                                        double dt) {
  if (velocity.rows() != 2 * reference.rows()) {
    throw DimensionError("integrate_positions: velocity rows do not match 2 x node count");
  }
  std::vector<Coords> out{reference};
  for (Eigen::Index k = 0; k < velocity.cols(); ++k) {
    Coords next = out.back();
    for (Eigen::Index i = 0; i < reference.rows(); ++i) {
      next(i, 0) += dt * velocity(2 * i, k);
      next(i, 1) += dt * velocity(2 * i + 1, k);
    }
    out.push_back(std::move(next));
  }
  return out;
}

Eigen::MatrixXd stack_positions(const std::vector<Coords>& positions) {
  if (positions.empty()) return {};
  const Eigen::Index n = positions.front().rows();
  Eigen::MatrixXd out(2 * n, static_cast<Eigen::Index>(positions.size()));
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (positions[k].rows() != n) throw DimensionError("stack_positions: node counts differ");
    for (Eigen::Index i = 0; i < n; ++i) {
      out(2 * i, static_cast<Eigen::Index>(k)) = positions[k](i, 0);
      out(2 * i + 1, static_cast<Eigen::Index>(k)) = positions[k](i, 1);
    }
  }
  return out;
}

std::vector<Coords> unstack_positions(const Eigen::MatrixXd& stacked) {
  if (stacked.rows() % 2 != 0) throw DimensionError("unstack_positions: odd row count");
  std::vector<Coords> out;
  for (Eigen::Index k = 0; k < stacked.cols(); ++k) {
    Coords c(stacked.rows() / 2, 2);
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      c(i, 0) = stacked(2 * i, k);
      c(i, 1) = stacked(2 * i + 1, k);
    }
    out.push_back(std::move(c));
  }
  return out;
}

int activate_contact(Mesh& mesh, Coords& coords) {
  const std::vector<int> contact = mesh.nodes_on(BoundaryKind::Contact);
  if (contact.empty()) return 0;
  const double die = coords(contact.front(), 1);
  const double tol = 1e-9 * std::max(1.0, std::abs(die));
  int changed = 0;
  for (auto& edge : mesh.edges) {
    if (edge.kind != BoundaryKind::Free) continue;
    const bool a_on = coords(edge.a, 1) >= die - tol;
    const bool b_on = coords(edge.b, 1) >= die - tol;
    if (a_on) coords(edge.a, 1) = std::min(coords(edge.a, 1), die);
    if (b_on) coords(edge.b, 1) = std::min(coords(edge.b, 1), die);
    if (a_on && b_on) {
      edge.kind = BoundaryKind::Contact;
      ++changed;
    }
  }
  return changed;
}

ForgingResult run_forging(const ForgingConfig& config) {
  config.validate();
  const MaterialModel mat = config.effective_material();

  ForgingResult res;
  res.mesh = make_quarter_mesh(config.nx, config.ny, 0.5 * config.width, 0.5 * config.height);
  const Mesh& mesh = res.mesh;

  res.mech = MechState::initial(mesh);
  res.mech.velocity = homogeneous_guess(res.mech.coords, config.die_speed);
  res.thermal = ThermalState::uniform(mesh, config.initial_temperature);
  res.positions.push_back(res.mech.coords);

  res.velocity.kind = FieldKind::Velocity;
  res.velocity.parameter = mat.friction;
  res.velocity.units = std::string(default_units(FieldKind::Velocity));
  res.velocity.values.resize(2 * mesh.num_nodes(), config.steps);
  res.temperature.kind = FieldKind::Temperature;
  res.temperature.parameter = mat.friction;
  res.temperature.units = std::string(default_units(FieldKind::Temperature));
  res.temperature.values.resize(mesh.num_nodes(), config.steps);

  for (int k = 0; k < config.steps; ++k) {
    SolveReport rep;
    const VelocityBc bc = forging_bc(mesh, config.die_speed);
    try {
      res.mech = solve_mech_step(std::move(res.mech), mat, mesh, bc, config.solver, &rep);
      res.thermal = thermal_step(res.thermal, res.mech, mesh, mat, config.dt, config.theta);

      for (auto& elem : res.mech.gauss) {
        for (auto& g : elem) g.strain += g.strain_rate * config.dt;
      }
      for (int i = 0; i < mesh.num_nodes(); ++i) {
        res.mech.coords(i, 0) += config.dt * res.mech.velocity(2 * i);
        res.mech.coords(i, 1) += config.dt * res.mech.velocity(2 * i + 1);
      }
      if (activate_contact(res.mesh, res.mech.coords) > 0) refresh_contact_flow_stress(res.mech, mesh);
      check_jacobians(mesh, res.mech.coords);
    } catch (const DegenerateElementError& e) {
      throw DegenerateElementError("step " + std::to_string(k + 1) + ": " + e.what(), e.element());
    }

    res.velocity.values.col(k) = res.mech.velocity;
    res.temperature.values.col(k) = res.thermal.temperature;
    res.positions.push_back(res.mech.coords);

    StepLog log;
    log.step = k + 1;
    log.iterations = rep.iterations;
    log.shear_updates = rep.shear_updates;
    log.velocity_norm = rep.velocity_norm;
    log.residual_norm = rep.residual_norm;
    log.energy = rep.energy.empty() ? 0.0 : rep.energy.back();
    log.max_temperature = res.thermal.temperature.maxCoeff();
    log.height = res.mech.coords.col(1).maxCoeff();
    res.log.push_back(log);
    spdlog::debug("forging m={} step {}: {} iterations, {} friction updates, |dv|/|v|={:.2e}, |r|={:.2e}, Tmax={:.2f}",
                 mat.friction, log.step, log.iterations, log.shear_updates, log.velocity_norm,
                 log.residual_norm, log.max_temperature);
  }
  return res;
}

}  // namespace stpod::fem
