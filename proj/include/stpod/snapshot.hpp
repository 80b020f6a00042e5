#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace stpod {

/// Position holds nodal coordinates over time levels, interleaved like the
/// velocity.
enum class FieldKind { Velocity, Temperature, Factor, Position };

std::string_view to_string(FieldKind kind);
/// Throws ParseError on an unknown name.
FieldKind field_kind_from_string(std::string_view name);
/// Default physical units of a field kind ("mm/s", "degC", "1", "mm").
std::string_view default_units(FieldKind kind);

/// Dense n x m matrix whose columns are the states of one field at successive
/// time steps, for a single parameter value.
struct SnapshotMatrix {
  FieldKind kind = FieldKind::Velocity;
  double parameter = 0.0;
  Eigen::MatrixXd values;
  std::string units;
  /// POD mode of a reconstructed matrix; empty for raw FEM output.
  std::optional<int> mode;
};

}  // namespace stpod
