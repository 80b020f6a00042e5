#include "stpod/snapshot.hpp"

#include <string>

#include "stpod/errors.hpp"

namespace stpod {

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Velocity: return "velocity";
    case FieldKind::Temperature: return "temperature";
    case FieldKind::Factor: return "factor";
    case FieldKind::Position: return "position";
  }
  return "unknown";
}

FieldKind field_kind_from_string(std::string_view name) {
  if (name == "velocity") return FieldKind::Velocity;
  if (name == "temperature") return FieldKind::Temperature;
  if (name == "factor") return FieldKind::Factor;
  if (name == "position") return FieldKind::Position;
  throw ParseError("unknown field kind '" + std::string(name) + "'");
}

std::string_view default_units(FieldKind kind) {
  switch (kind) {
    case FieldKind::Velocity: return "mm/s";
    case FieldKind::Temperature: return "degC";
    case FieldKind::Factor: return "1";
    case FieldKind::Position: return "mm";
  }
  return "1";
}

}  // namespace stpod
