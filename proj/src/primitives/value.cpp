#include "geoprog/primitives/value.hpp"

namespace geoprog {

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::Scalar: return "Scalar";
    case Kind::Grid: return "Grid";
    case Kind::Mask: return "Mask";
    case Kind::Bool: return "Bool";
    case Kind::Input: return "Input";
    case Kind::Text: return "Text";
  }
  return "?";
}

Kind Value::kind() const {
  switch (data_.index()) {
    case 0: return Kind::Scalar;
    case 1: return Kind::Grid;
    case 2: return Kind::Mask;
    default: return Kind::Bool;
  }
}

std::size_t Value::byte_size() const {
  switch (kind()) {
    case Kind::Grid: return sizeof(Value) + grid().cells.size() * sizeof(double);
    case Kind::Mask: return sizeof(Value) + mask().cells.size();
    default: return sizeof(Value);
  }
}

Grid as_grid(const Value& value) {
  if (value.kind() == Kind::Grid) return value.grid();
  const Mask& m = value.mask();
  Grid g(m.width, m.height);
  for (std::size_t i = 0; i < m.size(); ++i) g.cells[i] = m.cells[i];
  return g;
}

}  // namespace geoprog
