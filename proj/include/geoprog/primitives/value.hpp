#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace geoprog {

/// Static kind of a DSL expression. Input and Text only appear as primitive
/// arguments (the program parameter and string literals); the remaining four
/// kinds are runtime values.
enum class Kind : std::uint8_t { Scalar, Grid, Mask, Bool, Input, Text };

std::string_view kind_name(Kind kind);

struct Grid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> cells;

  Grid() = default;
  Grid(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), cells(w * h, fill) {}

  std::size_t size() const { return cells.size(); }
  double& at(std::size_t x, std::size_t y) { return cells[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return cells[y * width + x]; }
  bool operator==(const Grid&) const = default;
};

/// Binary raster; every cell is exactly 0 or 1.
struct Mask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> cells;

  Mask() = default;
  Mask(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), cells(w * h, fill) {}

  std::size_t size() const { return cells.size(); }
  std::uint8_t& at(std::size_t x, std::size_t y) { return cells[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return cells[y * width + x]; }
  bool operator==(const Mask&) const = default;
};

class Value {
 public:
  Value() : data_(0.0) {}
  Value(double scalar) : data_(scalar) {}  // NOLINT(google-explicit-constructor)
  Value(Grid grid) : data_(std::move(grid)) {}  // NOLINT
  Value(Mask mask) : data_(std::move(mask)) {}  // NOLINT
  static Value boolean(bool b) {
    Value v;
    v.data_ = b;
    return v;
  }

  Kind kind() const;
  bool is_scalar() const { return std::holds_alternative<double>(data_); }

  double scalar() const { return get<double>("Scalar"); }
  const Grid& grid() const { return get<Grid>("Grid"); }
  const Mask& mask() const { return get<Mask>("Mask"); }
  bool boolean() const { return get<bool>("Bool"); }

  /// Approximate heap footprint, used by the primitive cache memory cap.
  std::size_t byte_size() const;

  bool operator==(const Value&) const = default;

 private:
  template <typename T>
  const T& get(const char* expected) const {
    if (const T* p = std::get_if<T>(&data_)) return *p;
    throw std::logic_error(std::string("value is not a ") + expected);
  }

  std::variant<double, Grid, Mask, bool> data_;
};

/// Promotes a Mask to a 0/1 Grid; Grids pass through.
Grid as_grid(const Value& value);

}  // namespace geoprog
