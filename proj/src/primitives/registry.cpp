#include "geoprog/primitives/registry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "geoprog/error.hpp"
#include "geoprog/primitives/distance.hpp"
#include "geoprog/primitives/raster.hpp"

namespace geoprog {

std::string Signature::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += kind_name(args[i]);
  }
  out += ") -> ";
  out += kind_name(result);
  return out;
}

void PrimitiveRegistry::add(PrimitiveEntry entry) {
  if (entry.name.empty()) throw std::invalid_argument("primitive name is empty");
  if (entry.description.empty()) throw std::invalid_argument("primitive " + entry.name + " has no description");
  if (entry.overloads.empty()) throw std::invalid_argument("primitive " + entry.name + " has no signature");
  if (!entry.fn) throw std::invalid_argument("primitive " + entry.name + " has no implementation");
  for (const auto& sig : entry.overloads) {
    if (sig.args.empty()) throw std::invalid_argument("primitive " + entry.name + " is nullary");
    if (sig.result == Kind::Input || sig.result == Kind::Text)
      throw std::invalid_argument("primitive " + entry.name + " returns a non-value kind");
  }
  if (entries_.contains(entry.name)) throw std::invalid_argument("duplicate primitive " + entry.name);
  auto name = entry.name;
  entries_.emplace(std::move(name), std::move(entry));
}

bool PrimitiveRegistry::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

const PrimitiveEntry* PrimitiveRegistry::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

const PrimitiveEntry& PrimitiveRegistry::at(std::string_view name) const {
  if (const auto* e = find(name)) return *e;
  throw std::out_of_range("no primitive named " + std::string(name));
}

std::optional<std::size_t> PrimitiveRegistry::resolve(std::string_view name, std::span<const Kind> args) const {
  const auto* entry = find(name);
  if (!entry) return std::nullopt;
  auto matches = [&](const Signature& sig, bool promote) {
    if (sig.args.size() != args.size()) return false;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (sig.args[i] == args[i]) continue;
      if (promote && sig.args[i] == Kind::Grid && args[i] == Kind::Mask) continue;
      return false;
    }
    return true;
  };
  for (bool promote : {false, true})
    for (std::size_t i = 0; i < entry->overloads.size(); ++i)
      if (matches(entry->overloads[i], promote)) return i;
  return std::nullopt;
}

std::vector<std::string> PrimitiveRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::string PrimitiveRegistry::catalog() const {
  std::ostringstream os;
  for (const auto& [name, entry] : entries_)
    for (const auto& sig : entry.overloads) os << name << sig.to_string() << ": " << entry.description << '\n';
  return os.str();
}

const std::vector<std::string>& scalar_field_names() {
  static const std::vector<std::string> names{"temperature", "precipitation", "nightlight", "elevation"};
  return names;
}

namespace {

using K = Kind;

const Value& val(const Operand& op) { return *op.value; }

void check_shape(std::size_t w1, std::size_t h1, std::size_t w2, std::size_t h2) {
  if (w1 != w2 || h1 != h2)
    throw ShapeMismatch("grid shapes differ: " + std::to_string(w1) + "x" + std::to_string(h1) + " vs " +
                        std::to_string(w2) + "x" + std::to_string(h2));
}

template <typename F>
Value unary(const Value& a, F f) {
  if (a.is_scalar()) return f(a.scalar());
  Grid g = as_grid(a);
  for (auto& c : g.cells) c = f(c);
  return g;
}

template <typename F>
Value binary(const Value& a, const Value& b, F f) {
  if (a.is_scalar() && b.is_scalar()) return f(a.scalar(), b.scalar());
  if (a.is_scalar()) {
    Grid g = as_grid(b);
    const double s = a.scalar();
    for (auto& c : g.cells) c = f(s, c);
    return g;
  }
  Grid g = as_grid(a);
  if (b.is_scalar()) {
    const double s = b.scalar();
    for (auto& c : g.cells) c = f(c, s);
    return g;
  }
  if (b.kind() == Kind::Mask) {
    const Mask& m = b.mask();
    check_shape(g.width, g.height, m.width, m.height);
    for (std::size_t i = 0; i < g.size(); ++i) g.cells[i] = f(g.cells[i], static_cast<double>(m.cells[i]));
  } else {
    const Grid& o = b.grid();
    check_shape(g.width, g.height, o.width, o.height);
    for (std::size_t i = 0; i < g.size(); ++i) g.cells[i] = f(g.cells[i], o.cells[i]);
  }
  return g;
}

template <typename F>
Value logical(const Value& a, const Value& b, F f) {
  if (a.kind() == Kind::Bool) return Value::boolean(f(a.boolean(), b.boolean()));
  Mask m = a.mask();
  const Mask& o = b.mask();
  check_shape(m.width, m.height, o.width, o.height);
  for (std::size_t i = 0; i < m.size(); ++i) m.cells[i] = f(m.cells[i] != 0, o.cells[i] != 0) ? 1 : 0;
  return m;
}

template <typename F>
Value reduce(const Value& a, F f) {
  const Grid g = as_grid(a);
  return f(g.cells);
}

std::vector<Signature> numeric_binary() {
  return {{{K::Scalar, K::Scalar}, K::Scalar},
          {{K::Grid, K::Grid}, K::Grid},
          {{K::Grid, K::Scalar}, K::Grid},
          {{K::Scalar, K::Grid}, K::Grid}};
}

std::vector<Signature> numeric_unary() { return {{{K::Scalar}, K::Scalar}, {{K::Grid}, K::Grid}}; }

PrimitiveEntry field_entry(const std::string& field, std::string description) {
  return {field, std::move(description), {{{K::Input}, K::Scalar}},
          [field](std::span<const Operand>, const CallContext& ctx) -> Value {
            auto it = ctx.input.scalar_fields.find(field);
            if (it == ctx.input.scalar_fields.end())
              throw UnknownField("observation " + ctx.input.id + " has no field \"" + field + "\"");
            return it->second;
          }};
}

}  // namespace

PrimitiveRegistry default_registry(RegistryOptions options) {
  PrimitiveRegistry reg(options);
  const double eps = options.div_epsilon;
  const DistanceMetric metric = options.distance;

  reg.add({"mask",
           "binary mask of where the named land-use concept occurs in the observation's imagery",
           {{{K::Input, K::Text}, K::Mask}},
           [](std::span<const Operand> a, const CallContext& ctx) -> Value {
             return ctx.masks.mask(ctx.input, a[1].text);
           },
           TextDomain::Concept});

  reg.add({"scalar_field",
           "named scalar measurement of the location: temperature (deg C), precipitation (mm/yr), "
           "nightlight (intensity) or elevation (m)",
           {{{K::Input, K::Text}, K::Scalar}},
           [](std::span<const Operand> a, const CallContext& ctx) -> Value {
             const std::string name(a[1].text);
             const auto& allowed = scalar_field_names();
             auto it = ctx.input.scalar_fields.find(name);
             if (std::find(allowed.begin(), allowed.end(), name) == allowed.end() ||
                 it == ctx.input.scalar_fields.end())
               throw UnknownField("unknown scalar field \"" + name + "\"");
             return it->second;
           },
           TextDomain::ScalarField});
  reg.add(field_entry("temperature", "average annual temperature at the location in degrees Celsius"));
  reg.add(field_entry("precipitation", "average annual precipitation at the location in mm per year"));
  reg.add(field_entry("nightlight", "nightlight intensity at the location"));
  reg.add(field_entry("elevation", "elevation of the location in meters"));

  reg.add({"area_fraction", "fraction of cells set in a mask, in [0, 1]", {{{K::Mask}, K::Scalar}},
           [](std::span<const Operand> a, const CallContext&) -> Value {
             const Mask& m = val(a[0]).mask();
             std::size_t ones = 0;
             for (auto c : m.cells) ones += c;
             return static_cast<double>(ones) / static_cast<double>(m.size());
           }});
  reg.add({"distance_transform",
           "per-cell distance (in cells) to the nearest set cell of a mask; width+height everywhere if the mask is empty",
           {{{K::Mask}, K::Grid}},
           [metric](std::span<const Operand> a, const CallContext&) -> Value {
             return distance_transform(val(a[0]).mask(), metric);
           }});

  reg.add({"add", "elementwise sum", numeric_binary(), [](std::span<const Operand> a, const CallContext&) {
             return binary(val(a[0]), val(a[1]), [](double x, double y) { return x + y; });
           }});
  reg.add({"sub", "elementwise difference", numeric_binary(), [](std::span<const Operand> a, const CallContext&) {
             return binary(val(a[0]), val(a[1]), [](double x, double y) { return x - y; });
           }});
  reg.add({"mul", "elementwise product", numeric_binary(), [](std::span<const Operand> a, const CallContext&) {
             return binary(val(a[0]), val(a[1]), [](double x, double y) { return x * y; });
           }});
  reg.add({"div", "elementwise quotient; denominators smaller than epsilon in magnitude are replaced by +/-epsilon",
           numeric_binary(), [eps](std::span<const Operand> a, const CallContext&) {
             return binary(val(a[0]), val(a[1]), [eps](double x, double y) {
               if (std::abs(y) < eps) y = std::signbit(y) ? -eps : eps;
               return x / y;
             });
           }});

  auto max_overloads = numeric_binary();
  max_overloads.push_back({{K::Grid}, K::Scalar});
  reg.add({"max", "elementwise maximum of two operands, or the largest cell of one grid", max_overloads,
           [](std::span<const Operand> a, const CallContext&) -> Value {
             if (a.size() == 1)
               return reduce(val(a[0]), [](const std::vector<double>& c) { return *std::max_element(c.begin(), c.end()); });
             return binary(val(a[0]), val(a[1]), [](double x, double y) { return std::max(x, y); });
           }});
  auto min_overloads = numeric_binary();
  min_overloads.push_back({{K::Grid}, K::Scalar});
  reg.add({"min", "elementwise minimum of two operands, or the smallest cell of one grid", min_overloads,
           [](std::span<const Operand> a, const CallContext&) -> Value {
             if (a.size() == 1)
               return reduce(val(a[0]), [](const std::vector<double>& c) { return *std::min_element(c.begin(), c.end()); });
             return binary(val(a[0]), val(a[1]), [](double x, double y) { return std::min(x, y); });
           }});

  reg.add({"log1p", "elementwise log(1 + x); x must be > -1", numeric_unary(),
           [](std::span<const Operand> a, const CallContext&) {
             return unary(val(a[0]), [](double x) {
               if (!(x > -1.0)) throw DomainError("log1p of " + std::to_string(x));
               return std::log1p(x);
             });
           }});
  reg.add({"log", "elementwise natural logarithm; x must be > 0", numeric_unary(),
           [](std::span<const Operand> a, const CallContext&) {
             return unary(val(a[0]), [](double x) {
               if (!(x > 0.0)) throw DomainError("log of " + std::to_string(x));
               return std::log(x);
             });
           }});
  reg.add({"sqrt", "elementwise square root; x must be >= 0", numeric_unary(),
           [](std::span<const Operand> a, const CallContext&) {
             return unary(val(a[0]), [](double x) {
               if (x < 0.0 || std::isnan(x)) throw DomainError("sqrt of " + std::to_string(x));
               return std::sqrt(x);
             });
           }});
  reg.add({"abs", "elementwise absolute value", numeric_unary(), [](std::span<const Operand> a, const CallContext&) {
             return unary(val(a[0]), [](double x) { return std::abs(x); });
           }});
  reg.add({"negate", "elementwise negation", numeric_unary(), [](std::span<const Operand> a, const CallContext&) {
             return unary(val(a[0]), [](double x) { return -x; });
           }});

  reg.add({"threshold", "mask of grid cells strictly greater than the threshold", {{{K::Grid, K::Scalar}, K::Mask}},
           [](std::span<const Operand> a, const CallContext&) -> Value {
             const Grid g = as_grid(val(a[0]));
             const double t = val(a[1]).scalar();
             Mask m(g.width, g.height);
             for (std::size_t i = 0; i < g.size(); ++i) m.cells[i] = g.cells[i] > t ? 1 : 0;
             return m;
           }});
  reg.add({"greater", "true when the first scalar is strictly greater than the second",
           {{{K::Scalar, K::Scalar}, K::Bool}}, [](std::span<const Operand> a, const CallContext&) {
             return Value::boolean(val(a[0]).scalar() > val(a[1]).scalar());
           }});
  reg.add({"where", "select the second operand where the condition holds and the third elsewhere (cellwise for masks)",
           {{{K::Bool, K::Scalar, K::Scalar}, K::Scalar},
            {{K::Mask, K::Grid, K::Grid}, K::Grid},
            {{K::Mask, K::Scalar, K::Scalar}, K::Grid}},
           [](std::span<const Operand> a, const CallContext&) -> Value {
             const Value& cond = val(a[0]);
             if (cond.kind() == Kind::Bool) return cond.boolean() ? val(a[1]) : val(a[2]);
             const Mask& m = cond.mask();
             Grid out(m.width, m.height);
             auto cell = [&](const Value& v, std::size_t i) {
               if (v.is_scalar()) return v.scalar();
               if (v.kind() == Kind::Mask) return static_cast<double>(v.mask().cells[i]);
               return v.grid().cells[i];
             };
             for (const Value* v : {&val(a[1]), &val(a[2])}) {
               if (v->kind() == Kind::Grid) check_shape(m.width, m.height, v->grid().width, v->grid().height);
               if (v->kind() == Kind::Mask) check_shape(m.width, m.height, v->mask().width, v->mask().height);
             }
             for (std::size_t i = 0; i < m.size(); ++i) out.cells[i] = m.cells[i] ? cell(val(a[1]), i) : cell(val(a[2]), i);
             return out;
           }});

  reg.add({"and", "cellwise logical and of two masks (or of two booleans)",
           {{{K::Mask, K::Mask}, K::Mask}, {{K::Bool, K::Bool}, K::Bool}},
           [](std::span<const Operand> a, const CallContext&) {
             return logical(val(a[0]), val(a[1]), [](bool x, bool y) { return x && y; });
           }});
  reg.add({"or", "cellwise logical or of two masks (or of two booleans)",
           {{{K::Mask, K::Mask}, K::Mask}, {{K::Bool, K::Bool}, K::Bool}},
           [](std::span<const Operand> a, const CallContext&) {
             return logical(val(a[0]), val(a[1]), [](bool x, bool y) { return x || y; });
           }});
  reg.add({"not", "cellwise complement of a mask (or negation of a boolean)",
           {{{K::Mask}, K::Mask}, {{K::Bool}, K::Bool}}, [](std::span<const Operand> a, const CallContext&) -> Value {
             const Value& v = val(a[0]);
             if (v.kind() == Kind::Bool) return Value::boolean(!v.boolean());
             Mask m = v.mask();
             for (auto& c : m.cells) c = c ? 0 : 1;
             return m;
           }});

  reg.add({"mean", "mean of all grid cells", {{{K::Grid}, K::Scalar}}, [](std::span<const Operand> a, const CallContext&) {
             return reduce(val(a[0]), [](const std::vector<double>& c) {
               double s = 0.0;
               for (double x : c) s += x;
               return s / static_cast<double>(c.size());
             });
           }});
  reg.add({"sum", "sum of all grid cells", {{{K::Grid}, K::Scalar}}, [](std::span<const Operand> a, const CallContext&) {
             return reduce(val(a[0]), [](const std::vector<double>& c) {
               double s = 0.0;
               for (double x : c) s += x;
               return s;
             });
           }});
  return reg;
}

}  // namespace geoprog
