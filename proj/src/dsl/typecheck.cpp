#include "geoprog/dsl/typecheck.hpp"

#include <map>
#include <optional>

#include "geoprog/error.hpp"
#include "geoprog/dsl/printer.hpp"

namespace geoprog {

std::vector<std::string> TypeCheckResult::messages() const {
  std::vector<std::string> out;
  for (const auto& e : errors) out.push_back(std::to_string(e.pos.line) + ":" + std::to_string(e.pos.column) + ": " + e.message);
  return out;
}

TypeCheckFailed::TypeCheckFailed(const std::vector<std::string>& errors)
    : Error("TypeError", [&] {
        std::string m = "program does not typecheck:";
        for (const auto& e : errors) m += "\n  " + e;
        return m;
      }()) {}

namespace {

class Checker {
 public:
  Checker(const PrimitiveRegistry& registry, TypeCheckResult& result) : registry_(registry), result_(result) {}

  void bind(const std::string& name, std::optional<Kind> kind) { env_[name] = kind; }

  // nullopt means "already reported"; suppresses cascading errors.
  std::optional<Kind> infer(const Expr& e) {
    switch (e.type) {
      case Expr::Type::Number: return Kind::Scalar;
      case Expr::Type::String: return Kind::Text;
      case Expr::Type::Bool: return Kind::Bool;
      case Expr::Type::Var: {
        auto it = env_.find(e.name);
        if (it == env_.end()) {
          report("unbound identifier '" + e.name + "'", e.pos);
          return std::nullopt;
        }
        return it->second;
      }
      default: break;
    }

    std::vector<Kind> kinds;
    bool poisoned = false;
    for (const auto& a : e.args) {
      auto k = infer(*a);
      if (!k) poisoned = true;
      else kinds.push_back(*k);
    }
    const auto name = std::string(e.primitive());
    const auto* entry = registry_.find(name);
    if (!entry) {
      report("unknown primitive '" + name + "'", e.pos);
      return std::nullopt;
    }
    if (poisoned) return std::nullopt;
    auto overload = registry_.resolve(name, kinds);
    if (!overload) {
      std::string msg = "no overload of '" + name + "' accepts (";
      for (std::size_t i = 0; i < kinds.size(); ++i) msg += std::string(i ? ", " : "") + std::string(kind_name(kinds[i]));
      msg += "); expects ";
      for (std::size_t i = 0; i < entry->overloads.size(); ++i)
        msg += (i ? " | " : "") + entry->overloads[i].to_string();
      report(msg, e.pos);
      return std::nullopt;
    }
    return entry->overloads[*overload].result;
  }

  void report(std::string message, SourcePos pos) { result_.errors.push_back({std::move(message), pos}); }

 private:
  const PrimitiveRegistry& registry_;
  TypeCheckResult& result_;
  std::map<std::string, std::optional<Kind>> env_;
};

}  // namespace

TypeCheckResult typecheck(const FeatureProgram& program, const PrimitiveRegistry& registry) {
  TypeCheckResult result;
  Checker checker(registry, result);
  checker.bind(program.param, Kind::Input);
  for (const auto& b : program.bindings) checker.bind(b.name, checker.infer(*b.value));
  if (program.features.empty()) checker.report("program returns no features", {});
  for (const auto& f : program.features) {
    auto k = checker.infer(*f.value);
    if (k && *k != Kind::Scalar)
      checker.report("feature '" + f.name + "' must be Scalar, got " + std::string(kind_name(*k)), f.pos);
  }
  return result;
}

void require_well_typed(const FeatureProgram& program, const PrimitiveRegistry& registry) {
  auto result = typecheck(program, registry);
  if (!result.ok()) throw TypeCheckFailed(result.messages());
}

}  // namespace geoprog
