#include "geoprog/dsl/evaluator.hpp"

#include <cmath>

#include "geoprog/dsl/printer.hpp"
#include "geoprog/dsl/typecheck.hpp"
#include "geoprog/error.hpp"
#include "geoprog/util/parallel.hpp"

namespace geoprog {

namespace {

bool is_raster(Kind k) { return k == Kind::Grid || k == Kind::Mask; }

}  // namespace

CompiledProgram::CompiledProgram(FeatureProgram program, const PrimitiveRegistry& registry)
    : program_(std::make_shared<const FeatureProgram>(std::move(program))) {
  require_well_typed(*program_, registry);
  dag_ = ast_to_dag(*program_);
  nodes_.resize(dag_.size());
  for (const auto& node : dag_.nodes()) {
    NodeInfo& info = nodes_[node.id];
    switch (node.kind) {
      case NodeKind::Param:
        info.kind = Kind::Input;
        info.key = "$";
        break;
      case NodeKind::Constant: {
        const Expr& e = *node.expr;
        info.key = to_source(e);
        if (e.type == Expr::Type::String) {
          info.kind = Kind::Text;
          info.text = e.name;
        } else if (e.type == Expr::Type::Bool) {
          info.kind = Kind::Bool;
          info.literal = std::make_shared<const Value>(Value::boolean(e.flag));
        } else {
          info.kind = Kind::Scalar;
          info.literal = std::make_shared<const Value>(e.number);
        }
        break;
      }
      case NodeKind::Binding:
      case NodeKind::Return:
        if (node.kind == NodeKind::Binding) {
          const NodeInfo& src = nodes_[node.inputs[0]];
          info.kind = src.kind;
          info.key = src.key;
          info.text = src.text;
          info.literal = src.literal;
        }
        break;
      case NodeKind::Call: {
        const std::string name = node.label;
        info.entry = &registry.at(name);
        std::vector<Kind> kinds;
        info.key = name + "(";
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
          const NodeInfo& arg = nodes_[node.inputs[i]];
          kinds.push_back(arg.kind);
          info.key += (i ? "," : "") + arg.key;
          info.raster_cost = info.raster_cost || is_raster(arg.kind);
        }
        info.key += ")";
        // typecheck guarantees resolution succeeds
        info.kind = info.entry->overloads[*registry.resolve(name, kinds)].result;
        info.raster_cost = info.raster_cost || is_raster(info.kind);
        break;
      }
    }
  }
  live_ = dag_.live();
  for (const auto& node : dag_.nodes())
    if (live_[node.id] && node.kind == NodeKind::Call && nodes_[node.id].raster_cost) uses_rasters_ = true;
}

std::uint64_t CompiledProgram::step_cost(std::size_t cells) const {
  std::uint64_t cost = 0;
  for (const auto& node : dag_.nodes())
    if (live_[node.id] && node.kind == NodeKind::Call) cost += nodes_[node.id].raster_cost ? cells : 1;
  return cost;
}

class CompiledProgram::Run {
 public:
  Run(const CompiledProgram& prog, const InputDescriptor& input, const EvalEnv& env, const NodeOverrides* overrides)
      : prog_(prog), input_(input), env_(env), ctx_{input, *env.masks}, memo_(prog.dag_.size()) {
    deadline_ = std::chrono::steady_clock::now() + env.limits.timeout;
    if (overrides && !overrides->empty()) {
      overrides_ = overrides;
      tainted_.assign(prog.dag_.size(), false);
      for (const auto& node : prog.dag_.nodes()) {
        bool t = overrides->contains(node.id);
        for (NodeId in : node.inputs) t = t || tainted_[in];
        tainted_[node.id] = t;
      }
    }
    const std::size_t cells = prog.uses_rasters_ ? [&] {
      const Raster& r = env.masks->raster(input);
      return r.width * r.height;
    }() : 0;
    const auto cost = prog.step_cost(cells);
    if (cost > env.limits.step_budget)
      throw StepLimitExceeded("program needs " + std::to_string(cost) + " steps per observation, budget is " +
                              std::to_string(env.limits.step_budget));
  }

  std::shared_ptr<const Value> value(NodeId id) {
    if (memo_[id]) return memo_[id];
    if (overrides_) {
      if (auto it = overrides_->find(id); it != overrides_->end()) return memo_[id] = std::make_shared<const Value>(it->second);
    }
    const DagNode& node = prog_.dag_.node(id);
    const NodeInfo& info = prog_.nodes_[id];
    switch (node.kind) {
      case NodeKind::Constant: return memo_[id] = info.literal;
      case NodeKind::Binding: return memo_[id] = value(node.inputs[0]);
      case NodeKind::Call: return memo_[id] = call(node, info);
      default: return nullptr;
    }
  }

 private:
  std::shared_ptr<const Value> call(const DagNode& node, const NodeInfo& info) {
    const bool cacheable = env_.cache && (tainted_.empty() || !tainted_[node.id]);
    if (cacheable) {
      if (auto hit = env_.cache->get(input_.id, info.key)) return hit;
    }
    if (std::chrono::steady_clock::now() > deadline_)
      throw EvaluationTimeout("evaluation exceeded " + std::to_string(env_.limits.timeout.count()) + " ms");

    std::vector<std::shared_ptr<const Value>> held;
    std::vector<Operand> operands;
    held.reserve(node.inputs.size());
    operands.reserve(node.inputs.size());
    for (NodeId in : node.inputs) {
      const NodeInfo& arg = prog_.nodes_[in];
      Operand op;
      op.kind = arg.kind;
      if (arg.kind == Kind::Text) {
        op.text = arg.text;
      } else if (arg.kind != Kind::Input) {
        held.push_back(value(in));
        op.value = held.back().get();
        op.kind = op.value->kind();
      }
      operands.push_back(op);
    }
    auto result = std::make_shared<const Value>(info.entry->fn(operands, ctx_));
    if (cacheable) env_.cache->put(input_.id, info.key, result);
    return result;
  }

  const CompiledProgram& prog_;
  const InputDescriptor& input_;
  const EvalEnv& env_;
  CallContext ctx_;
  std::vector<std::shared_ptr<const Value>> memo_;
  const NodeOverrides* overrides_ = nullptr;
  std::vector<bool> tainted_;
  std::chrono::steady_clock::time_point deadline_;
};

std::vector<double> CompiledProgram::evaluate(const InputDescriptor& input, const EvalEnv& env,
                                              const NodeOverrides* overrides) const {
  Run run(*this, input, env, overrides);
  const DagNode& ret = dag_.node(dag_.return_node());
  std::vector<double> out;
  out.reserve(ret.inputs.size());
  for (std::size_t i = 0; i < ret.inputs.size(); ++i) {
    const double v = run.value(ret.inputs[i])->scalar();
    if (!std::isfinite(v)) throw DomainError("feature '" + dag_.feature_names()[i] + "' is not finite");
    out.push_back(v);
  }
  return out;
}

std::vector<Value> CompiledProgram::node_values(const InputDescriptor& input, const EvalEnv& env,
                                                std::span<const NodeId> nodes) const {
  Run run(*this, input, env, nullptr);
  std::vector<Value> out;
  out.reserve(nodes.size());
  for (NodeId id : nodes) {
    auto v = run.value(id);
    if (!v) throw std::invalid_argument("node " + std::to_string(id) + " has no runtime value");
    out.push_back(*v);
  }
  return out;
}

std::size_t FeatureTable::failures() const {
  std::size_t n = 0;
  for (const auto& e : errors) n += e.empty() ? 0 : 1;
  return n;
}

double FeatureTable::error_rate() const {
  return rows.empty() ? 0.0 : static_cast<double>(failures()) / static_cast<double>(rows.size());
}

std::string FeatureTable::first_error() const {
  for (const auto& e : errors)
    if (!e.empty()) return e;
  return {};
}

FeatureTable evaluate_table(const CompiledProgram& program, std::span<const InputDescriptor> inputs, const EvalEnv& env,
                            const NodeOverrides* overrides) {
  FeatureTable table;
  table.feature_names = program.feature_names();
  table.rows.resize(inputs.size());
  table.errors.resize(inputs.size());
  parallel_for(inputs.size(), env.threads, [&](std::size_t i) {
    try {
      table.rows[i] = program.evaluate(inputs[i], env, overrides);
    } catch (const Error& e) {
      table.errors[i] = e.code() + ": " + e.what();
    }
  });
  return table;
}

std::vector<double> evaluate(const FeatureProgram& program, const InputDescriptor& input,
                             const PrimitiveRegistry& registry, const MaskProvider& masks, const EvalLimits& limits) {
  CompiledProgram compiled(program, registry);
  EvalEnv env{&registry, &masks, nullptr, limits, 1};
  return compiled.evaluate(input, env);
}

}  // namespace geoprog
