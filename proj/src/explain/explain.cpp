#include "geoprog/explain/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "geoprog/dsl/printer.hpp"
#include "geoprog/error.hpp"

namespace geoprog {

namespace {

// Mean of a node's value over observations; nullopt when any evaluation fails.
std::optional<Value> mean_value(const std::vector<Value>& values) {
  if (values.empty()) return std::nullopt;
  const double n = static_cast<double>(values.size());
  switch (values.front().kind()) {
    case Kind::Scalar: {
      double s = 0.0;
      for (const auto& v : values) s += v.scalar();
      return Value(s / n);
    }
    case Kind::Bool: {
      std::size_t t = 0;
      for (const auto& v : values) t += v.boolean() ? 1 : 0;
      return Value::boolean(2 * t >= values.size());
    }
    case Kind::Grid: {
      Grid g = values.front().grid();
      std::fill(g.cells.begin(), g.cells.end(), 0.0);
      for (const auto& v : values) {
        const auto& cells = v.grid().cells;
        if (cells.size() != g.cells.size()) return std::nullopt;
        for (std::size_t i = 0; i < cells.size(); ++i) g.cells[i] += cells[i];
      }
      for (auto& c : g.cells) c /= n;
      return Value(std::move(g));
    }
    case Kind::Mask: {
      Mask m = values.front().mask();
      std::vector<std::size_t> ones(m.cells.size(), 0);
      for (const auto& v : values) {
        const auto& cells = v.mask().cells;
        if (cells.size() != ones.size()) return std::nullopt;
        for (std::size_t i = 0; i < cells.size(); ++i) ones[i] += cells[i];
      }
      for (std::size_t i = 0; i < ones.size(); ++i) m.cells[i] = 2 * ones[i] >= values.size() ? 1 : 0;
      return Value(std::move(m));
    }
    default: return std::nullopt;
  }
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

ImportanceMap node_importance(const Candidate& candidate, const ObservationSet& subset, const FitnessContext& ctx) {
  ImportanceMap out;
  if (!candidate.valid || !candidate.compiled) return out;
  const CompiledProgram& program = *candidate.compiled;
  const ProgramDag& dag = program.dag();
  const double base = score(candidate, subset, ctx);
  const auto live = dag.live();

  std::vector<NodeId> targets;
  for (const auto& node : dag.nodes()) {
    if (node.kind != NodeKind::Call && node.kind != NodeKind::Binding) continue;
    if (program.node_kind(node.id) == Kind::Text || program.node_kind(node.id) == Kind::Input) continue;
    targets.push_back(node.id);
  }

  const EvalEnv train_env = ctx.env_for(*ctx.train);
  const EvalEnv eval_env = ctx.env_for(subset);
  for (NodeId id : targets) {
    NodeImportance imp;
    imp.node = id;
    imp.label = dag.node(id).label;
    imp.base_score = base;
    imp.ablated_score = base;
    if (!live[id]) {
      out[id] = imp;
      continue;
    }
    std::vector<Value> values;
    values.reserve(ctx.train->size());
    bool failed = false;
    for (const auto& in : ctx.train->inputs) {
      try {
        const NodeId one[] = {id};
        values.push_back(program.node_values(in, train_env, one).front());
      } catch (const Error&) {
        failed = true;
        break;
      }
    }
    std::optional<Value> neutral = failed ? std::nullopt : mean_value(values);
    if (!neutral) {
      imp.structural = true;
      out[id] = imp;
      continue;
    }
    NodeOverrides overrides{{id, *neutral}};
    const auto table = evaluate_table(program, subset.inputs, eval_env, &overrides);
    if (table.error_rate() > ctx.limits.max_error_rate) {
      imp.structural = true;
      out[id] = imp;
      continue;
    }
    std::vector<double> predictions(subset.size());
    const double fallback = candidate.head.log_target ? std::exp(candidate.head.intercept) : candidate.head.intercept;
    for (std::size_t i = 0; i < subset.size(); ++i)
      predictions[i] = table.ok(i) ? candidate.head.predict(table.rows[i]) : fallback;
    imp.ablated_score = ctx.metric.score(predictions, subset.targets);
    const double delta = imp.ablated_score - base;
    imp.importance = std::max(0.0, base > 0.0 ? delta / base : delta);
    if (!std::isfinite(imp.importance)) imp.structural = true, imp.importance = 0.0;
    out[id] = imp;
  }
  return out;
}

std::string export_dot(const Candidate& candidate, const ImportanceMap* importances) {
  const ProgramDag dag = candidate.compiled ? candidate.compiled->dag() : ast_to_dag(candidate.program);
  double max_importance = 0.0;
  if (importances)
    for (const auto& [id, imp] : *importances) max_importance = std::max(max_importance, imp.importance);

  std::string out = "digraph program {\n  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n";
  for (const auto& node : dag.nodes()) {
    std::string label = node.label, shape = "ellipse";
    switch (node.kind) {
      case NodeKind::Param: shape = "box"; break;
      case NodeKind::Constant: shape = "plaintext"; break;
      case NodeKind::Call: break;
      case NodeKind::Binding: shape = "box"; label = node.label + " ="; break;
      case NodeKind::Return: shape = "doublecircle"; break;
    }
    out += "  n" + std::to_string(node.id) + " [label=\"" + dot_escape(label) + "\", shape=" + shape + "];\n";
  }
  const auto& features = dag.feature_names();
  for (const auto& node : dag.nodes()) {
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const NodeId from = node.inputs[k];
      std::string attrs;
      const NodeImportance* imp = nullptr;
      if (importances) {
        auto it = importances->find(from);
        if (it != importances->end()) imp = &it->second;
      }
      if (!importances || !imp) {
        attrs = "color=black, penwidth=1.000";
      } else if (imp->structural) {
        attrs = "color=black, style=dashed, penwidth=1.000";
      } else {
        const double w = 1.0 + (max_importance > 0.0 ? 7.0 * imp->importance / max_importance : 0.0);
        attrs = "color=red, penwidth=" + fixed3(w);
      }
      if (node.kind == NodeKind::Return && k < features.size()) attrs += ", label=\"" + dot_escape(features[k]) + "\"";
      out += "  n" + std::to_string(from) + " -> n" + std::to_string(node.id) + " [" + attrs + "];\n";
    }
  }
  out += "}\n";
  return out;
}

std::string importance_json(const ImportanceMap& importances) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [id, imp] : importances)
    arr.push_back({{"node", id},
                   {"label", imp.label},
                   {"base_score", imp.base_score},
                   {"ablated_score", imp.ablated_score},
                   {"importance", imp.importance},
                   {"structural", imp.structural}});
  return arr.dump(1);
}

}  // namespace geoprog
