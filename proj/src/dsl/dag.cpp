#include "geoprog/dsl/dag.hpp"

#include <map>
#include <stdexcept>

#include "geoprog/dsl/printer.hpp"

namespace geoprog {

std::string_view node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Param: return "param";
    case NodeKind::Constant: return "constant";
    case NodeKind::Call: return "call";
    case NodeKind::Binding: return "binding";
    case NodeKind::Return: return "return";
  }
  return "?";
}

std::size_t ProgramDag::edge_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes_) n += node.inputs.size();
  return n;
}

std::vector<NodeId> ProgramDag::roots() const {
  std::vector<NodeId> out;
  for (const auto& node : nodes_)
    if (node.inputs.empty()) out.push_back(node.id);
  return out;
}

std::vector<NodeId> ProgramDag::leaves() const {
  std::vector<NodeId> out;
  for (const auto& node : nodes_)
    if (node.outputs.empty()) out.push_back(node.id);
  return out;
}

std::vector<bool> ProgramDag::live() const {
  std::vector<bool> live(nodes_.size(), false);
  live[return_node()] = true;
  for (std::size_t i = nodes_.size(); i-- > 0;)
    if (live[i])
      for (NodeId in : nodes_[i].inputs) live[in] = true;
  return live;
}

namespace {

class Builder {
 public:
  explicit Builder(std::vector<DagNode>& nodes) : nodes_(nodes) {}

  NodeId add(NodeKind kind, std::string label, std::vector<NodeId> inputs, const Expr* expr = nullptr) {
    const NodeId id = nodes_.size();
    for (NodeId in : inputs) nodes_[in].outputs.push_back(id);
    nodes_.push_back({id, kind, std::move(label), std::move(inputs), {}, expr, 0});
    return id;
  }

  NodeId expr(const Expr& e) {
    switch (e.type) {
      case Expr::Type::Var: {
        auto it = scope.find(e.name);
        if (it == scope.end()) throw std::invalid_argument("ast_to_dag: unbound identifier " + e.name);
        return it->second;
      }
      case Expr::Type::Number:
      case Expr::Type::String:
      case Expr::Type::Bool: return add(NodeKind::Constant, to_source(e), {}, &e);
      default: {
        std::vector<NodeId> inputs;
        for (const auto& a : e.args) inputs.push_back(expr(*a));
        return add(NodeKind::Call, std::string(e.primitive()), std::move(inputs), &e);
      }
    }
  }

  std::map<std::string, NodeId> scope;

 private:
  std::vector<DagNode>& nodes_;
};

}  // namespace

ProgramDag ast_to_dag(const FeatureProgram& program) {
  ProgramDag dag;
  Builder b(dag.nodes_);
  b.scope[program.param] = b.add(NodeKind::Param, program.param, {});
  for (std::size_t i = 0; i < program.bindings.size(); ++i) {
    const auto& binding = program.bindings[i];
    dag.owned_.push_back(binding.value);
    const NodeId value = b.expr(*binding.value);
    const NodeId id = b.add(NodeKind::Binding, binding.name, {value});
    dag.nodes_[id].binding_index = i;
    dag.binding_nodes_.push_back(id);
    b.scope[binding.name] = id;
  }
  std::vector<NodeId> feature_roots;
  for (const auto& f : program.features) {
    dag.owned_.push_back(f.value);
    feature_roots.push_back(b.expr(*f.value));
    dag.feature_names_.push_back(f.name);
  }
  b.add(NodeKind::Return, "return", std::move(feature_roots));
  return dag;
}

}  // namespace geoprog
