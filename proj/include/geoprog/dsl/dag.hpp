#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "geoprog/dsl/ast.hpp"

namespace geoprog {

using NodeId = std::size_t;

enum class NodeKind { Param, Constant, Call, Binding, Return };

std::string_view node_kind_name(NodeKind kind);

struct DagNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Call;
  /// Primitive name (Call), binding name (Binding), literal source text
  /// (Constant), parameter name (Param) or "return".
  std::string label;
  /// Producers in argument order. For the return node, one entry per feature.
  std::vector<NodeId> inputs;
  /// Consumers, one entry per edge (a node may feed the same consumer twice).
  std::vector<NodeId> outputs;
  /// Source expression for Constant and Call nodes.
  const Expr* expr = nullptr;
  /// Index of the defining binding for Binding nodes.
  std::size_t binding_index = 0;
};

/// Data-dependency DAG of a program. Edges run producer -> consumer. Node ids
/// are a topological order: param first, return last. Every literal
/// occurrence and every call occurrence is its own node; variable references
/// become edges from the referenced binding (or the param).
class ProgramDag {
 public:
  const std::vector<DagNode>& nodes() const { return nodes_; }
  const DagNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const;

  NodeId param() const { return 0; }
  NodeId return_node() const { return nodes_.size() - 1; }
  /// Binding node for each program binding, in declaration order.
  const std::vector<NodeId>& binding_nodes() const { return binding_nodes_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  std::vector<NodeId> roots() const;
  std::vector<NodeId> leaves() const;
  /// Nodes from which the return node is reachable (including itself).
  std::vector<bool> live() const;

 private:
  friend ProgramDag ast_to_dag(const FeatureProgram& program);
  std::vector<DagNode> nodes_;
  std::vector<NodeId> binding_nodes_;
  std::vector<std::string> feature_names_;
  // Keeps the expressions the nodes point into alive.
  std::vector<ExprPtr> owned_;
};

ProgramDag ast_to_dag(const FeatureProgram& program);

}  // namespace geoprog
