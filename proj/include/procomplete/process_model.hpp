#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace procomplete {

enum class ElementKind {
  StartEvent,
  EndEvent,
  IntermediateEvent,
  Task,
  ExclusiveGateway,
  ParallelGateway,
  InclusiveGateway,
  Other,
};

/// Type of a flow node. `Other` keeps the BPMN tag it was parsed from.
class ElementType {
 public:
  ElementType() = default;
  ElementType(ElementKind kind);  // NOLINT(google-explicit-constructor)

  static ElementType other(std::string tag);

  /// Maps a BPMN local tag name (e.g. "userTask") to its element type.
  /// Task and event variants collapse onto Task / IntermediateEvent.
  static ElementType from_tag(std::string_view tag);

  ElementKind kind() const noexcept { return kind_; }
  const std::string& other_tag() const noexcept { return tag_; }

  /// BPMN tag used when writing this type back out.
  std::string tag() const;

  /// Human-readable name used verbatim in slice text ("Exclusive Gateway").
  std::string display_name() const;

  bool is_gateway() const noexcept;
  bool is_end_event() const noexcept { return kind_ == ElementKind::EndEvent; }
  bool is_start_event() const noexcept { return kind_ == ElementKind::StartEvent; }

  friend bool operator==(const ElementType&, const ElementType&) = default;
  friend auto operator<=>(const ElementType&, const ElementType&) = default;

 private:
  ElementKind kind_ = ElementKind::Task;
  std::string tag_;
};

struct Node {
  std::string id;
  std::optional<std::string> label;
  ElementType type;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Flow {
  std::string id;
  std::string source;
  std::string target;

  friend bool operator==(const Flow&, const Flow&) = default;
};

/// Directed graph of flow nodes connected by sequence flows. Immutable once
/// constructed; adjacency lists keep flow-declaration order.
class ProcessGraph {
 public:
  ProcessGraph() = default;

  /// Throws Error(InvalidArgument) on empty/duplicate node ids and
  /// Error(DanglingFlow) when a flow names an unknown node.
  ProcessGraph(std::string process_id, std::vector<Node> nodes,
               std::vector<Flow> flows);

  const std::string& process_id() const noexcept { return process_id_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Flow>& flows() const noexcept { return flows_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Start/end event ids in declaration order. Partially built models may
  /// have neither.
  std::vector<std::string> starts() const;
  std::vector<std::string> ends() const;

  bool contains(std::string_view id) const;
  /// Throws Error(UnknownNode).
  std::size_t index_of(std::string_view id) const;
  const Node& node(std::string_view id) const { return nodes_[index_of(id)]; }
  const Node& node_at(std::size_t index) const { return nodes_[index]; }

  /// Flow indices leaving / entering the node at `index`.
  std::span<const std::size_t> out_flows(std::size_t index) const {
    return out_[index];
  }
  std::span<const std::size_t> in_flows(std::size_t index) const {
    return in_[index];
  }
  std::size_t flow_source(std::size_t flow) const { return flow_ends_[flow].first; }
  std::size_t flow_target(std::size_t flow) const { return flow_ends_[flow].second; }

  /// Distinct neighbours in flow-declaration order. Throw Error(UnknownNode).
  std::vector<Node> successors(std::string_view id) const;
  std::vector<Node> predecessors(std::string_view id) const;

  /// Node indices that seed traversals: start events, or nodes without
  /// incoming flows when the model has no start event.
  std::vector<std::size_t> roots() const;

  /// Same graph under another process id.
  ProcessGraph renamed(std::string process_id) const;

  /// Subgraph induced by the given node ids (flows among them only).
  ProcessGraph induced(std::span<const std::string> ids) const;

 private:
  std::string process_id_;
  std::vector<Node> nodes_;
  std::vector<Flow> flows_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::pair<std::size_t, std::size_t>> flow_ends_;
};

/// Node indices in depth-first discovery order from the roots, following
/// outgoing flows in declaration order. With `include_unreached`, nodes not
/// reachable from a root are appended, each starting a new traversal.
std::vector<std::size_t> depth_first_order(const ProcessGraph& g,
                                           bool include_unreached = false);

/// Parses a BPMN 2.0 document; one graph per `process` element. Only flow
/// nodes and sequence flows that are direct children of a process are read.
/// Throws Error(MalformedXml | NoProcessFound | DanglingFlow).
std::vector<ProcessGraph> parse_bpmn(std::string_view xml);

/// Serializes graphs as a BPMN 2.0 document that parse_bpmn reads back
/// without loss of ids, labels, types or flows.
std::string write_bpmn(std::span<const ProcessGraph> graphs);

/// Removes gateways, reconnecting each predecessor to every non-gateway
/// node reachable through a chain of gateways.
ProcessGraph contract_gateways(const ProcessGraph& g);

}  // namespace procomplete
