#include "procomplete/process_model.hpp"

#include <expat.h>

#include <algorithm>
#include <memory>
#include <set>
#include <unordered_set>

#include "procomplete/error.hpp"
#include "procomplete/text.hpp"

namespace procomplete {

// ---------------------------------------------------------------------------
// ElementType

ElementType::ElementType(ElementKind kind) : kind_(kind) {}

ElementType ElementType::other(std::string tag) {
  ElementType t(ElementKind::Other);
  t.tag_ = std::move(tag);
  return t;
}

ElementType ElementType::from_tag(std::string_view tag) {
  if (tag == "startEvent") return ElementKind::StartEvent;
  if (tag == "endEvent") return ElementKind::EndEvent;
  if (tag == "intermediateCatchEvent" || tag == "intermediateThrowEvent" ||
      tag == "boundaryEvent")
    return ElementKind::IntermediateEvent;
  if (tag == "task" || tag == "userTask" || tag == "serviceTask" ||
      tag == "scriptTask" || tag == "manualTask" || tag == "sendTask" ||
      tag == "receiveTask" || tag == "businessRuleTask")
    return ElementKind::Task;
  if (tag == "exclusiveGateway") return ElementKind::ExclusiveGateway;
  if (tag == "parallelGateway") return ElementKind::ParallelGateway;
  if (tag == "inclusiveGateway") return ElementKind::InclusiveGateway;
  return other(std::string(tag));
}

std::string ElementType::tag() const {
  switch (kind_) {
    case ElementKind::StartEvent: return "startEvent";
    case ElementKind::EndEvent: return "endEvent";
    case ElementKind::IntermediateEvent: return "intermediateThrowEvent";
    case ElementKind::Task: return "task";
    case ElementKind::ExclusiveGateway: return "exclusiveGateway";
    case ElementKind::ParallelGateway: return "parallelGateway";
    case ElementKind::InclusiveGateway: return "inclusiveGateway";
    case ElementKind::Other: return tag_;
  }
  return tag_;
}

std::string ElementType::display_name() const {
  switch (kind_) {
    case ElementKind::StartEvent: return "Start Event";
    case ElementKind::EndEvent: return "End Event";
    case ElementKind::IntermediateEvent: return "Intermediate Event";
    case ElementKind::Task: return "Task";
    case ElementKind::ExclusiveGateway: return "Exclusive Gateway";
    case ElementKind::ParallelGateway: return "Parallel Gateway";
    case ElementKind::InclusiveGateway: return "Inclusive Gateway";
    case ElementKind::Other: break;
  }
  // camelCase tag -> "Camel Case"
  std::string out;
  for (std::size_t i = 0; i < tag_.size(); ++i) {
    char c = tag_[i];
    if (i == 0 && c >= 'a' && c <= 'z') {
      out.push_back(static_cast<char>(c - 'a' + 'A'));
      continue;
    }
    if (c >= 'A' && c <= 'Z' && i > 0) out.push_back(' ');
    out.push_back(c);
  }
  return out;
}

bool ElementType::is_gateway() const noexcept {
  switch (kind_) {
    case ElementKind::ExclusiveGateway:
    case ElementKind::ParallelGateway:
    case ElementKind::InclusiveGateway:
      return true;
    case ElementKind::Other:
      return tag_.ends_with("Gateway");
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// ProcessGraph

ProcessGraph::ProcessGraph(std::string process_id, std::vector<Node> nodes,
                           std::vector<Flow> flows)
    : process_id_(std::move(process_id)),
      nodes_(std::move(nodes)),
      flows_(std::move(flows)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.empty())
      throw Error(ErrorCode::InvalidArgument,
                  "process '" + process_id_ + "' has a node without id");
    if (!index_.emplace(nodes_[i].id, i).second)
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate node id '" + nodes_[i].id + "'");
  }
  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  flow_ends_.reserve(flows_.size());
  for (std::size_t f = 0; f < flows_.size(); ++f) {
    auto src = index_.find(flows_[f].source);
    auto dst = index_.find(flows_[f].target);
    if (src == index_.end() || dst == index_.end())
      throw Error(ErrorCode::DanglingFlow,
                  "flow '" + flows_[f].id + "' references unknown node '" +
                      (src == index_.end() ? flows_[f].source
                                           : flows_[f].target) +
                      "'");
    flow_ends_.emplace_back(src->second, dst->second);
    out_[src->second].push_back(f);
    in_[dst->second].push_back(f);
  }
}

std::vector<std::string> ProcessGraph::starts() const {
  std::vector<std::string> ids;
  for (const auto& n : nodes_)
    if (n.type.is_start_event()) ids.push_back(n.id);
  return ids;
}

std::vector<std::string> ProcessGraph::ends() const {
  std::vector<std::string> ids;
  for (const auto& n : nodes_)
    if (n.type.is_end_event()) ids.push_back(n.id);
  return ids;
}

bool ProcessGraph::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

std::size_t ProcessGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end())
    throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(id) +
                                            "' in process '" + process_id_ +
                                            "'");
  return it->second;
}

std::vector<Node> ProcessGraph::successors(std::string_view id) const {
  std::vector<Node> out;
  std::vector<bool> seen(nodes_.size(), false);
  for (std::size_t f : out_[index_of(id)]) {
    std::size_t t = flow_ends_[f].second;
    if (seen[t]) continue;
    seen[t] = true;
    out.push_back(nodes_[t]);
  }
  return out;
}

std::vector<Node> ProcessGraph::predecessors(std::string_view id) const {
  std::vector<Node> out;
  std::vector<bool> seen(nodes_.size(), false);
  for (std::size_t f : in_[index_of(id)]) {
    std::size_t s = flow_ends_[f].first;
    if (seen[s]) continue;
    seen[s] = true;
    out.push_back(nodes_[s]);
  }
  return out;
}

std::vector<std::size_t> ProcessGraph::roots() const {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].type.is_start_event()) r.push_back(i);
  if (!r.empty()) return r;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (in_[i].empty()) r.push_back(i);
  return r;
}

ProcessGraph ProcessGraph::renamed(std::string process_id) const {
  ProcessGraph copy = *this;
  copy.process_id_ = std::move(process_id);
  return copy;
}

ProcessGraph ProcessGraph::induced(std::span<const std::string> ids) const {
  std::vector<bool> keep(nodes_.size(), false);
  for (const auto& id : ids) keep[index_of(id)] = true;
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (keep[i]) nodes.push_back(nodes_[i]);
  std::vector<Flow> flows;
  for (std::size_t f = 0; f < flows_.size(); ++f)
    if (keep[flow_ends_[f].first] && keep[flow_ends_[f].second])
      flows.push_back(flows_[f]);
  return ProcessGraph(process_id_, std::move(nodes), std::move(flows));
}

std::vector<std::size_t> depth_first_order(const ProcessGraph& g,
                                           bool include_unreached) {
  std::vector<std::size_t> order;
  std::vector<bool> seen(g.size(), false);
  auto visit = [&](std::size_t root) {
    if (seen[root]) return;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    seen[root] = true;
    order.push_back(root);
    while (!stack.empty()) {
      auto& [node, cursor] = stack.back();
      auto outs = g.out_flows(node);
      if (cursor == outs.size()) {
        stack.pop_back();
        continue;
      }
      std::size_t next = g.flow_target(outs[cursor++]);
      if (seen[next]) continue;
      seen[next] = true;
      order.push_back(next);
      stack.emplace_back(next, 0);
    }
  };
  for (std::size_t root : g.roots()) visit(root);
  if (include_unreached)
    for (std::size_t i = 0; i < g.size(); ++i) visit(i);
  return order;
}

// ---------------------------------------------------------------------------
// BPMN reading

namespace {

constexpr char kNsSeparator = '\x1f';

std::string_view local_name(const XML_Char* name) {
  std::string_view full(name);
  auto pos = full.rfind(kNsSeparator);
  return pos == std::string_view::npos ? full : full.substr(pos + 1);
}

const char* find_attr(const XML_Char** attrs, std::string_view wanted) {
  for (std::size_t i = 0; attrs[i] != nullptr; i += 2)
    if (local_name(attrs[i]) == wanted) return attrs[i + 1];
  return nullptr;
}

// Direct children of <process> that are not flow nodes.
bool is_non_flow_node(std::string_view tag) {
  static const std::unordered_set<std::string_view> kIgnored = {
      "laneSet",          "lane",
      "dataObject",       "dataObjectReference",
      "dataStoreReference", "dataInput",
      "dataOutput",       "textAnnotation",
      "association",      "group",
      "documentation",    "extensionElements",
      "ioSpecification",  "property",
      "auditing",         "monitoring",
      "categoryValue",    "messageFlow",
      "dataInputAssociation", "dataOutputAssociation",
      "incoming",         "outgoing",
      "supports",         "resourceRole",
      "performer",        "humanPerformer",
      "potentialOwner",   "correlationSubscription",
  };
  return kIgnored.contains(tag);
}

struct PendingProcess {
  std::string id;
  std::vector<Node> nodes;
  std::vector<Flow> flows;
  std::set<std::string> ids;
};

struct ParseState {
  std::vector<std::string> stack;  // local names of open elements
  std::size_t process_depth = 0;   // stack depth of the open <process>, 0 = none
  std::unique_ptr<PendingProcess> current;
  std::vector<PendingProcess> done;
  std::string error;
  std::size_t anonymous = 0;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto& st = *static_cast<ParseState*>(user);
  std::string_view tag = local_name(name);
  st.stack.emplace_back(tag);
  if (!st.error.empty()) return;

  if (tag == "process" && !st.current) {
    st.current = std::make_unique<PendingProcess>();
    const char* id = find_attr(attrs, "id");
    st.current->id = id && *id ? std::string(id)
                               : "process_" + std::to_string(st.anonymous++);
    st.process_depth = st.stack.size();
    return;
  }
  if (!st.current || st.stack.size() != st.process_depth + 1) return;

  const char* id = find_attr(attrs, "id");
  if (tag == "sequenceFlow") {
    const char* src = find_attr(attrs, "sourceRef");
    const char* dst = find_attr(attrs, "targetRef");
    if (!src || !dst) {
      st.error = "sequenceFlow without sourceRef/targetRef";
      return;
    }
    std::string flow_id =
        id ? std::string(id)
           : "flow_" + std::to_string(st.current->flows.size());
    st.current->flows.push_back({std::move(flow_id), src, dst});
    return;
  }
  if (is_non_flow_node(tag) || !id) return;

  if (!st.current->ids.insert(id).second) {
    st.error = "duplicate element id '" + std::string(id) + "'";
    return;
  }
  Node n;
  n.id = id;
  n.type = ElementType::from_tag(tag);
  if (const char* label = find_attr(attrs, "name")) {
    std::string normalized = normalize_whitespace(label);
    if (!normalized.empty()) n.label = std::move(normalized);
  }
  st.current->nodes.push_back(std::move(n));
}

void on_end(void* user, const XML_Char*) {
  auto& st = *static_cast<ParseState*>(user);
  if (st.current && st.stack.size() == st.process_depth) {
    st.done.push_back(std::move(*st.current));
    st.current.reset();
    st.process_depth = 0;
  }
  st.stack.pop_back();
}

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

std::vector<ProcessGraph> parse_bpmn(std::string_view xml) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter> parser(
      XML_ParserCreateNS(nullptr, kNsSeparator));
  if (!parser) throw Error(ErrorCode::MalformedXml, "cannot create XML parser");

  ParseState state;
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), on_start, on_end);

  if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()),
                XML_TRUE) == XML_STATUS_ERROR) {
    throw Error(ErrorCode::MalformedXml,
                std::string("XML error at line ") +
                    std::to_string(XML_GetCurrentLineNumber(parser.get())) +
                    ": " + XML_ErrorString(XML_GetErrorCode(parser.get())));
  }
  if (!state.error.empty()) throw Error(ErrorCode::MalformedXml, state.error);
  if (state.done.empty())
    throw Error(ErrorCode::NoProcessFound, "document has no process element");

  std::vector<ProcessGraph> graphs;
  graphs.reserve(state.done.size());
  for (auto& p : state.done)
    graphs.emplace_back(std::move(p.id), std::move(p.nodes), std::move(p.flows));
  return graphs;
}

// ---------------------------------------------------------------------------
// BPMN writing

namespace {

void append_escaped(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
}

}  // namespace

std::string write_bpmn(std::span<const ProcessGraph> graphs) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<bpmn:definitions "
      "xmlns:bpmn=\"http://www.omg.org/spec/BPMN/20100524/MODEL\" "
      "id=\"definitions\" targetNamespace=\"http://bpmn.io/schema/bpmn\">\n";
  for (const auto& g : graphs) {
    out += "  <bpmn:process id=\"";
    append_escaped(out, g.process_id());
    out += "\">\n";
    for (const auto& n : g.nodes()) {
      out += "    <bpmn:";
      out += n.type.tag();
      out += " id=\"";
      append_escaped(out, n.id);
      out += '"';
      if (n.label) {
        out += " name=\"";
        append_escaped(out, *n.label);
        out += '"';
      }
      out += " />\n";
    }
    for (const auto& f : g.flows()) {
      out += "    <bpmn:sequenceFlow id=\"";
      append_escaped(out, f.id);
      out += "\" sourceRef=\"";
      append_escaped(out, f.source);
      out += "\" targetRef=\"";
      append_escaped(out, f.target);
      out += "\" />\n";
    }
    out += "  </bpmn:process>\n";
  }
  out += "</bpmn:definitions>\n";
  return out;
}

// ---------------------------------------------------------------------------
// Gateway contraction

ProcessGraph contract_gateways(const ProcessGraph& g) {
  const std::size_t count = g.size();
  std::vector<Node> nodes;
  for (const auto& n : g.nodes())
    if (!n.type.is_gateway()) nodes.push_back(n);

  std::vector<Flow> flows;
  std::set<std::pair<std::size_t, std::size_t>> synthetic_pairs;
  std::set<std::pair<std::size_t, std::size_t>> direct_pairs;
  for (std::size_t f = 0; f < g.flows().size(); ++f) {
    std::size_t s = g.flow_source(f), t = g.flow_target(f);
    if (!g.node_at(s).type.is_gateway() && !g.node_at(t).type.is_gateway())
      direct_pairs.emplace(s, t);
  }

  for (std::size_t u = 0; u < count; ++u) {
    if (g.node_at(u).type.is_gateway()) continue;
    for (std::size_t f : g.out_flows(u)) {
      std::size_t t = g.flow_target(f);
      if (!g.node_at(t).type.is_gateway()) {
        flows.push_back(g.flows()[f]);
        continue;
      }
      // Walk the gateway chain depth-first in flow order; collect the first
      // non-gateway nodes hit.
      std::vector<bool> visited(count, false);
      std::vector<std::size_t> reached;
      auto walk = [&](auto&& self, std::size_t gw) -> void {
        visited[gw] = true;
        for (std::size_t out : g.out_flows(gw)) {
          std::size_t w = g.flow_target(out);
          if (visited[w]) continue;
          if (g.node_at(w).type.is_gateway()) {
            self(self, w);
          } else {
            visited[w] = true;
            reached.push_back(w);
          }
        }
      };
      walk(walk, t);
      for (std::size_t w : reached) {
        if (direct_pairs.contains({u, w})) continue;
        if (!synthetic_pairs.emplace(u, w).second) continue;
        const auto& from = g.node_at(u).id;
        const auto& to = g.node_at(w).id;
        flows.push_back({"contracted:" + from + "->" + to, from, to});
      }
    }
  }
  return ProcessGraph(g.process_id(), std::move(nodes), std::move(flows));
}

}  // namespace procomplete
