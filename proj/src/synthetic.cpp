#include "procomplete/synthetic.hpp"

#include <array>
#include <random>
#include <string_view>

#include "procomplete/error.hpp"

namespace procomplete::synthetic {

namespace {

constexpr std::array<std::string_view, 16> kVerbs = {
    "Check",   "Evaluate", "Send",     "Review", "Approve", "Reject",
    "Archive", "Notify",   "Prepare",  "Register", "Verify", "Schedule",
    "Invite",  "Rank",     "Collect",  "Sign"};
constexpr std::array<std::string_view, 12> kObjects = {
    "documents",      "application", "invoice",        "applicant",
    "acceptance letter", "payment",  "contract",       "test results",
    "request",        "report",      "interview",      "order"};

class Builder {
 public:
  explicit Builder(std::string id) : id_(std::move(id)) {}

  std::string add(ElementType type, std::optional<std::string> label) {
    std::string node_id = "n" + std::to_string(nodes_.size());
    nodes_.push_back({node_id, std::move(label), std::move(type)});
    return node_id;
  }
  void link(const std::string& from, const std::string& to) {
    flows_.push_back({"f" + std::to_string(flows_.size()), from, to});
  }
  std::size_t size() const { return nodes_.size(); }
  ProcessGraph build() && {
    return ProcessGraph(std::move(id_), std::move(nodes_), std::move(flows_));
  }

 private:
  std::string id_;
  std::vector<Node> nodes_;
  std::vector<Flow> flows_;
};

}  // namespace

ProcessGraph chain(const std::string& process_id,
                   const std::vector<std::string>& task_labels) {
  std::vector<Node> nodes;
  std::vector<Flow> flows;
  nodes.push_back({"start", std::nullopt, ElementKind::StartEvent});
  for (std::size_t i = 0; i < task_labels.size(); ++i)
    nodes.push_back({"t" + std::to_string(i + 1), task_labels[i], ElementKind::Task});
  nodes.push_back({"end", std::nullopt, ElementKind::EndEvent});
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    flows.push_back({"f" + std::to_string(i + 1), nodes[i].id, nodes[i + 1].id});
  return ProcessGraph(process_id, std::move(nodes), std::move(flows));
}

ProcessGraph workflow(const std::string& process_id, WorkflowShape shape,
                      std::uint64_t seed) {
  if (shape.nodes < 3)
    throw Error(ErrorCode::InvalidArgument, "a workflow needs at least 3 nodes");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> verb(0, kVerbs.size() - 1);
  std::uniform_int_distribution<std::size_t> object(0, kObjects.size() - 1);
  std::bernoulli_distribution gateway(shape.gateway_share);
  auto label = [&] {
    return std::string(kVerbs[verb(rng)]) + " " + std::string(kObjects[object(rng)]);
  };

  Builder b(process_id);
  std::string last = b.add(ElementKind::StartEvent, std::nullopt);
  // Reserve one slot for the end event.
  while (b.size() < shape.nodes - 1) {
    const std::size_t budget = shape.nodes - 1 - b.size();
    if (budget >= 4 && gateway(rng)) {
      std::string split = b.add(ElementKind::ExclusiveGateway, std::nullopt);
      std::string left = b.add(ElementKind::Task, label());
      std::string right = b.add(ElementKind::Task, label());
      std::string join = b.add(ElementKind::ExclusiveGateway, std::nullopt);
      b.link(last, split);
      b.link(split, left);
      b.link(split, right);
      b.link(left, join);
      b.link(right, join);
      last = join;
    } else {
      std::string task = b.add(ElementKind::Task, label());
      b.link(last, task);
      last = task;
    }
  }
  std::string end = b.add(ElementKind::EndEvent, std::nullopt);
  b.link(last, end);
  return std::move(b).build();
}

std::vector<ProcessGraph> corpus(std::size_t count, WorkflowShape shape,
                                 std::uint64_t seed) {
  std::vector<ProcessGraph> out;
  out.reserve(count);
  std::mt19937_64 seeds(seed);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(workflow("synthetic_" + std::to_string(i), shape, seeds()));
  return out;
}

std::string last_task(const ProcessGraph& g) {
  for (auto it = g.nodes().rbegin(); it != g.nodes().rend(); ++it)
    if (it->type.kind() == ElementKind::Task) return it->id;
  throw Error(ErrorCode::UnknownNode, "workflow has no task");
}

}  // namespace procomplete::synthetic
