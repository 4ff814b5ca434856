#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "procomplete/process_model.hpp"

namespace procomplete::synthetic {

/// start -> one task per label -> end. Node ids are "start", "t1".., "end".
ProcessGraph chain(const std::string& process_id,
                   const std::vector<std::string>& task_labels);

struct WorkflowShape {
  std::size_t nodes = 25;          // exact node count, >= 3
  double gateway_share = 0.35;     // chance a block is an XOR split/join
};

/// Structured workflow of exactly `shape.nodes` elements: a start event,
/// a sequence of task and exclusive split/join blocks, an end event. Labels
/// come from a fixed business vocabulary; the same seed gives the same graph.
ProcessGraph workflow(const std::string& process_id, WorkflowShape shape,
                      std::uint64_t seed);

/// `count` workflows sharing one vocabulary, seeds derived from `seed`.
std::vector<ProcessGraph> corpus(std::size_t count, WorkflowShape shape,
                                 std::uint64_t seed);

/// Id of the last task before the end event of a workflow() graph.
std::string last_task(const ProcessGraph& g);

}  // namespace procomplete::synthetic
