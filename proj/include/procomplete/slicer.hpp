#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "procomplete/process_model.hpp"

namespace procomplete {

/// A path of node ids through one process. Consecutive ids are joined by a
/// flow and no flow is used twice within the same slice.
struct Slice {
  std::string process_id;
  std::vector<std::string> node_ids;

  friend bool operator==(const Slice&, const Slice&) = default;
};

/// An element that directly follows the last node of a slice.
struct NextElement {
  std::string node_id;
  std::optional<std::string> label;
  ElementType type;

  friend bool operator==(const NextElement&, const NextElement&) = default;
};

struct SliceWithNext {
  Slice slice;
  std::vector<NextElement> next;
};

/// Every slice of exactly `length` nodes starting at a node reachable from a
/// root, in depth-first discovery order (flow-declaration tie-breaking).
/// Identical node-id sequences are reported once.
std::vector<SliceWithNext> enumerate_slices(const ProcessGraph& g,
                                            std::size_t length);

/// Slices of `length` nodes that end at `target`, found by walking incoming
/// flows backwards. With `fallback`, falls back to the longest shorter length
/// that yields at least one slice. Throws Error(UnknownNode).
std::vector<Slice> extract_slices_ending_at(const ProcessGraph& g,
                                            std::string_view target,
                                            std::size_t length,
                                            bool fallback = false);

/// "Task: Check documents" or bare "Exclusive Gateway" when unlabeled.
std::string sentence(const ElementType& type,
                     const std::optional<std::string>& label);

/// Paragraph of one sentence per node, each terminated by a period and
/// separated by single spaces. Throws Error(UnknownNode).
std::string textualize(const Slice& s, const ProcessGraph& g);

std::vector<NextElement> next_elements(const ProcessGraph& g,
                                       std::string_view node_id);

}  // namespace procomplete
