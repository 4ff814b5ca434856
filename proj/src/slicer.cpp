#include "procomplete/slicer.hpp"

#include <set>

#include "procomplete/error.hpp"

namespace procomplete {

namespace {

// Depth-first walk over flows with a per-slice used-flow set. `forward`
// follows outgoing flows, otherwise incoming ones; the path is collected in
// walk order.
class PathWalker {
 public:
  PathWalker(const ProcessGraph& g, std::size_t length, bool forward)
      : g_(g), length_(length), forward_(forward),
        used_(g.flows().size(), false) {}

  template <typename Emit>
  void walk(std::size_t from, Emit&& emit) {
    path_.clear();
    path_.push_back(from);
    step(emit);
  }

 private:
  template <typename Emit>
  void step(Emit& emit) {
    if (path_.size() == length_) {
      emit(path_);
      return;
    }
    std::size_t here = path_.back();
    auto flows = forward_ ? g_.out_flows(here) : g_.in_flows(here);
    for (std::size_t f : flows) {
      if (used_[f]) continue;
      used_[f] = true;
      path_.push_back(forward_ ? g_.flow_target(f) : g_.flow_source(f));
      step(emit);
      path_.pop_back();
      used_[f] = false;
    }
  }

  const ProcessGraph& g_;
  std::size_t length_;
  bool forward_;
  std::vector<bool> used_;
  std::vector<std::size_t> path_;
};

std::vector<std::string> to_ids(const ProcessGraph& g,
                                const std::vector<std::size_t>& path) {
  std::vector<std::string> ids;
  ids.reserve(path.size());
  for (std::size_t i : path) ids.push_back(g.node_at(i).id);
  return ids;
}

}  // namespace

std::vector<NextElement> next_elements(const ProcessGraph& g,
                                       std::string_view node_id) {
  std::vector<NextElement> next;
  for (auto& n : g.successors(node_id))
    next.push_back({std::move(n.id), std::move(n.label), std::move(n.type)});
  return next;
}

std::vector<SliceWithNext> enumerate_slices(const ProcessGraph& g,
                                            std::size_t length) {
  std::vector<SliceWithNext> out;
  if (length == 0) return out;
  std::set<std::vector<std::size_t>> seen;
  PathWalker walker(g, length, /*forward=*/true);
  for (std::size_t start : depth_first_order(g)) {
    walker.walk(start, [&](const std::vector<std::size_t>& path) {
      if (!seen.insert(path).second) return;
      SliceWithNext s;
      s.slice.process_id = g.process_id();
      s.slice.node_ids = to_ids(g, path);
      s.next = next_elements(g, s.slice.node_ids.back());
      out.push_back(std::move(s));
    });
  }
  return out;
}

std::vector<Slice> extract_slices_ending_at(const ProcessGraph& g,
                                            std::string_view target,
                                            std::size_t length,
                                            bool fallback) {
  const std::size_t v = g.index_of(target);
  for (std::size_t len = length; len >= 1; --len) {
    std::vector<Slice> out;
    std::set<std::vector<std::size_t>> seen;
    PathWalker walker(g, len, /*forward=*/false);
    walker.walk(v, [&](const std::vector<std::size_t>& reversed) {
      std::vector<std::size_t> path(reversed.rbegin(), reversed.rend());
      if (!seen.insert(path).second) return;
      out.push_back({g.process_id(), to_ids(g, path)});
    });
    if (!out.empty() || !fallback) return out;
  }
  return {};
}

std::string sentence(const ElementType& type,
                     const std::optional<std::string>& label) {
  std::string s = type.display_name();
  if (label) {
    s += ": ";
    s += *label;
  }
  return s;
}

std::string textualize(const Slice& s, const ProcessGraph& g) {
  std::string text;
  for (const auto& id : s.node_ids) {
    const Node& n = g.node(id);
    if (!text.empty()) text += ' ';
    text += sentence(n.type, n.label);
    text += '.';
  }
  return text;
}

}  // namespace procomplete
