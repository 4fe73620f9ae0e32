#pragma once

#include <array>
#include <span>
#include <vector>

#include "tablegraph/doc.hpp"

namespace tablegraph {

enum class Edge { left = 0, top = 1, right = 2, bottom = 3 };

inline constexpr int kMissingNeighbor = -1;
inline constexpr std::array<Edge, 4> kEdgeOrder = {Edge::left, Edge::top,
                                                   Edge::right, Edge::bottom};

struct GraphConfig {
  int n_neighbors = 1;
};

// Per box, four edge slots of exactly n_neighbors entries each (box index or
// kMissingNeighbor), sorted by ascending center distance, ties by index.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  NeighborGraph(int box_count, int n_neighbors)
      : n_neighbors_(n_neighbors),
        slots_(static_cast<std::size_t>(box_count) * 4 * n_neighbors, kMissingNeighbor) {}

  int n_neighbors() const { return n_neighbors_; }
  int box_count() const {
    return n_neighbors_ == 0 ? 0 : static_cast<int>(slots_.size()) / (4 * n_neighbors_);
  }

  std::span<const int> edge_slots(int box, Edge e) const {
    return {slots_.data() + offset(box, e), static_cast<std::size_t>(n_neighbors_)};
  }
  std::span<int> edge_slots(int box, Edge e) {
    return {slots_.data() + offset(box, e), static_cast<std::size_t>(n_neighbors_)};
  }
  // All 4*n slots of one box in fixed order: left, top, right, bottom.
  std::span<const int> box_slots(int box) const {
    return {slots_.data() + offset(box, Edge::left), static_cast<std::size_t>(4 * n_neighbors_)};
  }

 private:
  std::size_t offset(int box, Edge e) const {
    return (static_cast<std::size_t>(box) * 4 + static_cast<int>(e)) * n_neighbors_;
  }

  int n_neighbors_ = 0;
  std::vector<int> slots_;
};

// Line/order assignment for both page orientations.
struct ReadingOrder {
  struct Entry {
    int line_number = 0;
    int order_in_line = 0;
    int rot_line_number = 0;
    int rot_order_in_line = 0;
  };
  std::vector<Entry> entries;

  // Box indices sorted by (line_number, order_in_line); a total order.
  std::vector<int> sequence() const;
};

// Which edge of the box at center_w sees center_c in its 90-degree field of
// view. Diagonal ties go to the horizontal edge. Throws std::invalid_argument
// on identical centers.
Edge edge_of(const Point& center_w, const Point& center_c);

// For each box and edge, the n nearest boxes (center distance) whose centers
// fall in that edge's field of view, padded with kMissingNeighbor. Boxes with
// coincident centers see each other on no edge.
NeighborGraph build_neighbor_graph(const Page& page, const GraphConfig& cfg);

// Greedy line grouping: boxes sorted by (top, left, index); a box joins the
// open line iff its y-interval overlaps the line seed's by strictly more than
// overlap_threshold times the smaller height. Rotated pass runs the same
// procedure on rotate_page_90(page).
ReadingOrder assign_reading_order(const Page& page, double overlap_threshold = 0.5);

// Clockwise rotation: (l,t,r,b) -> (1-b, l, 1-t, r).
Page rotate_page_90(const Page& page);

}  // namespace tablegraph
