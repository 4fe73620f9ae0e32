#include "tablegraph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace tablegraph {

std::vector<int> ReadingOrder::sequence() const {
  std::vector<int> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ea = entries[a];
    const auto& eb = entries[b];
    return std::tie(ea.line_number, ea.order_in_line) <
           std::tie(eb.line_number, eb.order_in_line);
  });
  return order;
}

Edge edge_of(const Point& center_w, const Point& center_c) {
  const double dx = center_c.x - center_w.x;
  const double dy = center_c.y - center_w.y;
  if (dx == 0.0 && dy == 0.0) {
    throw std::invalid_argument("edge_of: identical centers");
  }
  const double ax = std::abs(dx);
  const double ay = std::abs(dy);
  if (dx > 0.0 && ax >= ay) return Edge::right;
  if (dx < 0.0 && ax >= ay) return Edge::left;
  return dy > 0.0 ? Edge::bottom : Edge::top;
}

NeighborGraph build_neighbor_graph(const Page& page, const GraphConfig& cfg) {
  const int n = static_cast<int>(page.wordboxes.size());
  NeighborGraph graph(n, cfg.n_neighbors);
  if (cfg.n_neighbors == 0) return graph;

  std::vector<Point> centers(n);
  for (int i = 0; i < n; ++i) centers[i] = page.wordboxes[i].center();

  struct Candidate {
    double dist2;
    int index;
  };
  std::array<std::vector<Candidate>, 4> per_edge;

  for (int w = 0; w < n; ++w) {
    for (auto& v : per_edge) v.clear();
    for (int c = 0; c < n; ++c) {
      if (c == w) continue;
      const double dx = centers[c].x - centers[w].x;
      const double dy = centers[c].y - centers[w].y;
      if (dx == 0.0 && dy == 0.0) continue;
      const Edge e = edge_of(centers[w], centers[c]);
      per_edge[static_cast<int>(e)].push_back({dx * dx + dy * dy, c});
    }
    for (Edge e : kEdgeOrder) {
      auto& cand = per_edge[static_cast<int>(e)];
      const std::size_t keep = std::min<std::size_t>(cand.size(), cfg.n_neighbors);
      std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(),
                        [](const Candidate& a, const Candidate& b) {
                          return std::tie(a.dist2, a.index) < std::tie(b.dist2, b.index);
                        });
      auto slots = graph.edge_slots(w, e);
      for (std::size_t j = 0; j < keep; ++j) slots[j] = cand[j].index;
    }
  }
  return graph;
}

namespace {

struct LinePass {
  std::vector<int> line;
  std::vector<int> pos;
};

LinePass horizontal_pass(const Page& page, double overlap_threshold) {
  const int n = static_cast<int>(page.wordboxes.size());
  LinePass out;
  out.line.assign(n, 0);
  out.pos.assign(n, 0);
  if (n == 0) return out;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Rect& ra = page.wordboxes[a].bbox;
    const Rect& rb = page.wordboxes[b].bbox;
    return std::tie(ra.top, ra.left, a) < std::tie(rb.top, rb.left, b);
  });

  int line_no = -1;
  Rect seed{};
  std::vector<std::vector<int>> lines;
  for (int idx : order) {
    const Rect& r = page.wordboxes[idx].bbox;
    bool joins = false;
    if (line_no >= 0) {
      const double inter =
          std::min(r.bottom, seed.bottom) - std::max(r.top, seed.top);
      const double smaller = std::min(r.height(), seed.height());
      joins = inter > overlap_threshold * smaller;
    }
    if (!joins) {
      ++line_no;
      seed = r;
      lines.emplace_back();
    }
    lines.back().push_back(idx);
    out.line[idx] = line_no;
  }

  for (auto& members : lines) {
    std::sort(members.begin(), members.end(), [&](int a, int b) {
      return std::tie(page.wordboxes[a].bbox.left, a) <
             std::tie(page.wordboxes[b].bbox.left, b);
    });
    for (std::size_t k = 0; k < members.size(); ++k) {
      out.pos[members[k]] = static_cast<int>(k);
    }
  }
  return out;
}

}  // namespace

ReadingOrder assign_reading_order(const Page& page, double overlap_threshold) {
  const LinePass plain = horizontal_pass(page, overlap_threshold);
  const LinePass rotated = horizontal_pass(rotate_page_90(page), overlap_threshold);

  ReadingOrder order;
  order.entries.resize(page.wordboxes.size());
  for (std::size_t i = 0; i < page.wordboxes.size(); ++i) {
    order.entries[i] = {plain.line[i], plain.pos[i], rotated.line[i], rotated.pos[i]};
  }
  return order;
}

Page rotate_page_90(const Page& page) {
  Page out;
  out.width = page.height;
  out.height = page.width;
  out.wordboxes = page.wordboxes;
  for (auto& box : out.wordboxes) {
    const Rect r = box.bbox;
    box.bbox = {1.0 - r.bottom, r.left, 1.0 - r.top, r.right};
  }
  return out;
}

}  // namespace tablegraph
