#include "kpkvb/dissection.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <string>

namespace kpkvb {

Dissection::Dissection(double R) : radius_(R) {
  if (!(R > 2.0 * kLn2)) throw InvalidParameters("dissection needs R > 2 ln 2, got " + std::to_string(R));
  ell_ = static_cast<int>(std::floor((std::log(6.0 * kPi) + R / 2.0) / kLn2));
  if (ell_ > 60) throw InvalidParameters("dissection too fine (ell > 60)");
  ell_tilde_ = static_cast<int>(std::floor(R / (2.0 * kLn2))) - 1;
  width_ = kPi * std::exp(R / 2.0);
  base_width_ = std::ldexp(width_, -ell_);
}

BoxId Dissection::box(std::uint64_t flat_index) const {
  if (flat_index >= box_count()) throw std::out_of_range("box index out of range");
  int layer = 0;
  while (flat_index >= layer_offset(layer + 1) && layer < ell_) ++layer;
  return {layer, flat_index - layer_offset(layer)};
}

BoxId Dissection::parent(BoxId b) const {
  if (b.layer >= ell_) throw std::out_of_range("top box has no parent");
  return {b.layer + 1, b.index / 2};
}

double Dissection::y_top(int layer) const noexcept {
  if (layer < ell_) return (layer + 1) * kLn2;
  return std::max(radius_, ell_ * kLn2);
}

BoxId box_of(const StripPoint& s, const Dissection& d) {
  const double half = d.width() / 2.0;
  if (!(s.y >= 0.0 && s.y <= d.radius()) || !(s.x > -half * (1 + 1e-12) && s.x <= half * (1 + 1e-12)))
    throw DomainError("box_of: point lies outside the strip E_R");
  const int layer = std::min(static_cast<int>(std::floor(s.y / kLn2)), d.ell());
  const double w = d.box_width(layer);
  const auto count = static_cast<std::int64_t>(d.boxes_in_layer(layer));
  auto k = static_cast<std::int64_t>(std::floor(s.x / w));
  k %= count;
  if (k < 0) k += count;
  return {layer, static_cast<std::uint64_t>(k)};
}

std::int64_t x_overlap(BoxId a, BoxId b, const Dissection& d) {
  const std::int64_t period = std::int64_t{1} << d.ell();
  const std::int64_t wa = std::int64_t{1} << a.layer;
  const std::int64_t wb = std::int64_t{1} << b.layer;
  const std::int64_t a0 = static_cast<std::int64_t>(a.index) * wa;
  const std::int64_t b0 = static_cast<std::int64_t>(b.index) * wb;
  std::int64_t best = std::numeric_limits<std::int64_t>::min();
  for (std::int64_t shift : {-period, std::int64_t{0}, period}) {
    const std::int64_t lo = std::max(a0, b0 + shift);
    const std::int64_t hi = std::min(a0 + wa, b0 + wb + shift);
    best = std::max(best, hi - lo);
  }
  return best;
}

bool boxes_adjacent(BoxId a, BoxId b, const Dissection& d, BoxAdjacency kind) {
  if (a == b) return false;
  const int dl = std::abs(a.layer - b.layer);
  if (dl > 1) return false;
  const std::int64_t overlap = x_overlap(a, b, d);
  if (dl == 0) return overlap >= 0;  // side by side: a shared vertical edge of positive height
  return kind == BoxAdjacency::corner ? overlap >= 0 : overlap > 0;
}

BoxNeighbors box_neighbors(BoxId a, const Dissection& d, BoxAdjacency kind) {
  BoxNeighbors out;
  for (int layer = std::max(0, a.layer - 1); layer <= std::min(d.ell(), a.layer + 1); ++layer) {
    const auto count = static_cast<std::int64_t>(d.boxes_in_layer(layer));
    // candidate indices cover a's x-range plus one box on either side
    std::int64_t first = 0;
    std::int64_t last = 0;
    if (layer <= a.layer) {
      const std::int64_t ratio = std::int64_t{1} << (a.layer - layer);
      first = static_cast<std::int64_t>(a.index) * ratio - 1;
      last = (static_cast<std::int64_t>(a.index) + 1) * ratio;
    } else {
      first = static_cast<std::int64_t>(a.index / 2) - 1;
      last = static_cast<std::int64_t>(a.index / 2) + 1;
    }
    std::array<std::uint64_t, 12> seen{};
    std::size_t n_seen = 0;
    for (std::int64_t k = first; k <= last; ++k) {
      std::int64_t idx = k % count;
      if (idx < 0) idx += count;
      const BoxId b{layer, static_cast<std::uint64_t>(idx)};
      if (std::find(seen.begin(), seen.begin() + n_seen, b.index) != seen.begin() + n_seen) continue;
      seen.at(n_seen++) = b.index;
      if (boxes_adjacent(a, b, d, kind)) out.push(b);
    }
  }
  return out;
}

std::vector<BoxId> neighbors_B(BoxId a, const Dissection& d) {
  auto nb = box_neighbors(a, d, BoxAdjacency::corner);
  return {nb.begin(), nb.end()};
}

std::vector<BoxId> neighbors_Bstar(BoxId a, const Dissection& d) {
  auto nb = box_neighbors(a, d, BoxAdjacency::edge);
  return {nb.begin(), nb.end()};
}

ActivityMap::ActivityMap(const Dissection& d, bool all_active) : state_(d.box_count(), 0) {
  if (!all_active) return;
  const std::uint64_t upto = d.layer_offset(d.ell_tilde() + 1);
  std::fill(state_.begin(), state_.begin() + static_cast<std::ptrdiff_t>(upto), 1);
}

std::size_t ActivityMap::active_count() const noexcept {
  return static_cast<std::size_t>(std::count(state_.begin(), state_.end(), 1));
}

ActivityMap mark_active_points(const Dissection& d, std::span<const StripPoint> points) {
  ActivityMap act(d);
  for (const auto& s : points) {
    const BoxId b = box_of(s, d);
    if (b.layer <= d.ell_tilde()) act.set(d, b, true);
  }
  return act;
}

ActivityMap mark_active(const Dissection& d, const Graph& graph) {
  std::vector<StripPoint> points;
  points.reserve(graph.vertex_count());
  for (const auto& c : graph.coords()) points.push_back(c.strip);
  return mark_active_points(d, points);
}

void dump_activity(std::ostream& out, const Dissection& d, const ActivityMap& act) {
  for (std::uint64_t f = 0; f < d.box_count(); ++f) {
    const BoxId b = d.box(f);
    out << b.layer << ' ' << b.index << ' ' << (act.active_flat(f) ? 1 : 0) << '\n';
  }
}

bool is_connected_walk(const BoxWalk& walk, const Dissection& d) {
  for (std::size_t i = 0; i + 1 < walk.boxes.size(); ++i) {
    const BoxId a = walk.boxes[i];
    const BoxId b = walk.boxes[i + 1];
    if (!d.valid(a) || !d.valid(b)) return false;
    if (a != b && !boxes_adjacent(a, b, d, walk.adjacency)) return false;
  }
  return walk.boxes.empty() || d.valid(walk.boxes.front());
}

BoxWalk canonical_path_L(BoxId a, BoxId a2, const Dissection& d) {
  std::vector<BoxId> up_a{a};
  std::vector<BoxId> up_b{a2};
  while (up_a.back().layer < up_b.back().layer) up_a.push_back(d.parent(up_a.back()));
  while (up_b.back().layer < up_a.back().layer) up_b.push_back(d.parent(up_b.back()));
  while (up_a.back() != up_b.back()) {
    up_a.push_back(d.parent(up_a.back()));
    up_b.push_back(d.parent(up_b.back()));
  }
  BoxWalk walk{std::move(up_a), BoxAdjacency::corner};
  for (auto it = up_b.rbegin() + 1; it != up_b.rend(); ++it) walk.boxes.push_back(*it);
  return walk;
}

InactiveComponents::InactiveComponents(const Dissection& d, const ActivityMap& act)
    : label_(d.box_count(), kActive) {
  std::vector<std::uint64_t> stack;
  for (std::uint64_t f = 0; f < d.box_count(); ++f) {
    if (act.active_flat(f) || label_[f] != kActive) continue;
    const auto id = static_cast<std::uint32_t>(sizes_.size());
    std::uint64_t size = 0;
    label_[f] = id;
    stack.push_back(f);
    while (!stack.empty()) {
      const std::uint64_t cur = stack.back();
      stack.pop_back();
      ++size;
      for (BoxId nb : box_neighbors(d.box(cur), d, BoxAdjacency::corner)) {
        const std::uint64_t g = d.flat(nb);
        if (!act.active_flat(g) && label_[g] == kActive) {
          label_[g] = id;
          stack.push_back(g);
        }
      }
    }
    sizes_.push_back(size);
  }
}

BoxSet compute_W(BoxId a, BoxId a2, const ActivityMap& act, const Dissection& d) {
  const BoxWalk path = canonical_path_L(a, a2, d);
  std::vector<std::uint8_t> in_w(d.box_count(), 0);
  std::vector<std::uint64_t> stack;
  for (BoxId b : path.boxes) {
    const std::uint64_t f = d.flat(b);
    if (in_w[f]) continue;
    in_w[f] = 1;
    if (!act.active_flat(f)) stack.push_back(f);
  }
  // flood the inactive components that touch the path
  while (!stack.empty()) {
    const std::uint64_t cur = stack.back();
    stack.pop_back();
    for (BoxId nb : box_neighbors(d.box(cur), d, BoxAdjacency::corner)) {
      const std::uint64_t g = d.flat(nb);
      if (!in_w[g] && !act.active_flat(g)) {
        in_w[g] = 1;
        stack.push_back(g);
      }
    }
  }
  BoxSet out;
  for (std::uint64_t f = 0; f < d.box_count(); ++f)
    if (in_w[f]) out.push_back(d.box(f));
  return out;
}

std::uint64_t W_size(BoxId a, BoxId a2, const ActivityMap& act, const Dissection& d,
                     const InactiveComponents& components) {
  const BoxWalk path = canonical_path_L(a, a2, d);
  std::vector<std::uint64_t> flats;
  flats.reserve(path.boxes.size());
  for (BoxId b : path.boxes) flats.push_back(d.flat(b));
  std::sort(flats.begin(), flats.end());
  flats.erase(std::unique(flats.begin(), flats.end()), flats.end());
  std::vector<std::uint32_t> labels;
  std::uint64_t total = 0;
  for (std::uint64_t f : flats) {
    if (act.active_flat(f)) {
      ++total;
    } else {
      labels.push_back(components.label(f));
    }
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (std::uint32_t l : labels) total += components.size_of(l);
  return total;
}

namespace {

// Depth-first tour of a connected box set; consecutive entries are adjacent.
std::vector<BoxId> tour(const std::vector<std::uint64_t>& members, const Dissection& d, BoxAdjacency kind) {
  std::vector<BoxId> walk;
  if (members.empty()) return walk;
  auto member = [&](std::uint64_t f) { return std::binary_search(members.begin(), members.end(), f); };
  std::vector<std::uint64_t> visited;
  auto seen = [&](std::uint64_t f) { return std::find(visited.begin(), visited.end(), f) != visited.end(); };
  struct Frame {
    std::uint64_t flat;
    BoxNeighbors nbs;
    std::size_t next;
  };
  std::vector<Frame> stack;
  auto enter = [&](std::uint64_t f) {
    visited.push_back(f);
    walk.push_back(d.box(f));
    stack.push_back({f, box_neighbors(d.box(f), d, kind), 0});
  };
  enter(members.front());
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next < top.nbs.size()) {
      const std::uint64_t g = d.flat(*(top.nbs.begin() + top.next++));
      if (member(g) && !seen(g)) enter(g);
      continue;
    }
    stack.pop_back();
    if (!stack.empty() && visited.size() < members.size()) walk.push_back(d.box(stack.back().flat));
  }
  return walk;
}

// BFS over B from x avoiding `blocked`; true iff y is reached.
bool reachable_avoiding(std::uint64_t x, std::uint64_t y, const std::vector<std::uint8_t>& blocked, const Dissection& d) {
  if (blocked[x] || blocked[y]) return false;
  std::vector<std::uint8_t> seen(d.box_count(), 0);
  std::deque<std::uint64_t> queue{x};
  seen[x] = 1;
  while (!queue.empty()) {
    const std::uint64_t cur = queue.front();
    queue.pop_front();
    if (cur == y) return true;
    for (BoxId nb : box_neighbors(d.box(cur), d, BoxAdjacency::corner)) {
      const std::uint64_t g = d.flat(nb);
      if (!seen[g] && !blocked[g]) {
        seen[g] = 1;
        queue.push_back(g);
      }
    }
  }
  return false;
}

}  // namespace

std::optional<BoxWalk> find_separating_red_walk(const BoxColoring& coloring, BoxId x, BoxId y, const Dissection& d) {
  if (coloring.size() != d.box_count()) throw std::invalid_argument("coloring size does not match dissection");
  const std::uint64_t fx = d.flat(x);
  const std::uint64_t fy = d.flat(y);
  if (coloring[fx] != BoxColor::blue || coloring[fy] != BoxColor::blue)
    throw PreconditionError("find_separating_red_walk: endpoints must be blue");

  // blue cluster of x and its red boundary
  std::vector<std::uint8_t> cluster(d.box_count(), 0);
  std::vector<std::uint8_t> boundary(d.box_count(), 0);
  std::vector<std::uint64_t> stack{fx};
  cluster[fx] = 1;
  while (!stack.empty()) {
    const std::uint64_t cur = stack.back();
    stack.pop_back();
    for (BoxId nb : box_neighbors(d.box(cur), d, BoxAdjacency::corner)) {
      const std::uint64_t g = d.flat(nb);
      if (coloring[g] == BoxColor::red) {
        boundary[g] = 1;
      } else if (!cluster[g]) {
        cluster[g] = 1;
        stack.push_back(g);
      }
    }
  }
  if (cluster[fy]) return std::nullopt;

  // split the boundary into B*-components; one of them separates
  std::vector<std::uint8_t> assigned(d.box_count(), 0);
  for (std::uint64_t f = 0; f < d.box_count(); ++f) {
    if (!boundary[f] || assigned[f]) continue;
    std::vector<std::uint64_t> component{f};
    assigned[f] = 1;
    for (std::size_t i = 0; i < component.size(); ++i) {
      for (BoxId nb : box_neighbors(d.box(component[i]), d, BoxAdjacency::edge)) {
        const std::uint64_t g = d.flat(nb);
        if (boundary[g] && !assigned[g]) {
          assigned[g] = 1;
          component.push_back(g);
        }
      }
    }
    std::vector<std::uint8_t> blocked(d.box_count(), 0);
    for (std::uint64_t g : component) blocked[g] = 1;
    if (reachable_avoiding(fx, fy, blocked, d)) continue;
    std::sort(component.begin(), component.end());
    return BoxWalk{tour(component, d, BoxAdjacency::edge), BoxAdjacency::edge};
  }
  throw std::logic_error("find_separating_red_walk: no B*-connected boundary component separates");
}

std::vector<BoxId> HBlock::members() const {
  std::vector<BoxId> out;
  for (int layer = h - 1; layer >= 0; --layer) {
    const int shift = h - 1 - layer;
    const std::uint64_t first = top.index << shift;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << shift); ++k) out.push_back({layer, first + k});
  }
  return out;
}

std::vector<HBlock> h_block_partition(const Dissection& d, int h) {
  if (h < 1 || h > d.ell_tilde())
    throw InvalidParameters("h must lie in [1, ell_tilde], got " + std::to_string(h));
  std::vector<HBlock> blocks;
  const std::uint64_t count = d.boxes_in_layer(h - 1);
  blocks.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) blocks.push_back({h, {h - 1, k}});
  return blocks;
}

bool has_vertical_active_crossing(const HBlock& block, const ActivityMap& act, const Dissection& d) {
  if (!act.active(d, block.top)) return false;
  std::vector<BoxId> frontier{block.top};
  std::vector<BoxId> seen{block.top};
  while (!frontier.empty()) {
    const BoxId cur = frontier.back();
    frontier.pop_back();
    if (cur.layer == 0) return true;
    for (BoxId nb : box_neighbors(cur, d, BoxAdjacency::edge)) {
      if (!block.contains(nb) || !act.active(d, nb)) continue;
      if (std::find(seen.begin(), seen.end(), nb) != seen.end()) continue;
      seen.push_back(nb);
      frontier.push_back(nb);
    }
  }
  return false;
}

bool inactive_path_L0_to_K_exists(const ActivityMap& act, const Dissection& d) {
  const double level = d.radius() / 4.0;
  std::vector<std::uint8_t> seen(d.box_count(), 0);
  std::vector<std::uint64_t> stack;
  for (std::uint64_t k = 0; k < d.boxes_in_layer(0); ++k) {
    if (!act.active_flat(k)) {
      seen[k] = 1;
      stack.push_back(k);
    }
  }
  while (!stack.empty()) {
    const std::uint64_t cur = stack.back();
    stack.pop_back();
    const BoxId b = d.box(cur);
    if (d.reaches_above(b, level)) return true;
    for (BoxId nb : box_neighbors(b, d, BoxAdjacency::corner)) {
      const std::uint64_t g = d.flat(nb);
      if (!seen[g] && !act.active_flat(g)) {
        seen[g] = 1;
        stack.push_back(g);
      }
    }
  }
  return false;
}

}  // namespace kpkvb
