#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kpkvb/geometry.hpp"
#include "kpkvb/graph.hpp"

namespace kpkvb {

/// A box of the dissection: layer i in [0, ell], index in [0, 2^{ell - i}).
/// Box (i, k) spans x in [k 2^i b, (k+1) 2^i b) (mod the strip width) and
/// y in [i ln 2, (i+1) ln 2); the top layer is closed above at R.
struct BoxId {
  int layer = 0;
  std::uint64_t index = 0;
  friend auto operator<=>(const BoxId&, const BoxId&) = default;
};

enum class BoxAdjacency {
  corner,  ///< B: closed rectangles share at least a point
  edge,    ///< B*: closed rectangles share a segment of positive length
};

/// Fixed-capacity neighbor list; no box has more than 8 neighbors in B.
class BoxNeighbors {
 public:
  void push(BoxId b) { items_.at(size_++) = b; }
  const BoxId* begin() const noexcept { return items_.data(); }
  const BoxId* end() const noexcept { return items_.data() + size_; }
  std::size_t size() const noexcept { return size_; }

 private:
  std::array<BoxId, 12> items_{};
  std::size_t size_ = 0;
};

/// The layered box dissection of E_R.
///
/// ell = floor((ln(6 pi) + R/2) / ln 2) gives 6 pi e^{R/2} >= 2^ell > 3 pi e^{R/2},
/// so the bottom-layer width b = 2^{-ell} pi e^{R/2} lies in [1/6, 1/3). Layer i
/// holds 2^{ell-i} boxes of width 2^i b; the total is 2^{ell+1} - 1.
/// Boxes nest dyadically: (i, k) lies inside (i+1, floor(k/2)).
class Dissection {
 public:
  /// Requires R > 2 ln 2 so that ell_tilde >= 0. Throws InvalidParameters otherwise.
  explicit Dissection(double R);

  double radius() const noexcept { return radius_; }
  int ell() const noexcept { return ell_; }
  /// floor(R / (2 ln 2)) - 1: the last layer lying entirely below y = R/2.
  int ell_tilde() const noexcept { return ell_tilde_; }
  /// Width b of a bottom-layer box.
  double base_width() const noexcept { return base_width_; }
  /// Strip width pi e^{R/2}.
  double width() const noexcept { return width_; }

  std::uint64_t boxes_in_layer(int layer) const noexcept { return std::uint64_t{1} << (ell_ - layer); }
  std::uint64_t box_count() const noexcept { return (std::uint64_t{1} << (ell_ + 1)) - 1; }

  /// Dense numbering: layer 0 first, then layer 1, ...
  std::uint64_t flat(BoxId b) const noexcept { return layer_offset(b.layer) + b.index; }
  BoxId box(std::uint64_t flat_index) const;
  std::uint64_t layer_offset(int layer) const noexcept {
    return (std::uint64_t{1} << (ell_ + 1)) - (std::uint64_t{1} << (ell_ - layer + 1));
  }

  bool valid(BoxId b) const noexcept {
    return b.layer >= 0 && b.layer <= ell_ && b.index < boxes_in_layer(b.layer);
  }

  BoxId parent(BoxId b) const;

  double box_width(int layer) const noexcept { return base_width_ * static_cast<double>(std::uint64_t{1} << layer); }
  double x_left(BoxId b) const noexcept { return static_cast<double>(b.index) * box_width(b.layer); }
  double y_bottom(int layer) const noexcept { return layer * kLn2; }
  /// Upper edge of a layer; the top layer extends to max(R, ell ln 2).
  double y_top(int layer) const noexcept;

  /// Whether box b meets the open half-plane {y > level}.
  bool reaches_above(BoxId b, double level) const noexcept { return y_top(b.layer) > level; }

 private:
  double radius_;
  int ell_;
  int ell_tilde_;
  double base_width_;
  double width_;
};

/// Box containing a strip point: layer = min(floor(y / ln 2), ell), index =
/// floor(x / (2^layer b)) mod 2^{ell - layer}. Throws DomainError outside E_R.
BoxId box_of(const StripPoint& s, const Dissection& d);

/// Length of the overlap of two boxes' closed x-intervals on the circle, in
/// units of b; negative when they are disjoint, 0 when they only touch.
std::int64_t x_overlap(BoxId a, BoxId b, const Dissection& d);

BoxNeighbors box_neighbors(BoxId a, const Dissection& d, BoxAdjacency kind);
std::vector<BoxId> neighbors_B(BoxId a, const Dissection& d);
std::vector<BoxId> neighbors_Bstar(BoxId a, const Dissection& d);

bool boxes_adjacent(BoxId a, BoxId b, const Dissection& d, BoxAdjacency kind);

/// Active/inactive state per box, with respect to the truncated vertex set
/// (points in layers 0..ell_tilde). Boxes above ell_tilde are always inactive.
class ActivityMap {
 public:
  explicit ActivityMap(const Dissection& d) : state_(d.box_count(), 0) {}
  ActivityMap(const Dissection& d, bool all_active);

  bool active(const Dissection& d, BoxId b) const { return state_[d.flat(b)] != 0; }
  bool active_flat(std::uint64_t flat) const { return state_[flat] != 0; }
  void set_flat(std::uint64_t flat, bool value) { state_[flat] = value ? 1 : 0; }
  void set(const Dissection& d, BoxId b, bool value) { set_flat(d.flat(b), value); }
  std::size_t size() const noexcept { return state_.size(); }
  std::size_t active_count() const noexcept;

 private:
  std::vector<std::uint8_t> state_;
};

/// Marks the boxes containing at least one point with y < (ell_tilde + 1) ln 2.
ActivityMap mark_active_points(const Dissection& d, std::span<const StripPoint> points);
ActivityMap mark_active(const Dissection& d, const Graph& graph);

/// One line per box, "layer index active", layer-major.
void dump_activity(std::ostream& out, const Dissection& d, const ActivityMap& act);

struct BoxWalk {
  std::vector<BoxId> boxes;
  BoxAdjacency adjacency = BoxAdjacency::corner;
  /// Number of steps (one less than the number of boxes).
  std::size_t length() const noexcept { return boxes.empty() ? 0 : boxes.size() - 1; }
};

/// True iff consecutive boxes are adjacent (or equal) under the walk's adjacency.
bool is_connected_walk(const BoxWalk& walk, const Dissection& d);

using BoxSet = std::vector<BoxId>;  // sorted, duplicate-free

/// Climbs from both boxes through parents (the lower box first up to the
/// other's layer) to their lowest common box and concatenates the two chains.
/// The result is B-connected with at most 2 ell steps.
BoxWalk canonical_path_L(BoxId a, BoxId a2, const Dissection& d);

/// Labels of the B-components induced on the inactive boxes.
class InactiveComponents {
 public:
  InactiveComponents(const Dissection& d, const ActivityMap& act);
  static constexpr std::uint32_t kActive = 0xffffffffu;
  std::uint32_t label(std::uint64_t flat) const { return label_[flat]; }
  std::uint64_t size_of(std::uint32_t label) const { return sizes_[label]; }
  std::size_t count() const noexcept { return sizes_.size(); }

 private:
  std::vector<std::uint32_t> label_;
  std::vector<std::uint64_t> sizes_;
};

/// L(a, a2) together with every inactive component that meets it.
BoxSet compute_W(BoxId a, BoxId a2, const ActivityMap& act, const Dissection& d);

/// |compute_W(a, a2)| using precomputed inactive components.
std::uint64_t W_size(BoxId a, BoxId a2, const ActivityMap& act, const Dissection& d,
                     const InactiveComponents& components);

enum class BoxColor : std::uint8_t { blue, red };
using BoxColoring = std::vector<BoxColor>;  // indexed by flat box id

struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

/// If x and y are joined by a blue B-path, returns nothing. Otherwise returns a
/// red walk, connected in B*, whose boxes meet every B-walk from x to y. The
/// walk traces one B*-component of the red boundary of x's blue cluster.
/// Throws PreconditionError if x or y is red.
std::optional<BoxWalk> find_separating_red_walk(const BoxColoring& coloring, BoxId x, BoxId y, const Dissection& d);

/// A box of layer h-1 together with the 2^h - 2 boxes below it.
struct HBlock {
  int h = 1;
  BoxId top;
  bool contains(BoxId b) const noexcept {
    return b.layer < h && (b.index >> (h - 1 - b.layer)) == top.index;
  }
  std::vector<BoxId> members() const;
};

/// The 2^{ell-h+1} h-blocks tiling layers 0..h-1. Requires 1 <= h <= ell_tilde.
std::vector<HBlock> h_block_partition(const Dissection& d, int h);

/// Whether the block contains a B*-path of active member boxes from its top box
/// down to a bottom-layer box.
bool has_vertical_active_crossing(const HBlock& block, const ActivityMap& act, const Dissection& d);

/// Whether an inactive B-path joins a bottom-layer box to a box meeting {y > R/4}.
bool inactive_path_L0_to_K_exists(const ActivityMap& act, const Dissection& d);

}  // namespace kpkvb
