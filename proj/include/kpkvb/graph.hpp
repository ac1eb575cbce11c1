#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kpkvb/geometry.hpp"

namespace kpkvb {

using VertexId = std::uint32_t;
using Edge = std::pair<VertexId, VertexId>;

enum class ModelKind { kpkvb, poisson, idealized, custom };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Provenance of a generated graph, carried into serialized headers.
struct GraphInfo {
  ModelKind model = ModelKind::custom;
  std::uint64_t n_param = 0;  // N of the model (not the realized vertex count)
  double alpha = 0.0;
  double nu = 0.0;
  double radius = 0.0;
  std::uint64_t seed = 0;
};

/// Both coordinate systems of a vertex: polar in D_R and its psi image in E_R.
struct VertexCoord {
  PolarPoint polar;
  StripPoint strip;
};

/// Immutable undirected simple graph in CSR form with optional per-vertex
/// coordinates. Neighbor lists are sorted and duplicate-free.
class Graph {
 public:
  Graph() = default;

  /// Builds from per-vertex neighbor lists. Lists are sorted and deduplicated;
  /// throws std::invalid_argument on self-loops, out-of-range ids or asymmetry.
  Graph(std::vector<std::vector<VertexId>> adjacency, std::vector<VertexCoord> coords = {},
        GraphInfo info = {});

  static Graph from_edges(std::size_t n, std::span<const Edge> edges, std::vector<VertexCoord> coords = {},
                          GraphInfo info = {});

  std::size_t vertex_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return targets_.size() / 2; }

  std::span<const VertexId> neighbors(VertexId v) const noexcept {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(VertexId u, VertexId v) const noexcept;

  /// All edges (u < v), lexicographically sorted.
  std::vector<Edge> edges() const;

  bool has_coords() const noexcept { return !coords_.empty(); }
  const std::vector<VertexCoord>& coords() const noexcept { return coords_; }
  const VertexCoord& coord(VertexId v) const { return coords_.at(v); }

  const GraphInfo& info() const noexcept { return info_; }

  /// Subgraph induced by `keep` (in the given order); vertex i of the result is keep[i].
  Graph induced(std::span<const VertexId> keep) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.targets_ == b.targets_;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<VertexId> targets_;
  std::vector<VertexCoord> coords_;
  GraphInfo info_;
};

}  // namespace kpkvb
