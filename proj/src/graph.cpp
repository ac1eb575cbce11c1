#include "kpkvb/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace kpkvb {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kpkvb: return "kpkvb";
    case ModelKind::poisson: return "poisson";
    case ModelKind::idealized: return "idealized";
    case ModelKind::custom: return "custom";
  }
  return "custom";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "kpkvb") return ModelKind::kpkvb;
  if (name == "poisson") return ModelKind::poisson;
  if (name == "idealized") return ModelKind::idealized;
  if (name == "custom") return ModelKind::custom;
  throw std::invalid_argument("unknown model '" + name + "'");
}

Graph::Graph(std::vector<std::vector<VertexId>> adjacency, std::vector<VertexCoord> coords, GraphInfo info)
    : coords_(std::move(coords)), info_(info) {
  const std::size_t n = adjacency.size();
  if (!coords_.empty() && coords_.size() != n)
    throw std::invalid_argument("coordinate count does not match vertex count");
  offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    auto& list = adjacency[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (VertexId u : list) {
      if (u >= n) throw std::invalid_argument("neighbor id out of range");
      if (u == v) throw std::invalid_argument("self-loop at vertex " + std::to_string(v));
    }
    offsets_[v + 1] = offsets_[v] + list.size();
  }
  targets_.reserve(offsets_[n]);
  for (auto& list : adjacency) {
    targets_.insert(targets_.end(), list.begin(), list.end());
    std::vector<VertexId>().swap(list);
  }
  for (VertexId v = 0; v < n; ++v)
    for (VertexId u : neighbors(v))
      if (!has_edge(u, v)) throw std::invalid_argument("adjacency is not symmetric");
}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges, std::vector<VertexCoord> coords,
                        GraphInfo info) {
  std::vector<std::vector<VertexId>> adjacency(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
    adjacency[u].push_back(v);
    adjacency[v].push_back(u);
  }
  return Graph(std::move(adjacency), std::move(coords), info);
}

bool Graph::has_edge(VertexId u, VertexId v) const noexcept {
  if (u >= vertex_count() || v >= vertex_count()) return false;
  auto list = neighbors(u);
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (VertexId v = 0; v < vertex_count(); ++v)
    for (VertexId u : neighbors(v))
      if (v < u) out.emplace_back(v, u);
  return out;
}

Graph Graph::induced(std::span<const VertexId> keep) const {
  std::vector<VertexId> index(vertex_count(), static_cast<VertexId>(-1));
  for (std::size_t i = 0; i < keep.size(); ++i) index[keep[i]] = static_cast<VertexId>(i);
  std::vector<std::vector<VertexId>> adjacency(keep.size());
  std::vector<VertexCoord> coords;
  if (has_coords()) coords.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (VertexId u : neighbors(keep[i]))
      if (index[u] != static_cast<VertexId>(-1)) adjacency[i].push_back(index[u]);
    if (has_coords()) coords.push_back(coords_[keep[i]]);
  }
  return Graph(std::move(adjacency), std::move(coords), info_);
}

}  // namespace kpkvb
