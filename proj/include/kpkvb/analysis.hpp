#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpkvb/dissection.hpp"
#include "kpkvb/graph.hpp"

namespace kpkvb {

struct ComponentDecomposition {
  std::vector<std::uint32_t> label;  ///< per vertex, in [0, count)
  std::vector<std::size_t> sizes;    ///< per component
  std::optional<std::uint32_t> largest;

  std::size_t count() const noexcept { return sizes.size(); }
};

/// Components numbered in order of their smallest vertex.
ComponentDecomposition connected_components(const Graph& g);

/// BFS hop counts from `source`; -1 for unreachable vertices.
std::vector<std::int32_t> bfs_distances(const Graph& g, VertexId source);

std::optional<std::uint32_t> graph_distance(const Graph& g, VertexId u, VertexId v);

enum class DiameterMethod {
  automatic,        ///< all-sources BFS on small components, iFUB on large ones
  all_sources_bfs,  ///< eccentricity of every vertex
  ifub,             ///< iterative fringe upper bound; exact
  floyd_warshall,   ///< quadratic-memory oracle, small graphs only
};

std::string to_string(DiameterMethod m);

struct DiameterReport {
  std::vector<std::uint32_t> per_component;  ///< indexed like ComponentDecomposition
  std::uint32_t max = 0;
  DiameterMethod method = DiameterMethod::all_sources_bfs;  ///< the method actually used
};

/// Exact diameter of every component. `threads` caps BFS parallelism (0 = all cores).
DiameterReport component_diameters(const Graph& g, DiameterMethod method = DiameterMethod::automatic,
                                   unsigned threads = 1);

/// Diameter bound for two graphs glued as described for the clique-merge
/// argument: 2 d1 + d2 + 2.
std::uint64_t merge_diameter_bound(std::uint64_t d1, std::uint64_t d2) noexcept;

/// Vertices with y < (ell_tilde + 1) ln 2, i.e. the ones that can make a box active.
std::vector<VertexId> truncated_vertices(const Graph& g, const Dissection& d);

struct PathBoundViolation {
  VertexId x = 0;
  VertexId x2 = 0;
  std::uint32_t distance = 0;
  std::uint64_t w_size = 0;
};

struct PathBoundResult {
  std::uint64_t pairs_checked = 0;
  std::uint64_t skipped_disconnected = 0;
  std::uint64_t violations = 0;
  double max_ratio = 0.0;  ///< max d / |W|
  std::optional<PathBoundViolation> first;
};

inline constexpr double kPathBoundConstant = 37.0;

/// For each pair (x, x') in the same component of g, checks
/// d_g(x, x') <= c |W(box(x), box(x'))|. g must carry strip coordinates and
/// should be the truncated graph whose points define `act`.
PathBoundResult verify_path_bound(const Graph& g, const ActivityMap& act, const Dissection& d,
                                  std::span<const std::pair<VertexId, VertexId>> pairs,
                                  double c = kPathBoundConstant);

struct PowerLawFit {
  double exponent = 0.0;
  std::uint64_t k_min = 0;
  double ks_distance = 0.0;
  std::uint64_t tail_size = 0;
  bool reliable = false;  ///< at least 50 tail samples and more than one distinct degree
};

struct DegreeStatistics {
  double mean = 0.0;
  std::vector<std::uint64_t> histogram;  ///< histogram[k] = #vertices of degree k
  std::optional<PowerLawFit> fit;        ///< absent when fewer than two distinct positive degrees
};

inline constexpr std::uint64_t kMinTailSamples = 50;

/// Hurwitz zeta sum_{k >= 0} (k + q)^{-s} for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

/// Discrete power-law MLE for samples >= k_min (golden-section search on the
/// exponent), with k_min chosen to minimize the Kolmogorov-Smirnov distance.
std::optional<PowerLawFit> fit_power_law(std::span<const std::uint64_t> samples);

DegreeStatistics degree_statistics(const Graph& g);

/// Mean over vertices of degree >= 2 of triangles(v) / C(deg v, 2); 0 if there are none.
double clustering_coefficient(const Graph& g);

}  // namespace kpkvb
