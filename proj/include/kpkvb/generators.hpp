#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kpkvb/geometry.hpp"
#include "kpkvb/graph.hpp"

namespace kpkvb {

enum class ConnectionRule {
  hyperbolic,  ///< hyperbolic distance <= R
  gamma,       ///< |x - x'| mod pi e^{R/2} <= e^{(y + y')/2}
};

/// True iff hyperbolic_distance(p, q) <= R. Ties count as adjacent.
bool hyperbolic_adjacent(const PolarPoint& p, const PolarPoint& q, double R) noexcept;

/// True iff the circular x-distance (period pi e^{R/2}) is at most e^{(y + y')/2}.
bool gamma_adjacent(const StripPoint& p, const StripPoint& q, double R) noexcept;

bool adjacent(const VertexCoord& a, const VertexCoord& b, ConnectionRule rule, double R) noexcept;

using AdjacencyLists = std::vector<std::vector<VertexId>>;

/// All-pairs reference builder, O(n^2).
AdjacencyLists build_edges_naive(std::span<const VertexCoord> points, ConnectionRule rule, double R);

/// Band-and-window builder. Points are bucketed into height bands and sorted by
/// angle (or x) inside each band; each point scans, per band, only the angular
/// window allowed by the rule for the band's most permissive radius. Produces
/// the same edge set as build_edges_naive.
AdjacencyLists build_edges_accelerated(std::span<const VertexCoord> points, ConnectionRule rule, double R);

/// Builds a KPKVB-rule graph on explicit polar points (strip coordinates are
/// filled in with psi).
Graph build_hyperbolic_graph(std::span<const PolarPoint> points, const ModelParams& params, GraphInfo info);

/// Builds a gamma-rule graph on explicit strip points (polar coordinates are
/// filled in with psi_inverse).
Graph build_idealized_graph(std::span<const StripPoint> points, double R, GraphInfo info);

/// First `count` points of the quasi-uniform sequence X_1, X_2, ... for `seed`.
/// Prefixes agree: shared_point_sequence(p, s, k) is a prefix of (p, s, k + 1).
std::vector<PolarPoint> shared_point_sequence(const ModelParams& params, std::uint64_t seed, std::size_t count);

/// Z ~ Poisson(N) drawn from the count stream of `seed` (independent of the point stream).
std::uint64_t poisson_vertex_count(const ModelParams& params, std::uint64_t seed);

/// G(N; alpha, nu): exactly N quasi-uniform points.
Graph generate_kpkvb(const ModelParams& params, std::uint64_t seed);

/// G_Po(N; alpha, nu): Z ~ Po(N) points from the same sequence. force_z pins Z.
Graph generate_kpkvb_poisson(const ModelParams& params, std::uint64_t seed,
                             std::optional<std::uint64_t> force_z = std::nullopt);

/// Expected point count of the idealized process: pi e^{R/2} lambda (1 - e^{-alpha R}) / alpha.
double idealized_expected_count(double alpha, double lambda, double R) noexcept;

/// Points of the Poisson process with intensity lambda e^{-alpha y} on E_R.
std::vector<StripPoint> sample_idealized_points(double alpha, double lambda, double R, Rng& rng);

/// Same process restricted to x in [x_lo, x_hi) and y in [0, y_hi), with
/// x_lo < x_hi inside the strip. Used where only a window of the strip matters.
std::vector<StripPoint> sample_idealized_window(double alpha, double lambda, double x_lo, double x_hi,
                                                double y_hi, Rng& rng);

/// Gamma_{alpha, lambda} on E_R.
Graph generate_idealized(double alpha, double lambda, double R, std::uint64_t seed);

/// G_Po and Gamma built on one shared point sequence.
struct CoupledPair {
  ModelParams params;
  std::vector<PolarPoint> shared_points;  ///< X_1..X_Z
  std::uint64_t z_count = 0;
  Graph kpkvb_graph;      ///< hyperbolic rule on X_1..X_Z
  Graph idealized_graph;  ///< gamma rule on psi(X_1)..psi(X_Z)
};

CoupledPair couple_models(const ModelParams& params, std::uint64_t seed,
                          std::optional<std::uint64_t> force_z = std::nullopt);

/// Test hook: couples explicit points.
CoupledPair couple_points(const ModelParams& params, std::vector<PolarPoint> points);

/// Stratified edge disagreement counts between the two graphs of a CoupledPair.
///   half stratum:        both radii >= R/2; counts gamma edges missing from G_Po.
///   threequarter stratum: both radii >= 3R/4; counts the symmetric difference.
struct CouplingReport {
  bool vertex_set_match = true;
  std::uint64_t disagreements_half = 0;
  std::uint64_t disagreements_threequarter = 0;
  std::uint64_t vertices_half = 0;
  std::uint64_t vertices_threequarter = 0;
  std::uint64_t pairs_half = 0;
  std::uint64_t pairs_threequarter = 0;
  std::uint64_t edges_half = 0;          ///< gamma edges inside the half stratum
  std::uint64_t edges_threequarter = 0;  ///< edges of either graph inside the 3/4 stratum

  /// disagreements / edges, 0 when the stratum has no edges.
  double fraction_half() const noexcept;
  double fraction_threequarter() const noexcept;
};

CouplingReport coupling_report(const CoupledPair& pair);

}  // namespace kpkvb
