#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpkvb/dissection.hpp"
#include "kpkvb/graph.hpp"

namespace kpkvb {

struct Counterexample {
  std::uint64_t seed = 0;  ///< instance seed (0 for file input)
  std::string detail;      ///< offending vertices / boxes
};

struct SuiteResult {
  SuiteResult() = default;
  explicit SuiteResult(std::string suite_name) : name(std::move(suite_name)) {}

  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::vector<Counterexample> examples;  ///< at most kMaxExamples

  bool passed() const noexcept { return violations == 0; }
  void merge(const SuiteResult& other);
  void record(std::uint64_t seed, std::string detail);
};

inline constexpr std::size_t kMaxExamples = 5;

// Checks on a single idealized-model graph with strip coordinates. The strip
// width and connection threshold come from R.

/// Every two vertices in equal or B-adjacent boxes must be adjacent.
SuiteResult check_box_adjacency(const Graph& g, const Dissection& d, std::uint64_t seed = 0);

/// For every edge xy and vertex z above the segment [x, y] (the segment meets
/// the vertical drop from z to the axis), z is adjacent to x or to y.
/// Coordinates are lifted across the seam so that |x - x'| is minimal.
/// Stops after `limit` triples.
SuiteResult check_above_segment(const Graph& g, double R, std::uint64_t limit, std::uint64_t seed = 0);

/// For every two vertex-disjoint edges xy, wz whose segments intersect, one of
/// xw, xz, yw, yz is an edge. Stops after `limit` crossing pairs.
SuiteResult check_crossing_edges(const Graph& g, double R, std::uint64_t limit, std::uint64_t seed = 0);

/// compute_W and W_size against a flood-fill oracle on random activity maps.
SuiteResult check_W_oracle(std::uint64_t seed, int trials);

/// Duality of find_separating_red_walk on random colorings: a walk is returned
/// exactly when no blue path exists, and every returned walk separates.
SuiteResult check_separating_walks(std::uint64_t seed, int trials);

/// d(x, x') <= c |W(A, A')| on the truncated idealized graph for `pairs`
/// random same-component pairs.
SuiteResult check_path_bound(const Graph& truncated, const Dissection& d, std::uint64_t pairs, std::uint64_t seed);

/// Box count, base width, boxes above R/2, B degree <= 8 and B* inside B for one R.
SuiteResult check_dissection_constants(double R);

enum class VerifySuite { geometry, boxes, paths, all };
VerifySuite parse_verify_suite(const std::string& name);

struct VerifyOptions {
  VerifySuite suite = VerifySuite::all;
  std::uint64_t n = 2000;
  std::uint64_t seeds = 1;
  std::uint64_t base_seed = 1;
  double alpha = 0.8;
  double nu = 1.3;
  std::uint64_t triples_per_instance = 1'000'000;
  std::uint64_t quads_per_instance = 100'000;
  std::uint64_t pairs_per_instance = 1000;
  int oracle_trials = 200;
  unsigned threads = 1;
};

/// Seed of instance i of a verify run.
std::uint64_t verify_instance_seed(std::uint64_t base_seed, std::uint64_t i);

/// Generates `seeds` idealized instances and runs the selected suites.
std::vector<SuiteResult> run_verify(const VerifyOptions& opt);

/// Graph-level suites (box adjacency, geometry) on a loaded idealized graph.
std::vector<SuiteResult> verify_graph(const Graph& g, VerifySuite suite);

}  // namespace kpkvb
