#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "kpkvb/graph.hpp"

namespace kpkvb {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Edge-list text format:
///
///   # kpkvb graph
///   # version=0.1.0
///   # model=kpkvb
///   # N=200
///   # alpha=0.8
///   # nu=1.3
///   # R=10.0719062042
///   # lambda=0.331042281297
///   # seed=7
///   vertices 200
///   0 9.71 -2.03 -156.2 0.36      (id r theta x y, 12 significant digits)
///   ...
///   edges 512
///   0 17
///   ...
///
/// Vertex lines may carry only the id, in which case the graph has no coordinates.
void write_graph(std::ostream& out, const Graph& g);
void save_graph(const std::string& path, const Graph& g);

/// Throws ParseError (with a line number) on malformed input.
Graph read_graph(std::istream& in);
Graph load_graph(const std::string& path);

}  // namespace kpkvb
