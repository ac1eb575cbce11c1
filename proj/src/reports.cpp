#include "kpkvb/reports.hpp"

#include <algorithm>

#include "kpkvb/format.hpp"

namespace kpkvb {

nlohmann::json graph_header(const Graph& g) {
  const auto& info = g.info();
  return {
      {"version", std::string(kVersion)},
      {"model", to_string(info.model)},
      {"N", info.n_param},
      {"alpha", info.alpha},
      {"nu", info.nu},
      {"R", info.radius},
      {"lambda", info.nu * info.alpha / kPi},
      {"seed", info.seed},
      {"vertices", g.vertex_count()},
      {"edges", g.edge_count()},
  };
}

nlohmann::json to_json(const ComponentDecomposition& cd) {
  std::vector<std::size_t> sizes = cd.sizes;
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return {
      {"report", "components"},
      {"count", cd.count()},
      {"largest_size", sizes.empty() ? 0 : sizes.front()},
      {"sizes_descending", sizes},
  };
}

nlohmann::json to_json(const DiameterReport& r) {
  return {
      {"report", "diameter"},
      {"max", r.max},
      {"method", to_string(r.method)},
      {"components", r.per_component.size()},
      {"per_component", r.per_component},
  };
}

nlohmann::json to_json(const PowerLawFit& f) {
  return {
      {"exponent", f.exponent},
      {"k_min", f.k_min},
      {"ks_distance", f.ks_distance},
      {"tail_size", f.tail_size},
      {"reliable", f.reliable},
  };
}

nlohmann::json to_json(const DegreeStatistics& s) {
  return {
      {"report", "degrees"},
      {"mean", s.mean},
      {"histogram", s.histogram},
      {"fit", s.fit ? to_json(*s.fit) : nlohmann::json(nullptr)},
      {"fit_reliable", s.fit.has_value() && s.fit->reliable},
  };
}

nlohmann::json clustering_json(double value) {
  return {{"report", "clustering"}, {"value", value}};
}

}  // namespace kpkvb
