#pragma once

#include "json.hpp"
#include "kpkvb/analysis.hpp"
#include "kpkvb/graph.hpp"

namespace kpkvb {

/// Provenance block embedded in every report: version, model parameters, seed and size.
nlohmann::json graph_header(const Graph& g);

// Field names are stable; see README.md for the schema.
nlohmann::json to_json(const ComponentDecomposition& cd);
nlohmann::json to_json(const DiameterReport& r);
nlohmann::json to_json(const DegreeStatistics& s);
nlohmann::json to_json(const PowerLawFit& f);
nlohmann::json clustering_json(double value);

}  // namespace kpkvb
