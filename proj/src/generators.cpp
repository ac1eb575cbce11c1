#include "kpkvb/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kpkvb {

namespace {

constexpr std::uint64_t kPointStream = 0x706f696e7473ull;  // "points"
constexpr std::uint64_t kCountStream = 0x636f756e74ull;    // "count"

// Angular windows are widened by this much before the exact predicate decides.
constexpr double kWindowSlack = 1e-9;

struct BandEntry {
  double key;  // theta or x
  VertexId id;
};

struct Band {
  double lo = 0.0;  // height range [lo, hi] in y = R - r
  double hi = 0.0;
  std::vector<BandEntry> entries;
};

// Calls f(entry) for every entry whose key lies in the circular window
// [center - half_width, center + half_width], keys living in (-P/2, P/2].
template <typename F>
void scan_window(const std::vector<BandEntry>& entries, double center, double half_width, double period, F&& f) {
  if (entries.empty()) return;
  if (half_width * 2.0 >= period) {
    for (const auto& e : entries) f(e);
    return;
  }
  auto scan = [&](double lo, double hi) {
    auto it = std::lower_bound(entries.begin(), entries.end(), lo,
                               [](const BandEntry& e, double v) { return e.key < v; });
    for (; it != entries.end() && it->key <= hi; ++it) f(*it);
  };
  const double half = period / 2.0;
  double lo = center - half_width;
  double hi = center + half_width;
  if (lo < -half) {
    scan(-half, hi);
    scan(lo + period, half);
  } else if (hi > half) {
    scan(lo, half);
    scan(-half, hi - period);
  } else {
    scan(lo, hi);
  }
}

// Largest angular difference at which radii r and r_min can still be adjacent.
// Decreasing in r_min once r + r_min > R, so it bounds every radius >= r_min.
double hyperbolic_angle_bound(double r, double r_min, double R) {
  if (r_min <= 0.0 || r <= 0.0 || r + r_min <= R) return kPi;
  const double shR = std::sinh(R / 2.0);
  const double shd = std::sinh((r - r_min) / 2.0);
  const double s2 = (shR * shR - shd * shd) / (std::sinh(r) * std::sinh(r_min));
  if (s2 >= 1.0) return kPi;
  if (s2 <= 0.0) return kWindowSlack;
  return 2.0 * std::asin(std::sqrt(s2)) * (1.0 + kWindowSlack) + kWindowSlack;
}

std::vector<Band> make_bands(std::span<const VertexCoord> points, double R, bool by_angle) {
  const std::size_t count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(R)));
  std::vector<Band> bands(count);
  for (std::size_t j = 0; j < count; ++j) {
    bands[j].lo = static_cast<double>(j);
    bands[j].hi = j + 1 == count ? R : static_cast<double>(j + 1);
  }
  for (VertexId v = 0; v < points.size(); ++v) {
    const double y = points[v].strip.y;
    auto j = static_cast<std::size_t>(std::clamp(std::floor(y), 0.0, static_cast<double>(count - 1)));
    bands[j].entries.push_back({by_angle ? points[v].polar.theta : points[v].strip.x, v});
  }
  for (auto& band : bands) {
    std::sort(band.entries.begin(), band.entries.end(),
              [](const BandEntry& a, const BandEntry& b) { return a.key < b.key || (a.key == b.key && a.id < b.id); });
  }
  return bands;
}

}  // namespace

bool hyperbolic_adjacent(const PolarPoint& p, const PolarPoint& q, double R) noexcept {
  return hyperbolic_distance(p, q) <= R;
}

bool gamma_adjacent(const StripPoint& p, const StripPoint& q, double R) noexcept {
  const double width = kPi * std::exp(R / 2.0);
  return circular_distance(p.x, q.x, width) <= std::exp(0.5 * (p.y + q.y));
}

bool adjacent(const VertexCoord& a, const VertexCoord& b, ConnectionRule rule, double R) noexcept {
  return rule == ConnectionRule::hyperbolic ? hyperbolic_adjacent(a.polar, b.polar, R)
                                            : gamma_adjacent(a.strip, b.strip, R);
}

AdjacencyLists build_edges_naive(std::span<const VertexCoord> points, ConnectionRule rule, double R) {
  AdjacencyLists adj(points.size());
  for (VertexId i = 0; i < points.size(); ++i)
    for (VertexId j = i + 1; j < points.size(); ++j)
      if (adjacent(points[i], points[j], rule, R)) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

AdjacencyLists build_edges_accelerated(std::span<const VertexCoord> points, ConnectionRule rule, double R) {
  const bool hyperbolic = rule == ConnectionRule::hyperbolic;
  const double period = hyperbolic ? 2.0 * kPi : kPi * std::exp(R / 2.0);
  const auto bands = make_bands(points, R, hyperbolic);
  AdjacencyLists adj(points.size());

  for (VertexId v = 0; v < points.size(); ++v) {
    const VertexCoord& p = points[v];
    auto& out = adj[v];
    for (const Band& band : bands) {
      if (band.entries.empty()) continue;
      double center = 0.0;
      double half_width = 0.0;
      if (hyperbolic) {
        center = p.polar.theta;
        // largest radius in the band is the smallest y, i.e. the most restrictive;
        // the smallest radius R - hi is the most permissive.
        half_width = hyperbolic_angle_bound(p.polar.r, R - band.hi, R);
      } else {
        center = p.strip.x;
        half_width = std::exp(0.5 * (p.strip.y + band.hi)) * (1.0 + kWindowSlack);
      }
      scan_window(band.entries, center, half_width, period, [&](const BandEntry& e) {
        if (e.id != v && adjacent(p, points[e.id], rule, R)) out.push_back(e.id);
      });
    }
    std::sort(out.begin(), out.end());
  }
  return adj;
}

Graph build_hyperbolic_graph(std::span<const PolarPoint> points, const ModelParams& params, GraphInfo info) {
  const double R = params.radius();
  std::vector<VertexCoord> coords;
  coords.reserve(points.size());
  for (const auto& p : points) coords.push_back({p, psi(p, R)});
  auto adj = build_edges_accelerated(coords, ConnectionRule::hyperbolic, R);
  return Graph(std::move(adj), std::move(coords), info);
}

Graph build_idealized_graph(std::span<const StripPoint> points, double R, GraphInfo info) {
  std::vector<VertexCoord> coords;
  coords.reserve(points.size());
  for (const auto& s : points) coords.push_back({psi_inverse(s, R), s});
  auto adj = build_edges_accelerated(coords, ConnectionRule::gamma, R);
  return Graph(std::move(adj), std::move(coords), info);
}

std::vector<PolarPoint> shared_point_sequence(const ModelParams& params, std::uint64_t seed, std::size_t count) {
  Rng rng(derive_seed(seed, {kPointStream}));
  std::vector<PolarPoint> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) points.push_back(sample_quasi_uniform(params, rng));
  return points;
}

std::uint64_t poisson_vertex_count(const ModelParams& params, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kCountStream}));
  return rng.poisson(static_cast<double>(params.n_vertices()));
}

namespace {

GraphInfo make_info(ModelKind kind, const ModelParams& params, std::uint64_t seed) {
  return {kind, params.n_vertices(), params.alpha(), params.nu(), params.radius(), seed};
}

}  // namespace

Graph generate_kpkvb(const ModelParams& params, std::uint64_t seed) {
  const auto points = shared_point_sequence(params, seed, params.n_vertices());
  return build_hyperbolic_graph(points, params, make_info(ModelKind::kpkvb, params, seed));
}

Graph generate_kpkvb_poisson(const ModelParams& params, std::uint64_t seed, std::optional<std::uint64_t> force_z) {
  const std::uint64_t z = force_z ? *force_z : poisson_vertex_count(params, seed);
  const auto points = shared_point_sequence(params, seed, z);
  return build_hyperbolic_graph(points, params, make_info(ModelKind::poisson, params, seed));
}

double idealized_expected_count(double alpha, double lambda, double R) noexcept {
  return kPi * std::exp(R / 2.0) * lambda * (-std::expm1(-alpha * R)) / alpha;
}

std::vector<StripPoint> sample_idealized_window(double alpha, double lambda, double x_lo, double x_hi, double y_hi,
                                                Rng& rng) {
  const double mass = -std::expm1(-alpha * y_hi);  // 1 - e^{-alpha y_hi}
  const double mean = lambda * (x_hi - x_lo) * mass / alpha;
  const std::uint64_t count = rng.poisson(mean);
  std::vector<StripPoint> points;
  points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double x = x_lo + (x_hi - x_lo) * rng.uniform();
    const double y = -std::log1p(-rng.uniform() * mass) / alpha;
    points.push_back({x, std::min(y, y_hi)});
  }
  return points;
}

std::vector<StripPoint> sample_idealized_points(double alpha, double lambda, double R, Rng& rng) {
  if (!(alpha > 0.0) || !(lambda >= 0.0) || !(R > 0.0)) throw InvalidParameters("idealized model needs alpha, R > 0");
  const double width = kPi * std::exp(R / 2.0);
  const double mass = -std::expm1(-alpha * R);
  const std::uint64_t count = rng.poisson(lambda * width * mass / alpha);
  std::vector<StripPoint> points;
  points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double x = width / 2.0 - width * rng.uniform();  // (-W/2, W/2]
    const double y = -std::log1p(-rng.uniform() * mass) / alpha;
    points.push_back({x, std::min(y, R)});
  }
  return points;
}

Graph generate_idealized(double alpha, double lambda, double R, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kPointStream}));
  const auto points = sample_idealized_points(alpha, lambda, R, rng);
  GraphInfo info{ModelKind::idealized, 0, alpha, lambda * kPi / alpha, R, seed};
  return build_idealized_graph(points, R, info);
}

namespace {

CoupledPair couple_impl(const ModelParams& params, std::vector<PolarPoint> points, std::uint64_t seed) {
  const double R = params.radius();
  Graph g = build_hyperbolic_graph(points, params, make_info(ModelKind::poisson, params, seed));
  std::vector<VertexCoord> coords = g.coords();
  auto adj = build_edges_accelerated(coords, ConnectionRule::gamma, R);
  Graph gamma(std::move(adj), std::move(coords), make_info(ModelKind::idealized, params, seed));
  const std::uint64_t z = points.size();
  return CoupledPair{params, std::move(points), z, std::move(g), std::move(gamma)};
}

}  // namespace

CoupledPair couple_points(const ModelParams& params, std::vector<PolarPoint> points) {
  return couple_impl(params, std::move(points), 0);
}

CoupledPair couple_models(const ModelParams& params, std::uint64_t seed, std::optional<std::uint64_t> force_z) {
  const std::uint64_t z = force_z ? *force_z : poisson_vertex_count(params, seed);
  return couple_impl(params, shared_point_sequence(params, seed, z), seed);
}

double CouplingReport::fraction_half() const noexcept {
  return edges_half == 0 ? 0.0 : static_cast<double>(disagreements_half) / static_cast<double>(edges_half);
}

double CouplingReport::fraction_threequarter() const noexcept {
  return edges_threequarter == 0 ? 0.0
                                 : static_cast<double>(disagreements_threequarter) / static_cast<double>(edges_threequarter);
}

CouplingReport coupling_report(const CoupledPair& pair) {
  CouplingReport rep;
  const double R = pair.params.radius();
  const Graph& g = pair.kpkvb_graph;
  const Graph& gamma = pair.idealized_graph;
  const std::size_t n = pair.shared_points.size();

  rep.vertex_set_match = g.vertex_count() == n && gamma.vertex_count() == n;
  for (std::size_t i = 0; rep.vertex_set_match && i < n; ++i) {
    rep.vertex_set_match = gamma.coord(static_cast<VertexId>(i)).strip == psi(pair.shared_points[i], R);
  }

  auto in_half = [&](VertexId v) { return pair.shared_points[v].r >= R / 2.0; };
  auto in_threequarter = [&](VertexId v) { return pair.shared_points[v].r >= 0.75 * R; };
  for (VertexId v = 0; v < n; ++v) {
    rep.vertices_half += in_half(v);
    rep.vertices_threequarter += in_threequarter(v);
  }
  rep.pairs_half = rep.vertices_half * (rep.vertices_half - (rep.vertices_half > 0)) / 2;
  rep.pairs_threequarter = rep.vertices_threequarter * (rep.vertices_threequarter - (rep.vertices_threequarter > 0)) / 2;

  for (VertexId v = 0; v < n; ++v) {
    for (VertexId u : gamma.neighbors(v)) {
      if (u <= v) continue;
      const bool in_g = g.has_edge(v, u);
      if (in_half(v) && in_half(u)) {
        ++rep.edges_half;
        if (!in_g) ++rep.disagreements_half;
      }
      if (in_threequarter(v) && in_threequarter(u)) {
        ++rep.edges_threequarter;
        if (!in_g) ++rep.disagreements_threequarter;
      }
    }
    for (VertexId u : g.neighbors(v)) {
      if (u <= v || !in_threequarter(v) || !in_threequarter(u)) continue;
      if (!gamma.has_edge(v, u)) {
        ++rep.edges_threequarter;
        ++rep.disagreements_threequarter;
      }
    }
  }
  return rep;
}

}  // namespace kpkvb
