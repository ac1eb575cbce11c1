#include "kpkvb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "kpkvb/parallel.hpp"

namespace kpkvb {

namespace {

// Reusable BFS state; only touched entries are reset between runs.
struct Bfs {
  std::vector<std::int32_t> dist;
  std::vector<VertexId> order;
  std::vector<VertexId> parent;

  explicit Bfs(std::size_t n) : dist(n, -1), parent(n, 0) { order.reserve(n); }

  // Returns the eccentricity of `source` within its component; `order` holds
  // the visited vertices in BFS order afterwards.
  std::uint32_t run(const Graph& g, VertexId source, bool keep_parents = false) {
    for (VertexId v : order) dist[v] = -1;
    order.clear();
    dist[source] = 0;
    order.push_back(source);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const VertexId v = order[head];
      for (VertexId u : g.neighbors(v)) {
        if (dist[u] >= 0) continue;
        dist[u] = dist[v] + 1;
        if (keep_parents) parent[u] = v;
        order.push_back(u);
      }
    }
    return static_cast<std::uint32_t>(dist[order.back()]);
  }
};

// Max eccentricity over `sources`, spread across up to `threads` workers.
std::uint32_t max_eccentricity(const Graph& g, std::span<const VertexId> sources, unsigned threads) {
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(1, sources.size() / 8));
  std::vector<std::uint32_t> best(workers, 0);
  parallel_for(workers, static_cast<unsigned>(workers), [&](std::size_t t) {
    Bfs bfs(g.vertex_count());
    for (std::size_t i = t; i < sources.size(); i += workers) best[t] = std::max(best[t], bfs.run(g, sources[i]));
  });
  return *std::max_element(best.begin(), best.end());
}

std::uint32_t ifub_diameter(const Graph& g, std::span<const VertexId> members, unsigned threads) {
  Bfs bfs(g.vertex_count());
  VertexId start = members.front();
  for (VertexId v : members)
    if (g.degree(v) > g.degree(start)) start = v;
  // double sweep: a far vertex, then the midpoint of a long path from it
  bfs.run(g, start);
  const VertexId a = bfs.order.back();
  const std::uint32_t ecc_a = bfs.run(g, a, true);
  VertexId mid = bfs.order.back();
  for (std::uint32_t step = 0; step < ecc_a / 2; ++step) mid = bfs.parent[mid];

  const std::uint32_t ecc_u = bfs.run(g, mid);
  std::vector<std::vector<VertexId>> levels(ecc_u + 1);
  for (VertexId v : bfs.order) levels[static_cast<std::size_t>(bfs.dist[v])].push_back(v);

  std::uint32_t lb = std::max(ecc_a, ecc_u);
  std::uint32_t ub = 2 * ecc_u;
  for (std::uint32_t i = ecc_u; ub > lb && i > 0; --i) {
    lb = std::max(lb, max_eccentricity(g, levels[i], threads));
    if (lb > 2 * (i - 1)) break;
    ub = 2 * (i - 1);
  }
  return lb;
}

std::vector<std::uint32_t> floyd_warshall_diameters(const Graph& g, const ComponentDecomposition& cd) {
  const std::size_t n = g.vertex_count();
  if (n > 2000) throw std::invalid_argument("Floyd-Warshall oracle is limited to 2000 vertices");
  constexpr std::uint32_t inf = std::numeric_limits<std::uint32_t>::max() / 2;
  std::vector<std::uint32_t> d(n * n, inf);
  for (std::size_t v = 0; v < n; ++v) {
    d[v * n + v] = 0;
    for (VertexId u : g.neighbors(static_cast<VertexId>(v))) d[v * n + u] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t dik = d[i * n + k];
      if (dik == inf) continue;
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], dik + d[k * n + j]);
    }
  std::vector<std::uint32_t> out(cd.count(), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (d[i * n + j] != inf) out[cd.label[i]] = std::max(out[cd.label[i]], d[i * n + j]);
  return out;
}

constexpr std::size_t kSmallComponent = 64;

}  // namespace

ComponentDecomposition connected_components(const Graph& g) {
  const std::size_t n = g.vertex_count();
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  ComponentDecomposition cd;
  cd.label.assign(n, unset);
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < n; ++s) {
    if (cd.label[s] != unset) continue;
    const auto id = static_cast<std::uint32_t>(cd.sizes.size());
    std::size_t size = 0;
    cd.label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      ++size;
      for (VertexId u : g.neighbors(v))
        if (cd.label[u] == unset) {
          cd.label[u] = id;
          stack.push_back(u);
        }
    }
    cd.sizes.push_back(size);
    if (!cd.largest || size > cd.sizes[*cd.largest]) cd.largest = id;
  }
  return cd;
}

std::vector<std::int32_t> bfs_distances(const Graph& g, VertexId source) {
  Bfs bfs(g.vertex_count());
  bfs.run(g, source);
  return std::move(bfs.dist);
}

std::optional<std::uint32_t> graph_distance(const Graph& g, VertexId u, VertexId v) {
  if (u == v) return 0;
  const auto dist = bfs_distances(g, u);
  if (dist[v] < 0) return std::nullopt;
  return static_cast<std::uint32_t>(dist[v]);
}

std::string to_string(DiameterMethod m) {
  switch (m) {
    case DiameterMethod::automatic: return "automatic";
    case DiameterMethod::all_sources_bfs: return "all_sources_bfs";
    case DiameterMethod::ifub: return "ifub";
    case DiameterMethod::floyd_warshall: return "floyd_warshall";
  }
  return "automatic";
}

DiameterReport component_diameters(const Graph& g, DiameterMethod method, unsigned threads) {
  const auto cd = connected_components(g);
  DiameterReport report;
  if (method == DiameterMethod::floyd_warshall) {
    report.per_component = floyd_warshall_diameters(g, cd);
    report.method = method;
  } else {
    std::vector<std::vector<VertexId>> members(cd.count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) members[cd.label[v]].push_back(v);
    report.per_component.assign(cd.count(), 0);
    report.method = method == DiameterMethod::ifub ? DiameterMethod::ifub : DiameterMethod::all_sources_bfs;
    for (std::size_t c = 0; c < cd.count(); ++c) {
      if (members[c].size() < 2) continue;
      const bool use_ifub = method == DiameterMethod::ifub ||
                            (method == DiameterMethod::automatic && members[c].size() > kSmallComponent);
      if (use_ifub) {
        report.per_component[c] = ifub_diameter(g, members[c], threads);
        report.method = DiameterMethod::ifub;
      } else {
        report.per_component[c] = max_eccentricity(g, members[c], threads);
      }
    }
  }
  for (auto d : report.per_component) report.max = std::max(report.max, d);
  return report;
}

std::uint64_t merge_diameter_bound(std::uint64_t d1, std::uint64_t d2) noexcept { return 2 * d1 + d2 + 2; }

std::vector<VertexId> truncated_vertices(const Graph& g, const Dissection& d) {
  std::vector<VertexId> keep;
  const double limit = (d.ell_tilde() + 1) * kLn2;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (g.coord(v).strip.y < limit) keep.push_back(v);
  return keep;
}

PathBoundResult verify_path_bound(const Graph& g, const ActivityMap& act, const Dissection& d,
                                  std::span<const std::pair<VertexId, VertexId>> pairs, double c) {
  PathBoundResult result;
  if (pairs.empty()) return result;
  const auto cd = connected_components(g);
  const InactiveComponents comps(d, act);
  std::vector<BoxId> box(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) box[v] = box_of(g.coord(v).strip, d);

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pairs[a].first < pairs[b].first; });

  Bfs bfs(g.vertex_count());
  std::optional<VertexId> current;
  for (std::size_t i : order) {
    const auto [x, x2] = pairs[i];
    if (cd.label[x] != cd.label[x2]) {
      ++result.skipped_disconnected;
      continue;
    }
    if (current != x) {
      bfs.run(g, x);
      current = x;
    }
    const auto dist = static_cast<std::uint32_t>(bfs.dist[x2]);
    const std::uint64_t w = W_size(box[x], box[x2], act, d, comps);
    ++result.pairs_checked;
    result.max_ratio = std::max(result.max_ratio, dist / static_cast<double>(w));
    if (dist > c * static_cast<double>(w)) {
      ++result.violations;
      if (!result.first) result.first = PathBoundViolation{x, x2, dist, w};
    }
  }
  return result;
}

double hurwitz_zeta(double s, double q) {
  constexpr int terms = 12;
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) sum += std::pow(k + q, -s);
  // Euler-Maclaurin tail from N = q + terms
  const double N = q + terms;
  const double f = std::pow(N, -s);
  sum += N * f / (s - 1.0) + f / 2.0;
  const double N2 = N * N;
  sum += s / 12.0 * f / N;
  sum -= s * (s + 1) * (s + 2) / 720.0 * f / (N * N2);
  const double s5 = s * (s + 1) * (s + 2) * (s + 3) * (s + 4);
  sum += s5 / 30240.0 * f / (N * N2 * N2);
  sum -= s5 * (s + 5) * (s + 6) / 1209600.0 * f / (N * N2 * N2 * N2);
  return sum;
}

namespace {

double fit_exponent(double n, double sum_log, double k_min) {
  auto loglik = [&](double g) { return -g * sum_log - n * std::log(hurwitz_zeta(g, k_min)); };
  double lo = 1.0 + 1e-6, hi = 10.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = loglik(a), fb = loglik(b);
  while (hi - lo > 1e-9) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = loglik(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = loglik(a);
    }
  }
  return (lo + hi) / 2.0;
}

}  // namespace

std::optional<PowerLawFit> fit_power_law(std::span<const std::uint64_t> samples) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (auto k : samples)
    if (k > 0) ++counts[k];
  if (counts.size() < 2) return std::nullopt;

  std::vector<std::uint64_t> values;
  std::vector<std::uint64_t> freq;
  for (auto [k, c] : counts) {
    values.push_back(k);
    freq.push_back(c);
  }
  const std::size_t m = values.size();
  std::vector<std::uint64_t> tail_n(m + 1, 0);
  std::vector<double> tail_log(m + 1, 0.0);
  for (std::size_t j = m; j-- > 0;) {
    tail_n[j] = tail_n[j + 1] + freq[j];
    tail_log[j] = tail_log[j + 1] + static_cast<double>(freq[j]) * std::log(static_cast<double>(values[j]));
  }
  bool any_reliable = false;
  for (std::size_t j = 0; j + 1 < m; ++j) any_reliable = any_reliable || tail_n[j] >= kMinTailSamples;

  std::optional<PowerLawFit> best;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    if (any_reliable && tail_n[j] < kMinTailSamples) break;
    const double n = static_cast<double>(tail_n[j]);
    const double k_min = static_cast<double>(values[j]);
    const double gamma = fit_exponent(n, tail_log[j], k_min);
    const double z = hurwitz_zeta(gamma, k_min);
    double ks = 0.0;
    std::uint64_t below = 0;
    for (std::size_t t = j; t < m; ++t) {
      below += freq[t];
      const double model = 1.0 - hurwitz_zeta(gamma, static_cast<double>(values[t]) + 1.0) / z;
      ks = std::max(ks, std::fabs(static_cast<double>(below) / n - model));
    }
    if (!best || ks < best->ks_distance)
      best = PowerLawFit{gamma, values[j], ks, tail_n[j], tail_n[j] >= kMinTailSamples};
  }
  return best;
}

DegreeStatistics degree_statistics(const Graph& g) {
  DegreeStatistics stats;
  const std::size_t n = g.vertex_count();
  if (n == 0) return stats;
  std::vector<std::uint64_t> degrees(n);
  std::uint64_t max_degree = 0;
  for (VertexId v = 0; v < n; ++v) {
    degrees[v] = g.degree(v);
    max_degree = std::max(max_degree, degrees[v]);
  }
  stats.mean = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);
  stats.histogram.assign(max_degree + 1, 0);
  for (auto k : degrees) ++stats.histogram[k];
  stats.fit = fit_power_law(degrees);
  return stats;
}

double clustering_coefficient(const Graph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::uint8_t> mark(n, 0);
  double sum = 0.0;
  std::size_t counted = 0;
  for (VertexId v = 0; v < n; ++v) {
    const std::size_t k = g.degree(v);
    if (k < 2) continue;
    for (VertexId u : g.neighbors(v)) mark[u] = 1;
    std::uint64_t links = 0;
    for (VertexId u : g.neighbors(v))
      for (VertexId w : g.neighbors(u)) links += mark[w];
    for (VertexId u : g.neighbors(v)) mark[u] = 0;
    sum += static_cast<double>(links) / static_cast<double>(k * (k - 1));
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

}  // namespace kpkvb
