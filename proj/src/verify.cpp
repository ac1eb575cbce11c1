#include "kpkvb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "kpkvb/analysis.hpp"
#include "kpkvb/generators.hpp"
#include "kpkvb/parallel.hpp"

namespace kpkvb {

void SuiteResult::merge(const SuiteResult& other) {
  checked += other.checked;
  violations += other.violations;
  for (const auto& e : other.examples)
    if (examples.size() < kMaxExamples) examples.push_back(e);
}

void SuiteResult::record(std::uint64_t seed, std::string detail) {
  ++violations;
  if (examples.size() < kMaxExamples) examples.push_back({seed, std::move(detail)});
}

namespace {

struct Lifted {
  double x;
  double y;
};

// x of b moved by a multiple of the width so that it is closest to a.x.
double lift_towards(double ax, double bx, double width) {
  double dx = std::remainder(bx - ax, width);
  return ax + dx;
}

struct SortedByX {
  std::vector<double> x;
  std::vector<VertexId> id;
};

SortedByX sort_by_x(const Graph& g) {
  std::vector<VertexId> order(g.vertex_count());
  for (VertexId v = 0; v < order.size(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
    const double xa = g.coord(a).strip.x, xb = g.coord(b).strip.x;
    return xa < xb || (xa == xb && a < b);
  });
  SortedByX s;
  s.id = order;
  for (VertexId v : order) s.x.push_back(g.coord(v).strip.x);
  return s;
}

// Calls f(id, lifted_x) for each vertex whose x, shifted by a multiple of the
// width, lands in [lo, hi]. Requires hi - lo < width.
template <typename F>
void for_each_in_range(const SortedByX& s, double lo, double hi, double width, F&& f) {
  for (double shift : {-width, 0.0, width}) {
    auto it = std::lower_bound(s.x.begin(), s.x.end(), lo - shift);
    for (; it != s.x.end() && *it <= hi - shift; ++it) f(s.id[static_cast<std::size_t>(it - s.x.begin())], *it + shift);
  }
}

double cross(Lifted o, Lifted a, Lifted b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Lifted p, Lifted q, Lifted r) {
  return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
         r.y <= std::max(p.y, q.y);
}

bool segments_intersect(Lifted p1, Lifted p2, Lifted q1, Lifted q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

std::string describe_vertex(const Graph& g, VertexId v) {
  std::ostringstream out;
  out.precision(12);
  out << v << "(x=" << g.coord(v).strip.x << ",y=" << g.coord(v).strip.y << ")";
  return out.str();
}

std::vector<char> flood(const Dissection& d, const std::vector<std::uint64_t>& sources,
                        const std::vector<char>& allowed) {
  std::vector<char> seen(d.box_count(), 0);
  std::deque<std::uint64_t> q;
  for (auto s : sources)
    if (allowed[s] && !seen[s]) {
      seen[s] = 1;
      q.push_back(s);
    }
  while (!q.empty()) {
    const auto cur = q.front();
    q.pop_front();
    for (std::uint64_t g = 0; g < d.box_count(); ++g)
      if (!seen[g] && allowed[g] && boxes_adjacent(d.box(cur), d.box(g), d, BoxAdjacency::corner)) {
        seen[g] = 1;
        q.push_back(g);
      }
  }
  return seen;
}

}  // namespace

SuiteResult check_box_adjacency(const Graph& g, const Dissection& d, std::uint64_t seed) {
  SuiteResult res{"box-adjacency"};
  std::unordered_map<std::uint64_t, std::vector<VertexId>> by_box;
  for (VertexId v = 0; v < g.vertex_count(); ++v) by_box[d.flat(box_of(g.coord(v).strip, d))].push_back(v);
  std::vector<std::uint64_t> keys;
  for (const auto& kv : by_box) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  auto check_pair = [&](VertexId u, VertexId v) {
    ++res.checked;
    if (!g.has_edge(u, v))
      res.record(seed, "vertices " + describe_vertex(g, u) + " and " + describe_vertex(g, v) +
                           " lie in equal or B-adjacent boxes but are not adjacent");
  };
  for (auto key : keys) {
    const auto& here = by_box[key];
    for (std::size_t i = 0; i < here.size(); ++i)
      for (std::size_t j = i + 1; j < here.size(); ++j) check_pair(here[i], here[j]);
    for (BoxId nb : box_neighbors(d.box(key), d, BoxAdjacency::corner)) {
      const auto f = d.flat(nb);
      if (f <= key) continue;  // each unordered box pair once
      auto it = by_box.find(f);
      if (it == by_box.end()) continue;
      for (VertexId u : here)
        for (VertexId v : it->second) check_pair(u, v);
    }
  }
  return res;
}

SuiteResult check_above_segment(const Graph& g, double R, std::uint64_t limit, std::uint64_t seed) {
  SuiteResult res{"above-segment"};
  if (!g.has_coords()) return res;
  const double width = kPi * std::exp(R / 2.0);
  const auto sorted = sort_by_x(g);
  for (auto [a, b] : g.edges()) {
    const auto& pa = g.coord(a).strip;
    const auto& pb = g.coord(b).strip;
    Lifted p{pa.x, pa.y};
    Lifted q{lift_towards(pa.x, pb.x, width), pb.y};
    if (q.x < p.x) std::swap(p, q);
    const double span = q.x - p.x;
    for_each_in_range(sorted, p.x, q.x, width, [&](VertexId z, double zx) {
      if (z == a || z == b || res.checked >= limit) return;
      const double t = span > 0.0 ? (zx - p.x) / span : 0.0;
      const double h = p.y + t * (q.y - p.y);
      if (!(g.coord(z).strip.y > h)) return;
      ++res.checked;
      if (!g.has_edge(z, a) && !g.has_edge(z, b))
        res.record(seed, "edge " + describe_vertex(g, a) + "-" + describe_vertex(g, b) + " with " +
                             describe_vertex(g, z) + " above it, adjacent to neither");
    });
    if (res.checked >= limit) break;
  }
  return res;
}

SuiteResult check_crossing_edges(const Graph& g, double R, std::uint64_t limit, std::uint64_t seed) {
  SuiteResult res{"crossing-edges"};
  if (!g.has_coords()) return res;
  const double width = kPi * std::exp(R / 2.0);
  struct Seg {
    Lifted p, q;  // p.x <= q.x
    VertexId a, b;
  };
  std::vector<Seg> segs;
  const auto edges = g.edges();
  for (auto [a, b] : edges) {
    const auto& pa = g.coord(a).strip;
    const auto& pb = g.coord(b).strip;
    Seg s{{pa.x, pa.y}, {lift_towards(pa.x, pb.x, width), pb.y}, a, b};
    if (s.q.x < s.p.x) std::swap(s.p, s.q);
    segs.push_back(s);
  }
  // originals plus copies shifted one width to the right, sorted by left end
  std::vector<std::pair<double, std::size_t>> entries;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    entries.emplace_back(segs[i].p.x, i);
    entries.emplace_back(segs[i].p.x + width, i + segs.size());
  }
  std::sort(entries.begin(), entries.end());
  for (std::size_t e = 0; e < entries.size() && res.checked < limit; ++e) {
    if (entries[e].second >= segs.size()) continue;
    const Seg& s1 = segs[entries[e].second];
    for (std::size_t f = e + 1; f < entries.size() && entries[f].first <= s1.q.x; ++f) {
      const bool shifted = entries[f].second >= segs.size();
      Seg s2 = segs[entries[f].second % segs.size()];
      if (shifted) {
        s2.p.x += width;
        s2.q.x += width;
      }
      if (s2.a == s1.a || s2.a == s1.b || s2.b == s1.a || s2.b == s1.b) continue;
      if (!segments_intersect(s1.p, s1.q, s2.p, s2.q)) continue;
      ++res.checked;
      if (!g.has_edge(s1.a, s2.a) && !g.has_edge(s1.a, s2.b) && !g.has_edge(s1.b, s2.a) && !g.has_edge(s1.b, s2.b))
        res.record(seed, "crossing edges " + describe_vertex(g, s1.a) + "-" + describe_vertex(g, s1.b) + " and " +
                             describe_vertex(g, s2.a) + "-" + describe_vertex(g, s2.b) + " with no connecting edge");
      if (res.checked >= limit) break;
    }
  }
  return res;
}

SuiteResult check_W_oracle(std::uint64_t seed, int trials) {
  SuiteResult res{"W-oracle"};
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Dissection d(3.0 + 2.5 * rng.uniform());
    ActivityMap act(d);
    const double density = rng.uniform();
    for (std::uint64_t f = 0; f < d.box_count(); ++f) act.set_flat(f, rng.uniform() < density);
    const BoxId a = d.box(rng.below(d.box_count()));
    const BoxId b = d.box(rng.below(d.box_count()));
    const auto L = canonical_path_L(a, b, d);
    std::vector<char> in_L(d.box_count(), 0);
    for (auto box : L.boxes) in_L[d.flat(box)] = 1;
    std::vector<char> inactive(d.box_count(), 0);
    for (std::uint64_t f = 0; f < d.box_count(); ++f) inactive[f] = !act.active_flat(f);
    // one flood per inactive component; every box it reaches shares the verdict
    std::vector<signed char> verdict(d.box_count(), -1);
    std::vector<std::uint64_t> expect;
    for (std::uint64_t f = 0; f < d.box_count(); ++f) {
      if (inactive[f] && verdict[f] < 0) {
        const auto reach = flood(d, {f}, inactive);
        bool meets = false;
        for (std::uint64_t g = 0; g < d.box_count() && !meets; ++g) meets = reach[g] && in_L[g];
        for (std::uint64_t g = 0; g < d.box_count(); ++g)
          if (reach[g]) verdict[g] = meets;
      }
      if (in_L[f] || (inactive[f] && verdict[f] == 1)) expect.push_back(f);
    }
    std::vector<std::uint64_t> got;
    for (auto box : compute_W(a, b, act, d)) got.push_back(d.flat(box));
    std::sort(got.begin(), got.end());
    const InactiveComponents comps(d, act);
    ++res.checked;
    if (got != expect || W_size(a, b, act, d, comps) != expect.size() || !is_connected_walk(L, d)) {
      std::ostringstream out;
      out << "trial " << t << ": R=" << d.radius() << " boxes (" << a.layer << "," << a.index << ") and (" << b.layer
          << "," << b.index << "): |W|=" << got.size() << " expected " << expect.size();
      res.record(seed, out.str());
    }
  }
  return res;
}

SuiteResult check_separating_walks(std::uint64_t seed, int trials) {
  SuiteResult res{"separating-walk"};
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Dissection d(2.0 + 3.0 * rng.uniform());
    BoxColoring col(d.box_count());
    const double p = 0.15 + 0.7 * rng.uniform();
    for (auto& c : col) c = rng.uniform() < p ? BoxColor::red : BoxColor::blue;
    const std::uint64_t fx = rng.below(d.box_count());
    const std::uint64_t fy = rng.below(d.box_count());
    col[fx] = col[fy] = BoxColor::blue;
    std::vector<char> blue(d.box_count(), 0);
    for (std::uint64_t f = 0; f < d.box_count(); ++f) blue[f] = col[f] == BoxColor::blue;
    const bool connected = flood(d, {fx}, blue)[fy];
    ++res.checked;
    std::string problem;
    try {
      const auto walk = find_separating_red_walk(col, d.box(fx), d.box(fy), d);
      if (walk.has_value() == connected) {
        problem = connected ? "walk returned although a blue path exists" : "no walk although no blue path exists";
      } else if (walk) {
        std::vector<char> allowed(d.box_count(), 1);
        for (auto b : walk->boxes) {
          if (col[d.flat(b)] != BoxColor::red) problem = "walk contains a blue box";
          allowed[d.flat(b)] = 0;
        }
        if (!is_connected_walk(*walk, d) || walk->adjacency != BoxAdjacency::edge) problem = "walk not B*-connected";
        if (flood(d, {fx}, allowed)[fy]) problem = "walk does not separate";
      }
    } catch (const std::logic_error& e) {
      problem = e.what();
    }
    if (!problem.empty()) {
      std::ostringstream out;
      out << "trial " << t << ": R=" << d.radius() << " x=" << fx << " y=" << fy << ": " << problem;
      res.record(seed, out.str());
    }
  }
  return res;
}

SuiteResult check_path_bound(const Graph& truncated, const Dissection& d, std::uint64_t pairs, std::uint64_t seed) {
  SuiteResult res{"path-bound"};
  if (truncated.vertex_count() == 0) return res;
  const auto cd = connected_components(truncated);
  std::vector<std::vector<VertexId>> members(cd.count());
  for (VertexId v = 0; v < truncated.vertex_count(); ++v) members[cd.label[v]].push_back(v);
  Rng rng(derive_seed(seed, {0x70617468ull}));
  std::vector<std::pair<VertexId, VertexId>> sample;
  const std::uint64_t per_source = 10;
  while (sample.size() < pairs) {
    const auto x = static_cast<VertexId>(rng.below(truncated.vertex_count()));
    const auto& comp = members[cd.label[x]];
    for (std::uint64_t k = 0; k < per_source && sample.size() < pairs; ++k)
      sample.emplace_back(x, comp[rng.below(comp.size())]);
  }
  const auto act = mark_active(d, truncated);
  const auto r = verify_path_bound(truncated, act, d, sample);
  res.checked = r.pairs_checked;
  res.violations = r.violations;
  if (r.first) {
    std::ostringstream out;
    out << "pair " << describe_vertex(truncated, r.first->x) << " - " << describe_vertex(truncated, r.first->x2)
        << ": distance " << r.first->distance << " > " << kPathBoundConstant << " * |W| = " << kPathBoundConstant
        << " * " << r.first->w_size;
    res.examples.push_back({seed, out.str()});
  }
  return res;
}

SuiteResult check_dissection_constants(double R) {
  SuiteResult res{"dissection-constants"};
  std::ostringstream where;
  where << "R=" << R << ": ";
  const Dissection d(R);
  ++res.checked;
  if (d.box_count() != (std::uint64_t{1} << (d.ell() + 1)) - 1) res.record(0, where.str() + "box count");
  const double b = d.base_width();
  if (!(b >= 1.0 / 6.0 && b < 1.0 / 3.0)) res.record(0, where.str() + "base width out of [1/6, 1/3)");
  std::uint64_t above = 0;
  for (int i = 0; i <= d.ell(); ++i)
    if (d.reaches_above({i, 0}, R / 2.0)) above += d.boxes_in_layer(i);
  if (above > 63) res.record(0, where.str() + std::to_string(above) + " boxes above R/2");

  // exhaustive when small, else the top layers, the seam and random samples per layer
  std::vector<BoxId> probe;
  if (d.box_count() <= (std::uint64_t{1} << 16)) {
    for (std::uint64_t f = 0; f < d.box_count(); ++f) probe.push_back(d.box(f));
  } else {
    Rng rng(derive_seed(0x626f78ull, {seed_tag(R)}));
    for (int i = 0; i <= d.ell(); ++i) {
      const std::uint64_t count = d.boxes_in_layer(i);
      if (count <= 64) {
        for (std::uint64_t k = 0; k < count; ++k) probe.push_back({i, k});
        continue;
      }
      for (std::uint64_t k : {std::uint64_t{0}, std::uint64_t{1}, count / 2 - 1, count / 2, count - 2, count - 1})
        probe.push_back({i, k});
      for (int s = 0; s < 64; ++s) probe.push_back({i, rng.below(count)});
    }
  }
  for (BoxId a : probe) {
    const auto nb = box_neighbors(a, d, BoxAdjacency::corner);
    const auto nbs = box_neighbors(a, d, BoxAdjacency::edge);
    ++res.checked;
    std::ostringstream box;
    box << where.str() << "box (" << a.layer << "," << a.index << "): ";
    if (nb.size() > 8) res.record(0, box.str() + "B degree " + std::to_string(nb.size()));
    for (BoxId c : nbs)
      if (std::find(nb.begin(), nb.end(), c) == nb.end()) res.record(0, box.str() + "B* neighbor missing from B");
    for (BoxId c : nb) {
      const auto back = box_neighbors(c, d, BoxAdjacency::corner);
      if (std::find(back.begin(), back.end(), a) == back.end()) res.record(0, box.str() + "B not symmetric");
    }
  }
  return res;
}

VerifySuite parse_verify_suite(const std::string& name) {
  if (name == "geometry") return VerifySuite::geometry;
  if (name == "boxes") return VerifySuite::boxes;
  if (name == "paths") return VerifySuite::paths;
  if (name == "all") return VerifySuite::all;
  throw std::invalid_argument("unknown suite '" + name + "'");
}

std::uint64_t verify_instance_seed(std::uint64_t base_seed, std::uint64_t i) {
  return derive_seed(base_seed, {0x766572696679ull, i});
}

std::vector<SuiteResult> run_verify(const VerifyOptions& opt) {
  if (opt.seeds == 0) throw InvalidParameters("at least one seed is required");
  const ModelParams params(opt.n, opt.alpha, opt.nu);
  const double R = params.radius();
  const bool geometry = opt.suite == VerifySuite::geometry || opt.suite == VerifySuite::all;
  const bool boxes = opt.suite == VerifySuite::boxes || opt.suite == VerifySuite::all;
  const bool paths = opt.suite == VerifySuite::paths || opt.suite == VerifySuite::all;

  std::vector<std::vector<SuiteResult>> per_seed(opt.seeds);
  parallel_for(opt.seeds, opt.threads, [&](std::size_t i) {
    const std::uint64_t seed = verify_instance_seed(opt.base_seed, i);
    const Graph g = generate_idealized(params.alpha(), params.lambda(), R, seed);
    const Dissection d(R);
    auto& out = per_seed[i];
    if (boxes) {
      out.push_back(check_box_adjacency(g, d, seed));
      out.push_back(check_W_oracle(seed, opt.oracle_trials));
      out.push_back(check_separating_walks(seed, opt.oracle_trials));
    }
    if (geometry) {
      out.push_back(check_above_segment(g, R, opt.triples_per_instance, seed));
      out.push_back(check_crossing_edges(g, R, opt.quads_per_instance, seed));
    }
    if (paths) out.push_back(check_path_bound(g.induced(truncated_vertices(g, d)), d, opt.pairs_per_instance, seed));
  });
  std::vector<SuiteResult> merged;
  if (boxes) merged.push_back(check_dissection_constants(R));
  for (const auto& results : per_seed)
    for (const auto& r : results) {
      auto it = std::find_if(merged.begin(), merged.end(), [&](const SuiteResult& m) { return m.name == r.name; });
      if (it == merged.end()) merged.push_back(r);
      else it->merge(r);
    }
  return merged;
}

std::vector<SuiteResult> verify_graph(const Graph& g, VerifySuite suite) {
  if (!g.has_coords()) throw InvalidParameters("graph file carries no coordinates");
  const double R = g.info().radius;
  const std::uint64_t seed = g.info().seed;
  std::vector<SuiteResult> out;
  if (suite == VerifySuite::boxes || suite == VerifySuite::all) out.push_back(check_box_adjacency(g, Dissection(R), seed));
  if (suite == VerifySuite::geometry || suite == VerifySuite::all) {
    out.push_back(check_above_segment(g, R, ~std::uint64_t{0}, seed));
    out.push_back(check_crossing_edges(g, R, ~std::uint64_t{0}, seed));
  }
  if (suite == VerifySuite::paths || suite == VerifySuite::all) {
    const Dissection d(R);
    out.push_back(check_path_bound(g.induced(truncated_vertices(g, d)), d, 1000, seed));
  }
  return out;
}

}  // namespace kpkvb
