#include "kpkvb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "kpkvb/analysis.hpp"
#include "kpkvb/dissection.hpp"
#include "kpkvb/format.hpp"
#include "kpkvb/generators.hpp"
#include "kpkvb/parallel.hpp"
#include "kpkvb/random.hpp"

namespace kpkvb {

using nlohmann::json;

// ---------------------------------------------------------------- statistics

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return std::nan("");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

// ---------------------------------------------------------------- formulas

double expected_mean_degree(double alpha, double nu) {
  const double d = alpha - 0.5;
  return 2.0 * alpha * alpha * nu / (kPi * d * d);
}

double activity_probability(double alpha, double lambda, double b, int layer) {
  const double mu = lambda * b * (1.0 - std::exp2(-alpha)) / alpha * std::exp2((1.0 - alpha) * layer);
  return -std::expm1(-mu);
}

double activity_lower_bound(double alpha, double lambda, int layer) {
  return -std::expm1(-lambda * std::exp2((1.0 - alpha) * layer) / 12.0);
}

// ---------------------------------------------------------------- kinds and config

namespace {

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::diameter_scaling, "diameter-scaling"},
    {ExperimentKind::coupling, "coupling"},
    {ExperimentKind::crossing_recursion, "crossing-recursion"},
    {ExperimentKind::degree, "degree"},
    {ExperimentKind::W_size, "W-size"},
    {ExperimentKind::L0_to_K, "L0-to-K"},
    {ExperimentKind::activity_vs_formula, "activity-vs-formula"},
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (auto [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto [k, n] : kKindNames)
    if (name == n) return k;
  std::string known;
  for (auto [k, n] : kKindNames) known += std::string(known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown experiment kind '" + name + "' (known: " + known + ")");
}

std::map<std::string, double> default_tolerances(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::diameter_scaling:
      return {{"ratio_factor", 3.0}, {"connected_fraction", 0.9}, {"connected_min_n", 1e4}, {"diameter_spread", 2.0}};
    case ExperimentKind::coupling: return {{"trend_slack", 0.0}};
    case ExperimentKind::crossing_recursion: return {{"z", 3.0}, {"min_blocks", 30.0}};
    case ExperimentKind::degree: return {{"mean_rel", 0.07}, {"exponent_abs", 0.3}, {"clustering_min", 0.1}};
    case ExperimentKind::W_size: return {{"quantile", 0.95}, {"trend_slack", 0.0}, {"nu_large", 20.0}};
    case ExperimentKind::L0_to_K:
      return {{"max_fraction", 0.05}, {"n_threshold", 16384.0}, {"trend_slack", 0.0}, {"nu_large", 20.0}};
    case ExperimentKind::activity_vs_formula: return {{"z", 3.0}};
  }
  return {};
}

std::map<std::string, double> default_options(ExperimentKind kind) {
  if (kind == ExperimentKind::W_size) return {{"pairs", 1e4}, {"full_pairs_max_boxes", 4096.0}};
  return {};
}

double ExperimentSpec::tolerance(const std::string& key) const {
  auto it = tolerances.find(key);
  if (it == tolerances.end()) throw ConfigError("missing tolerance '" + key + "'");
  return it->second;
}

double ExperimentSpec::option(const std::string& key) const {
  auto it = options.find(key);
  if (it == options.end()) throw ConfigError("missing option '" + key + "'");
  return it->second;
}

namespace {

template <typename T>
std::vector<T> read_grid(const json& obj, const char* key, std::vector<T> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  std::vector<T> out;
  try {
    if (v.is_array()) {
      for (const auto& e : v) out.push_back(e.get<T>());
    } else {
      out.push_back(v.get<T>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
  if (out.empty()) throw ConfigError(std::string("grid '") + key + "' is empty");
  return out;
}

std::map<std::string, double> read_overrides(const json& obj, const char* key, std::map<std::string, double> base,
                                              bool allow_new) {
  if (!obj.contains(key)) return base;
  const json& section = obj.at(key);
  if (!section.is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  for (auto it = section.begin(); it != section.end(); ++it) {
    if (!allow_new && !base.contains(it.key()))
      throw ConfigError(std::string("unknown ") + key + " entry '" + it.key() + "'");
    if (!it.value().is_number()) throw ConfigError(std::string(key) + " entry '" + it.key() + "' must be a number");
    base[it.key()] = it.value().get<double>();
  }
  return base;
}

ExperimentSpec parse_spec(const json& obj) {
  static const std::set<std::string> known{"kind", "name", "N", "alpha", "nu", "h", "replicates", "tolerances",
                                           "options"};
  if (!obj.is_object()) throw ConfigError("experiment entry must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.contains(it.key())) throw ConfigError("unknown experiment key '" + it.key() + "'");
  if (!obj.contains("kind") || !obj.at("kind").is_string()) throw ConfigError("experiment needs a string 'kind'");

  ExperimentSpec spec;
  spec.kind = parse_experiment_kind(obj.at("kind").get<std::string>());
  spec.name = obj.value("name", to_string(spec.kind));
  if (spec.name.empty() || spec.name.find_first_of("/\\") != std::string::npos)
    throw ConfigError("experiment name must be a plain file stem");
  spec.n_grid = read_grid<std::uint64_t>(obj, "N", spec.n_grid);
  spec.alpha_grid = read_grid<double>(obj, "alpha", spec.alpha_grid);
  spec.nu_grid = read_grid<double>(obj, "nu", {});
  spec.h_grid = read_grid<int>(obj, "h", {});
  if (obj.contains("replicates")) {
    const json& r = obj.at("replicates");
    if (!r.is_number_integer() || r.get<long long>() < 1) throw ConfigError("replicates must be an integer >= 1");
    spec.replicates = r.get<std::uint64_t>();
  }
  spec.tolerances = read_overrides(obj, "tolerances", default_tolerances(spec.kind), false);
  spec.options = read_overrides(obj, "options", default_options(spec.kind), false);

  for (double a : spec.alpha_grid)
    if (!(a > 0.0) || !(a <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  for (double nu : spec.nu_grid)
    if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  for (auto n : spec.n_grid)
    if (n == 0) throw ConfigError("N must be positive");
  if (spec.kind == ExperimentKind::crossing_recursion) {
    if (spec.h_grid.empty()) throw ConfigError("crossing-recursion needs a non-empty 'h' grid");
    for (int h : spec.h_grid)
      if (h < 1) throw ConfigError("h must be >= 1");
  }
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  json top = doc;
  json list = json::array();
  if (doc.contains("experiments")) {
    if (!doc.at("experiments").is_array() || doc.at("experiments").empty())
      throw ConfigError("'experiments' must be a non-empty array");
    list = doc.at("experiments");
    top.erase("experiments");
  } else if (doc.contains("kind")) {
    json single = doc;
    for (const char* k : {"base_seed", "threads", "output"}) single.erase(k);
    list.push_back(single);
    top = json::object();
    for (const char* k : {"base_seed", "threads", "output"})
      if (doc.contains(k)) top[k] = doc.at(k);
  } else {
    throw ConfigError("config needs 'experiments' or 'kind'");
  }
  for (auto it = top.begin(); it != top.end(); ++it) {
    const std::string& k = it.key();
    if (k != "base_seed" && k != "threads" && k != "output") throw ConfigError("unknown config key '" + k + "'");
  }
  try {
    if (top.contains("base_seed")) cfg.base_seed = top.at("base_seed").get<std::uint64_t>();
    if (top.contains("threads")) cfg.threads = top.at("threads").get<unsigned>();
    if (top.contains("output")) cfg.output = top.at("output").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  std::set<std::string> names;
  for (const auto& e : list) {
    cfg.experiments.push_back(parse_spec(e));
    if (!names.insert(cfg.experiments.back().name).second)
      throw ConfigError("duplicate experiment name '" + cfg.experiments.back().name + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------- cells, seeds, reports

double Cell::lambda() const { return nu * alpha / kPi; }
double Cell::radius() const { return radius_R(n, nu); }

std::uint64_t replicate_seed(std::uint64_t base_seed, ExperimentKind kind, const Cell& cell, std::uint64_t replicate) {
  return derive_seed(base_seed,
                     {fnv1a(to_string(kind)), cell.n, seed_tag(cell.alpha), seed_tag(cell.nu), replicate});
}

bool RunReport::passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.passed; });
}

std::size_t RunReport::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

namespace {

constexpr double kDefaultNu = 1.3;

std::vector<Cell> make_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (auto n : spec.n_grid)
    for (double a : spec.alpha_grid) {
      std::vector<double> nus = spec.nu_grid;
      if (nus.empty()) nus.push_back(a == 1.0 ? default_tolerances(ExperimentKind::L0_to_K).at("nu_large") : kDefaultNu);
      for (double nu : nus) {
        Cell c;
        c.index = cells.size();
        c.n = n;
        c.alpha = a;
        c.nu = nu;
        if (!(static_cast<double>(n) > nu))
          throw ConfigError("cell N=" + std::to_string(n) + " needs N > nu (nu=" + format_number(nu, 10) + ")");
        cells.push_back(c);
      }
    }
  return cells;
}

// Cells sharing (alpha, nu), each group sorted by N; groups in first-appearance order.
std::vector<std::vector<std::size_t>> alpha_nu_groups(const std::vector<Cell>& cells) {
  std::vector<std::vector<std::size_t>> groups;
  for (const Cell& c : cells) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return cells[g.front()].alpha == c.alpha && cells[g.front()].nu == c.nu;
    });
    if (it == groups.end()) {
      groups.push_back({c.index});
    } else {
      it->push_back(c.index);
    }
  }
  for (auto& g : groups)
    std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) { return cells[a].n < cells[b].n; });
  return groups;
}

std::string group_tag(const Cell& c) {
  return "alpha=" + format_number(c.alpha, 10) + ",nu=" + format_number(c.nu, 10);
}

std::string cell_tag(const Cell& c) { return "N=" + std::to_string(c.n) + "," + group_tag(c); }

json cell_json(const Cell& c) {
  json j;
  j["cell"] = c.index;
  j["N"] = c.n;
  j["alpha"] = c.alpha;
  j["nu"] = c.nu;
  j["lambda"] = c.lambda();
  j["R"] = c.radius();
  return j;
}

std::string join_values(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i], 6);
  return s + "]";
}

// value[k+1] <= value[k] + slack for consecutive entries.
Criterion non_increasing(std::string name, const std::vector<double>& values, double slack) {
  Criterion c{std::move(name), true, "values by increasing N: " + join_values(values)};
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] <= values[i - 1] + slack)) c.passed = false;
  return c;
}

Criterion non_decreasing(std::string name, const std::vector<double>& values) {
  Criterion c{std::move(name), true, "values by increasing N: " + join_values(values)};
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] >= values[i - 1])) c.passed = false;
  return c;
}

// Runs `job(cell, replicate, seed)` for every (cell, replicate) in parallel and
// concatenates the returned rows in (cell, replicate) order.
template <typename Job>
std::vector<Record> run_replicates(const ExperimentSpec& spec, std::uint64_t base_seed, const std::vector<Cell>& cells,
                                   unsigned threads, Job job) {
  const std::size_t per = spec.replicates;
  std::vector<std::vector<Record>> slots(cells.size() * per);
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    const Cell& cell = cells[i / per];
    const std::uint64_t rep = i % per;
    const std::uint64_t seed = replicate_seed(base_seed, spec.kind, cell, rep);
    for (auto& values : job(cell, seed)) slots[i].push_back(Record{cell.index, rep, seed, std::move(values)});
  });
  std::vector<Record> out;
  for (auto& s : slots)
    for (auto& r : s) out.push_back(std::move(r));
  return out;
}

RunReport start_report(const ExperimentSpec& spec, std::uint64_t base_seed, std::vector<std::string> columns) {
  validate_experiment(spec);
  RunReport rep;
  rep.spec = spec;
  rep.base_seed = base_seed;
  rep.cells = make_cells(spec);
  rep.columns = std::move(columns);
  return rep;
}

// Column values of one cell's records, optionally filtered.
template <typename Pred>
std::vector<double> cell_values(const RunReport& rep, std::size_t cell, const std::string& col, Pred keep) {
  const std::size_t k = rep.column(col);
  std::vector<double> out;
  for (const Record& r : rep.records)
    if (r.cell == cell && keep(r)) out.push_back(r.values[k]);
  return out;
}

std::vector<double> cell_values(const RunReport& rep, std::size_t cell, const std::string& col) {
  return cell_values(rep, cell, col, [](const Record&) { return true; });
}

json stats_json(const std::vector<double>& v) {
  return {{"mean", mean(v)}, {"median", median(v)}, {"standard_error", standard_error(v)}, {"count", v.size()}};
}

constexpr int kMaxEll = 26;

Dissection dissection_for(const Cell& c) {
  std::optional<Dissection> d;
  try {
    d.emplace(c.radius());
  } catch (const InvalidParameters& e) {
    throw ConfigError("cell " + cell_tag(c) + " is too small for a box dissection: " + e.what());
  }
  if (d->ell() > kMaxEll)
    throw ConfigError("cell " + cell_tag(c) + " needs 2^" + std::to_string(d->ell() + 1) + " boxes (N/nu too large)");
  return *d;
}

bool lemma_regime(const Cell& c, double nu_large) { return (c.alpha > 0.5 && c.alpha < 1.0) || (c.alpha == 1.0 && c.nu >= nu_large); }

}  // namespace

void validate_experiment(const ExperimentSpec& spec) {
  for (const Cell& c : make_cells(spec)) {
    switch (spec.kind) {
      case ExperimentKind::coupling:
      case ExperimentKind::degree:
        if (!(c.alpha > 0.5)) throw ConfigError(to_string(spec.kind) + " needs alpha > 1/2 (cell " + cell_tag(c) + ")");
        break;
      case ExperimentKind::crossing_recursion: {
        if (!(c.alpha < 1.0)) throw ConfigError("crossing-recursion needs alpha < 1 (cell " + cell_tag(c) + ")");
        const int hmax = *std::max_element(spec.h_grid.begin(), spec.h_grid.end());
        const Dissection d = dissection_for(c);
        if (hmax + 1 > d.ell_tilde())
          throw ConfigError("crossing-recursion needs h + 1 <= ell_tilde = " + std::to_string(d.ell_tilde()) +
                            " (cell " + cell_tag(c) + ")");
        break;
      }
      case ExperimentKind::W_size:
      case ExperimentKind::L0_to_K:
      case ExperimentKind::activity_vs_formula: dissection_for(c); break;
      case ExperimentKind::diameter_scaling: break;
    }
  }
}

// ---------------------------------------------------------------- diameter scaling

RunReport run_diameter_scaling(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads) {
  RunReport rep = start_report(spec, base_seed,
                               {"vertices", "edges", "components", "giant_size", "max_diameter", "giant_diameter",
                                "connected", "diameter_over_lnN"});
  rep.records = run_replicates(spec, base_seed, rep.cells, threads, [](const Cell& cell, std::uint64_t seed) {
    const Graph g = generate_kpkvb(ModelParams(cell.n, cell.alpha, cell.nu), seed);
    const ComponentDecomposition comps = connected_components(g);
    const DiameterReport diam = component_diameters(g, DiameterMethod::automatic, 1);
    const double giant = comps.largest ? static_cast<double>(comps.sizes[*comps.largest]) : 0.0;
    const double giant_d = comps.largest ? diam.per_component[*comps.largest] : 0.0;
    const double ln_n = std::log(static_cast<double>(cell.n));
    return std::vector<std::vector<double>>{{static_cast<double>(g.vertex_count()),
                                             static_cast<double>(g.edge_count()), static_cast<double>(comps.count()),
                                             giant, static_cast<double>(diam.max), giant_d,
                                             comps.count() <= 1 ? 1.0 : 0.0,
                                             ln_n > 0.0 ? diam.max / ln_n : std::nan("")}};
  });

  std::vector<double> med_d(rep.cells.size()), med_ratio(rep.cells.size()), conn(rep.cells.size());
  for (const Cell& c : rep.cells) {
    const auto d = cell_values(rep, c.index, "max_diameter");
    const auto ratio = cell_values(rep, c.index, "diameter_over_lnN");
    const auto connected = cell_values(rep, c.index, "connected");
    med_d[c.index] = median(d);
    med_ratio[c.index] = median(ratio);
    conn[c.index] = mean(connected);
    json j = cell_json(c);
    j["max_diameter"] = stats_json(d);
    j["diameter_over_lnN"] = stats_json(ratio);
    j["giant_diameter"] = stats_json(cell_values(rep, c.index, "giant_diameter"));
    j["connected_fraction"] = conn[c.index];
    rep.cell_summaries.push_back(j);
  }

  for (const auto& group : alpha_nu_groups(rep.cells)) {
    const Cell& first = rep.cells[group.front()];
    const std::string tag = group_tag(first);
    std::vector<std::size_t> cells;
    for (std::size_t i : group)
      if (rep.cells[i].n >= 2) cells.push_back(i);
    if (first.alpha > 0.5) {
      if (cells.size() < 2) continue;
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t i : cells) {
        lo = std::min(lo, med_ratio[i]);
        hi = std::max(hi, med_ratio[i]);
      }
      const double factor = spec.tolerance("ratio_factor");
      rep.criteria.push_back({"diameter_ratio_bounded[" + tag + "]", hi <= factor * lo,
                              "max median(D/lnN) " + format_number(hi, 6) + " vs " + format_number(factor, 6) +
                                  " x min " + format_number(lo, 6)});
      std::vector<double> x, y, meds;
      for (std::size_t i : cells) {
        for (const Record& r : rep.records)
          if (r.cell == i) {
            x.push_back(std::log(static_cast<double>(rep.cells[i].n)));
            y.push_back(r.values[rep.column("max_diameter")]);
          }
        meds.push_back(med_d[i]);
      }
      const double slope = ls_slope(x, y);
      rep.criteria.push_back({"diameter_slope_positive[" + tag + "]", slope > 0.0,
                              "least-squares slope of D on ln N = " + format_number(slope, 6)});
      rep.criteria.push_back(non_decreasing("median_diameter_nondecreasing[" + tag + "]", meds));
    } else {
      const double min_n = spec.tolerance("connected_min_n");
      const double need = spec.tolerance("connected_fraction");
      for (std::size_t i : group)
        if (static_cast<double>(rep.cells[i].n) >= min_n)
          rep.criteria.push_back({"connected_fraction[" + cell_tag(rep.cells[i]) + "]", conn[i] >= need,
                                  "fraction " + format_number(conn[i], 6) + ", need >= " + format_number(need, 6)});
      if (group.size() >= 2) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i : group) {
          lo = std::min(lo, med_d[i]);
          hi = std::max(hi, med_d[i]);
        }
        const double spread = spec.tolerance("diameter_spread");
        rep.criteria.push_back({"median_diameter_bounded[" + tag + "]", hi - lo <= spread,
                                "median diameters span [" + format_number(lo, 6) + ", " + format_number(hi, 6) +
                                    "], allowed spread " + format_number(spread, 6)});
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------- coupling

RunReport run_coupling_study(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads) {
  RunReport rep = start_report(spec, base_seed,
                               {"forced", "z", "vertex_set_match", "vertices_half", "edges_half",
                                "disagreements_half", "fraction_half", "vertices_threequarter", "edges_threequarter",
                                "disagreements_threequarter", "fraction_threequarter"});
  rep.records = run_replicates(spec, base_seed, rep.cells, threads, [](const Cell& cell, std::uint64_t seed) {
    const ModelParams params(cell.n, cell.alpha, cell.nu);
    std::vector<std::vector<double>> rows;
    for (int forced = 0; forced < 2; ++forced) {
      const CoupledPair pair =
          couple_models(params, seed, forced ? std::optional<std::uint64_t>(cell.n) : std::nullopt);
      const CouplingReport r = coupling_report(pair);
      rows.push_back({static_cast<double>(forced), static_cast<double>(pair.z_count), r.vertex_set_match ? 1.0 : 0.0,
                      static_cast<double>(r.vertices_half), static_cast<double>(r.edges_half),
                      static_cast<double>(r.disagreements_half), r.fraction_half(),
                      static_cast<double>(r.vertices_threequarter), static_cast<double>(r.edges_threequarter),
                      static_cast<double>(r.disagreements_threequarter), r.fraction_threequarter()});
    }
    return rows;
  });

  const std::size_t forced_col = rep.column("forced");
  auto mode = [&](int m) { return [&, m](const Record& r) { return r.values[forced_col] == m; }; };
  for (const Cell& c : rep.cells) {
    json j = cell_json(c);
    for (int m = 0; m < 2; ++m) {
      json s;
      for (const char* col : {"fraction_half", "fraction_threequarter", "disagreements_half",
                              "disagreements_threequarter", "z"})
        s[col] = stats_json(cell_values(rep, c.index, col, mode(m)));
      j[m ? "forced_z" : "free_z"] = s;
    }
    rep.cell_summaries.push_back(j);
  }

  bool match = true;
  for (const Record& r : rep.records) match = match && r.values[rep.column("vertex_set_match")] == 1.0;
  rep.criteria.push_back({"vertex_sets_match", match, "every coupled pair shares its vertex set"});

  const double slack = spec.tolerance("trend_slack");
  for (const auto& group : alpha_nu_groups(rep.cells)) {
    if (group.size() < 2) continue;
    const std::string tag = group_tag(rep.cells[group.front()]);
    for (int m = 0; m < 2; ++m)
      for (const char* col : {"fraction_half", "fraction_threequarter"}) {
        std::vector<double> meds;
        for (std::size_t i : group) meds.push_back(median(cell_values(rep, i, col, mode(m))));
        rep.criteria.push_back(non_increasing(std::string("median_") + col + "_non_increasing[" +
                                                  (m ? "forced_z," : "free_z,") + tag + "]",
                                              meds, slack));
      }
  }
  return rep;
}

// ---------------------------------------------------------------- activity vs closed form

RunReport run_activity_vs_formula(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads) {
  RunReport rep = start_report(spec, base_seed, {"layer", "boxes", "active", "fraction", "closed_form", "lower_bound"});
  std::vector<Dissection> dissections;
  for (const Cell& c : rep.cells) dissections.push_back(dissection_for(c));

  rep.records = run_replicates(spec, base_seed, rep.cells, threads, [&](const Cell& cell, std::uint64_t seed) {
    const Dissection& d = dissections[cell.index];
    Rng rng(seed);
    const double half = d.width() / 2.0;
    const auto points =
        sample_idealized_window(cell.alpha, cell.lambda(), -half, half, (d.ell_tilde() + 1) * kLn2, rng);
    const ActivityMap act = mark_active_points(d, points);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i <= d.ell_tilde(); ++i) {
      std::uint64_t active = 0;
      const std::uint64_t off = d.layer_offset(i), n = d.boxes_in_layer(i);
      for (std::uint64_t k = 0; k < n; ++k) active += act.active_flat(off + k);
      rows.push_back({static_cast<double>(i), static_cast<double>(n), static_cast<double>(active),
                      static_cast<double>(active) / static_cast<double>(n),
                      activity_probability(cell.alpha, cell.lambda(), d.base_width(), i),
                      activity_lower_bound(cell.alpha, cell.lambda(), i)});
    }
    return rows;
  });

  const double z = spec.tolerance("z");
  for (const Cell& c : rep.cells) {
    const Dissection& d = dissections[c.index];
    json j = cell_json(c);
    j["ell"] = d.ell();
    j["ell_tilde"] = d.ell_tilde();
    j["b"] = d.base_width();
    json layers = json::array();
    bool within = true, bound = true;
    double worst = 0.0;
    for (int i = 0; i <= d.ell_tilde(); ++i) {
      double trials = 0.0, active = 0.0;
      for (const Record& r : rep.records)
        if (r.cell == c.index && r.values[0] == i) {
          trials += r.values[1];
          active += r.values[2];
        }
      const double p = activity_probability(c.alpha, c.lambda(), d.base_width(), i);
      const double lb = activity_lower_bound(c.alpha, c.lambda(), i);
      const double p_hat = active / trials;
      const double se = std::sqrt(p * (1.0 - p) / trials);
      const double score = se > 0.0 ? (p_hat - p) / se : (p_hat == p ? 0.0 : INFINITY);
      within = within && std::abs(score) <= z;
      bound = bound && p >= lb;
      worst = std::max(worst, std::abs(score));
      layers.push_back({{"layer", i}, {"trials", trials}, {"p_hat", p_hat}, {"closed_form", p},
                        {"lower_bound", lb}, {"standard_error", se}, {"z_score", score}});
    }
    j["layers"] = layers;
    rep.cell_summaries.push_back(j);
    rep.criteria.push_back({"active_fraction_matches_closed_form[" + cell_tag(c) + "]", within,
                            "largest |z| over layers 0.." + std::to_string(d.ell_tilde()) + " = " +
                                format_number(worst, 4) + ", allowed " + format_number(z, 4)});
    rep.criteria.push_back({"closed_form_above_lower_bound[" + cell_tag(c) + "]", bound,
                            "1 - exp(-mu_i) >= 1 - exp(-lambda 2^{(1-alpha) i} / 12) for every layer"});
  }
  return rep;
}

// ---------------------------------------------------------------- crossing recursion

RunReport run_crossing_recursion(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads) {
  RunReport rep = start_report(spec, base_seed, {"level", "layer_boxes", "layer_active", "blocks", "crossings"});
  const int hmax = *std::max_element(spec.h_grid.begin(), spec.h_grid.end());
  std::vector<Dissection> dissections;
  for (const Cell& c : rep.cells) dissections.push_back(dissection_for(c));

  // One instance: the (hmax+1)-block at the left end of the strip. Activity
  // inside a block depends only on points inside it, so the rest of the strip
  // is never sampled.
  rep.records = run_replicates(spec, base_seed, rep.cells, threads, [&](const Cell& cell, std::uint64_t seed) {
    const Dissection& d = dissections[cell.index];
    Rng rng(seed);
    const double x_hi = d.box_width(hmax);
    const auto points = sample_idealized_window(cell.alpha, cell.lambda(), 0.0, x_hi, (hmax + 1) * kLn2, rng);
    ActivityMap act(d);
    for (const StripPoint& p : points) act.set(d, box_of(p, d), true);
    std::vector<std::vector<double>> rows;
    for (int level = 0; level <= hmax + 1; ++level) {
      double boxes = 0.0, active = 0.0, blocks = 0.0, crossings = 0.0;
      if (level <= hmax) {
        const std::uint64_t n = std::uint64_t{1} << (hmax - level);
        boxes = static_cast<double>(n);
        for (std::uint64_t k = 0; k < n; ++k) active += act.active(d, BoxId{level, k});
      }
      if (level >= 1) {
        const std::uint64_t n = std::uint64_t{1} << (hmax + 1 - level);
        blocks = static_cast<double>(n);
        for (std::uint64_t k = 0; k < n; ++k)
          crossings += has_vertical_active_crossing(HBlock{level, BoxId{level - 1, k}}, act, d);
      }
      rows.push_back({static_cast<double>(level), boxes, active, blocks, crossings});
    }
    return rows;
  });

  const double z = spec.tolerance("z");
  const double min_blocks = spec.tolerance("min_blocks");
  for (const Cell& c : rep.cells) {
    std::vector<double> boxes(hmax + 2, 0.0), active(hmax + 2, 0.0), blocks(hmax + 2, 0.0), cross(hmax + 2, 0.0);
    bool q1_equals_p0 = true;
    for (const Record& r : rep.records) {
      if (r.cell != c.index) continue;
      const auto l = static_cast<std::size_t>(r.values[0]);
      boxes[l] += r.values[1];
      active[l] += r.values[2];
      blocks[l] += r.values[3];
      cross[l] += r.values[4];
    }
    // Per instance: a 1-block is one bottom box, so crossings at level 1 equal
    // active boxes in layer 0.
    for (std::size_t i = 0; i + 1 < rep.records.size(); ++i) {
      const Record& r = rep.records[i];
      if (r.cell == c.index && r.values[0] == 0.0 && rep.records[i + 1].values[4] != r.values[2]) q1_equals_p0 = false;
    }
    auto p_hat = [&](int h) { return active[h] / boxes[h]; };
    auto q_hat = [&](int h) { return cross[h] / blocks[h]; };

    json j = cell_json(c);
    j["ell_tilde"] = dissections[c.index].ell_tilde();
    json levels = json::array();
    std::vector<double> qs;
    for (int h = 1; h <= hmax + 1; ++h) {
      qs.push_back(q_hat(h));
      levels.push_back({{"h", h}, {"q_hat", q_hat(h)}, {"blocks", blocks[h]}, {"p_hat", h <= hmax ? p_hat(h) : NAN}});
    }
    j["levels"] = levels;
    bool increasing = true;
    for (std::size_t i = 1; i < qs.size(); ++i) increasing = increasing && qs[i] > qs[i - 1];
    j["q_hat_increasing"] = increasing;

    rep.criteria.push_back({"q1_equals_p0[" + cell_tag(c) + "]", q1_equals_p0,
                            "q_hat_1 = " + format_number(q_hat(1), 8) + ", p_hat_0 = " + format_number(p_hat(0), 8)});
    bool thin = false;
    for (int h : spec.h_grid) {
      const double p = p_hat(h), q = q_hat(h), q1 = q_hat(h + 1);
      const double g = 2.0 * q - q * q;
      const double var = q1 * (1.0 - q1) / blocks[h + 1] + g * g * p * (1.0 - p) / boxes[h] +
                         std::pow(p * (2.0 - 2.0 * q), 2) * q * (1.0 - q) / blocks[h];
      const double sigma = std::sqrt(var);
      const double rhs = p * g;
      thin = thin || blocks[h + 1] < min_blocks;
      rep.criteria.push_back({"recursion_holds[h=" + std::to_string(h) + "," + cell_tag(c) + "]",
                              q1 >= rhs - z * sigma,
                              "q_hat_{h+1} = " + format_number(q1, 6) + ", p_hat_h (2q - q^2) = " +
                                  format_number(rhs, 6) + ", sigma = " + format_number(sigma, 4)});
    }
    j["insufficient_replicates"] = thin;
    rep.cell_summaries.push_back(j);
  }
  return rep;
}

// ---------------------------------------------------------------- W size

RunReport run_W_size_study(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads) {
  RunReport rep = start_report(spec, base_seed,
                               {"boxes", "active_boxes", "pairs", "max_W", "max_W_over_R", "mean_W", "degenerate"});
  std::vector<Dissection> dissections;
  for (const Cell& c : rep.cells) dissections.push_back(dissection_for(c));
  const auto pair_budget = static_cast<std::uint64_t>(spec.option("pairs"));
  const auto full_max = static_cast<std::uint64_t>(spec.option("full_pairs_max_boxes"));

  rep.records = run_replicates(spec, base_seed, rep.cells, threads, [&](const Cell& cell, std::uint64_t seed) {
    const Dissection& d = dissections[cell.index];
    Rng rng(seed);
    const double half = d.width() / 2.0;
    const auto points =
        sample_idealized_window(cell.alpha, cell.lambda(), -half, half, (d.ell_tilde() + 1) * kLn2, rng);
    const ActivityMap act = mark_active_points(d, points);
    const InactiveComponents comps(d, act);
    const std::uint64_t boxes = d.box_count();
    std::uint64_t pairs = 0, max_w = 0;
    double sum_w = 0.0;
    auto visit = [&](std::uint64_t a, std::uint64_t b) {
      const std::uint64_t w = W_size(d.box(a), d.box(b), act, d, comps);
      max_w = std::max(max_w, w);
      sum_w += static_cast<double>(w);
      ++pairs;
    };
    if (boxes <= full_max) {
      for (std::uint64_t a = 0; a < boxes; ++a)
        for (std::uint64_t b = a; b < boxes; ++b) visit(a, b);
    } else {
      for (std::uint64_t k = 0; k < pair_budget; ++k) {
        const std::uint64_t a = rng.below(boxes);
        visit(a, rng.below(boxes));
      }
    }
    const double active = static_cast<double>(act.active_count());
    return std::vector<std::vector<double>>{{static_cast<double>(boxes), active, static_cast<double>(pairs),
                                             static_cast<double>(max_w), static_cast<double>(max_w) / cell.radius(),
                                             sum_w / static_cast<double>(pairs), active == 0.0 ? 1.0 : 0.0}};
  });

  const double q = spec.tolerance("quantile");
  const std::size_t degen_col = rep.column("degenerate");
  auto live = [&](const Record& r) { return r.values[degen_col] == 0.0; };
  std::vector<double> qv(rep.cells.size());
  for (const Cell& c : rep.cells) {
    const auto ratios = cell_values(rep, c.index, "max_W_over_R", live);
    qv[c.index] = quantile(ratios, q);
    json j = cell_json(c);
    j["ell"] = dissections[c.index].ell();
    j["max_W_over_R"] = stats_json(ratios);
    j["max_W_over_R_quantile"] = qv[c.index];
    j["degenerate_instances"] = cell_values(rep, c.index, "degenerate").size() - ratios.size();
    j["all_active_bound_over_R"] = 2.0 * (dissections[c.index].ell() + 1) / c.radius();
    rep.cell_summaries.push_back(j);
  }
  const double slack = spec.tolerance("trend_slack");
  for (const auto& group : alpha_nu_groups(rep.cells)) {
    if (group.size() < 2 || !lemma_regime(rep.cells[group.front()], spec.tolerance("nu_large"))) continue;
    std::vector<double> vals;
    for (std::size_t i : group) vals.push_back(qv[i]);
    rep.criteria.push_back(
        non_increasing("max_W_over_R_quantile_non_increasing[" + group_tag(rep.cells[group.front()]) + "]", vals,
                       slack));
  }
  return rep;
}

// ---------------------------------------------------------------- L0 to K

RunReport run_L0_to_K_study(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads) {
  RunReport rep = start_report(spec, base_seed, {"path_exists", "active_boxes", "active_fraction_layer0"});
  std::vector<Dissection> dissections;
  for (const Cell& c : rep.cells) dissections.push_back(dissection_for(c));

  rep.records = run_replicates(spec, base_seed, rep.cells, threads, [&](const Cell& cell, std::uint64_t seed) {
    const Dissection& d = dissections[cell.index];
    Rng rng(seed);
    const double half = d.width() / 2.0;
    const auto points =
        sample_idealized_window(cell.alpha, cell.lambda(), -half, half, (d.ell_tilde() + 1) * kLn2, rng);
    const ActivityMap act = mark_active_points(d, points);
    std::uint64_t layer0 = 0;
    for (std::uint64_t k = 0; k < d.boxes_in_layer(0); ++k) layer0 += act.active_flat(k);
    return std::vector<std::vector<double>>{
        {inactive_path_L0_to_K_exists(act, d) ? 1.0 : 0.0, static_cast<double>(act.active_count()),
         static_cast<double>(layer0) / static_cast<double>(d.boxes_in_layer(0))}};
  });

  std::vector<double> freq(rep.cells.size());
  for (const Cell& c : rep.cells) {
    freq[c.index] = mean(cell_values(rep, c.index, "path_exists"));
    json j = cell_json(c);
    j["ell"] = dissections[c.index].ell();
    j["ell_tilde"] = dissections[c.index].ell_tilde();
    j["path_fraction"] = freq[c.index];
    j["active_fraction_layer0"] = stats_json(cell_values(rep, c.index, "active_fraction_layer0"));
    j["in_regime"] = lemma_regime(c, spec.tolerance("nu_large"));
    rep.cell_summaries.push_back(j);
  }
  const double cap = spec.tolerance("max_fraction");
  const double n_threshold = spec.tolerance("n_threshold");
  for (const auto& group : alpha_nu_groups(rep.cells)) {
    if (!lemma_regime(rep.cells[group.front()], spec.tolerance("nu_large"))) continue;
    std::vector<double> vals;
    for (std::size_t i : group) {
      vals.push_back(freq[i]);
      if (static_cast<double>(rep.cells[i].n) >= n_threshold)
        rep.criteria.push_back({"path_fraction_small[" + cell_tag(rep.cells[i]) + "]", freq[i] <= cap,
                                "fraction " + format_number(freq[i], 6) + ", allowed " + format_number(cap, 6)});
    }
    if (group.size() >= 2) {
      // Non-increasing steps, and a net drop unless the fraction already starts at 0.
      Criterion c = non_increasing("path_fraction_decreasing[" + group_tag(rep.cells[group.front()]) + "]", vals,
                                   spec.tolerance("trend_slack"));
      c.passed = c.passed && (vals.back() < vals.front() || vals.front() == 0.0);
      rep.criteria.push_back(c);
    }
  }
  return rep;
}

// ---------------------------------------------------------------- degree

RunReport run_degree_study(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads) {
  RunReport rep = start_report(
      spec, base_seed,
      {"vertices", "edges", "mean_degree", "target_mean", "exponent", "k_min", "tail_size", "reliable", "clustering"});
  rep.records = run_replicates(spec, base_seed, rep.cells, threads, [](const Cell& cell, std::uint64_t seed) {
    const Graph g = generate_kpkvb(ModelParams(cell.n, cell.alpha, cell.nu), seed);
    const DegreeStatistics s = degree_statistics(g);
    const double nan = std::nan("");
    return std::vector<std::vector<double>>{
        {static_cast<double>(g.vertex_count()), static_cast<double>(g.edge_count()), s.mean,
         expected_mean_degree(cell.alpha, cell.nu), s.fit ? s.fit->exponent : nan,
         s.fit ? static_cast<double>(s.fit->k_min) : nan, s.fit ? static_cast<double>(s.fit->tail_size) : 0.0,
         s.fit && s.fit->reliable ? 1.0 : 0.0, clustering_coefficient(g)}};
  });

  const double mean_rel = spec.tolerance("mean_rel");
  const double exp_abs = spec.tolerance("exponent_abs");
  const double cl_min = spec.tolerance("clustering_min");
  const std::size_t exp_col = rep.column("exponent");
  for (const Cell& c : rep.cells) {
    const double target = expected_mean_degree(c.alpha, c.nu);
    const auto means = cell_values(rep, c.index, "mean_degree");
    const auto exps = cell_values(rep, c.index, "exponent", [&](const Record& r) { return !std::isnan(r.values[exp_col]); });
    const auto clust = cell_values(rep, c.index, "clustering");
    json j = cell_json(c);
    j["target_mean"] = target;
    j["target_exponent"] = 2.0 * c.alpha + 1.0;
    j["mean_degree"] = stats_json(means);
    j["exponent"] = stats_json(exps);
    j["clustering"] = stats_json(clust);
    rep.cell_summaries.push_back(j);

    double worst = 0.0;
    for (double m : means) worst = std::max(worst, std::abs(m / target - 1.0));
    rep.criteria.push_back({"mean_degree_near_target[" + cell_tag(c) + "]", worst <= mean_rel,
                            "target " + format_number(target, 6) + ", worst relative error " +
                                format_number(worst, 4) + ", allowed " + format_number(mean_rel, 4)});
    const double med = median(exps);
    const double want = 2.0 * c.alpha + 1.0;
    rep.criteria.push_back({"exponent_near_target[" + cell_tag(c) + "]",
                            !exps.empty() && std::abs(med - want) <= exp_abs,
                            "median exponent " + format_number(med, 5) + " vs " + format_number(want, 5) + " +- " +
                                format_number(exp_abs, 3)});
    const double lowest = clust.empty() ? NAN : *std::min_element(clust.begin(), clust.end());
    rep.criteria.push_back({"clustering_bounded_below[" + cell_tag(c) + "]", lowest >= cl_min,
                            "lowest clustering " + format_number(lowest, 5) + ", need >= " + format_number(cl_min, 4)});
  }
  return rep;
}

// ---------------------------------------------------------------- dispatch and output

RunReport run_experiment(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads) {
  switch (spec.kind) {
    case ExperimentKind::diameter_scaling: return run_diameter_scaling(spec, base_seed, threads);
    case ExperimentKind::coupling: return run_coupling_study(spec, base_seed, threads);
    case ExperimentKind::crossing_recursion: return run_crossing_recursion(spec, base_seed, threads);
    case ExperimentKind::degree: return run_degree_study(spec, base_seed, threads);
    case ExperimentKind::W_size: return run_W_size_study(spec, base_seed, threads);
    case ExperimentKind::L0_to_K: return run_L0_to_K_study(spec, base_seed, threads);
    case ExperimentKind::activity_vs_formula: return run_activity_vs_formula(spec, base_seed, threads);
  }
  throw ConfigError("unhandled experiment kind");
}

void write_csv(std::ostream& out, const RunReport& report) {
  out << "kind,cell,N,alpha,nu,lambda,R,replicate,seed";
  for (const auto& c : report.columns) out << ',' << c;
  out << '\n';
  const std::string kind = to_string(report.spec.kind);
  for (const Record& r : report.records) {
    const Cell& c = report.cells[r.cell];
    out << kind << ',' << c.index << ',' << c.n << ',' << format_number(c.alpha, 10) << ','
        << format_number(c.nu, 10) << ',' << format_number(c.lambda(), 10) << ',' << format_number(c.radius(), 10)
        << ',' << r.replicate << ',' << r.seed;
    for (double v : r.values) out << ',' << format_number(v, 10);
    out << '\n';
  }
}

json summary_json(const RunReport& report) {
  json j;
  j["version"] = std::string(kVersion);
  j["kind"] = to_string(report.spec.kind);
  j["name"] = report.spec.name;
  j["base_seed"] = report.base_seed;
  j["replicates"] = report.spec.replicates;
  j["seed_rule"] = "derive_seed(base_seed, [fnv1a(kind), N, bits(alpha), bits(nu), replicate])";
  j["grids"] = {{"N", report.spec.n_grid}, {"alpha", report.spec.alpha_grid}, {"nu", report.spec.nu_grid},
                {"h", report.spec.h_grid}};
  j["tolerances"] = report.spec.tolerances;
  j["options"] = report.spec.options;
  j["columns"] = report.columns;
  j["cells"] = report.cell_summaries;
  json crit = json::array();
  for (const Criterion& c : report.criteria)
    crit.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["criteria"] = crit;
  j["passed"] = report.passed();
  return j;
}

ConfigOutcome run_config(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log) {
  namespace fs = std::filesystem;
  for (const ExperimentSpec& spec : cfg.experiments) validate_experiment(spec);
  fs::create_directories(out_dir);
  ConfigOutcome outcome;
  outcome.summary = {{"version", std::string(kVersion)}, {"base_seed", cfg.base_seed}, {"experiments", json::array()}};
  for (const ExperimentSpec& spec : cfg.experiments) {
    if (log) *log << "running " << spec.name << " (" << to_string(spec.kind) << ")\n";
    const RunReport rep = run_experiment(spec, cfg.base_seed, cfg.threads);
    const fs::path csv = fs::path(out_dir) / (spec.name + ".csv");
    const fs::path sum = fs::path(out_dir) / (spec.name + ".summary.json");
    {
      std::ofstream f(csv, std::ios::binary);
      write_csv(f, rep);
      if (!f) throw std::runtime_error("cannot write " + csv.string());
    }
    const json s = summary_json(rep);
    {
      std::ofstream f(sum, std::ios::binary);
      f << s.dump(2) << '\n';
      if (!f) throw std::runtime_error("cannot write " + sum.string());
    }
    outcome.files.push_back(csv.string());
    outcome.files.push_back(sum.string());
    json brief = {{"name", spec.name}, {"kind", to_string(spec.kind)}, {"passed", rep.passed()},
                  {"criteria", s["criteria"]}};
    outcome.summary["experiments"].push_back(brief);
    outcome.all_passed = outcome.all_passed && rep.passed();
    if (log)
      for (const Criterion& c : rep.criteria)
        *log << "  " << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  outcome.summary["passed"] = outcome.all_passed;
  const fs::path total = fs::path(out_dir) / "summary.json";
  std::ofstream f(total, std::ios::binary);
  f << outcome.summary.dump(2) << '\n';
  if (!f) throw std::runtime_error("cannot write " + total.string());
  outcome.files.push_back(total.string());
  return outcome;
}

}  // namespace kpkvb
