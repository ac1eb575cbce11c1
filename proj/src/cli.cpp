#include "kpkvb/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "kpkvb/analysis.hpp"
#include "kpkvb/experiments.hpp"
#include "kpkvb/format.hpp"
#include "kpkvb/generators.hpp"
#include "kpkvb/graph_io.hpp"
#include "kpkvb/reports.hpp"
#include "kpkvb/verify.hpp"

namespace kpkvb {

namespace {

constexpr const char* kDefaultOutDir = "kpkvb-out";
constexpr const char* kOutDirEnv = "KPKVB_OUT_DIR";

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GenerateFlags {
  std::string model = "kpkvb";
  std::uint64_t n = 0;
  double alpha = 0.8;
  double nu = 1.3;
  std::uint64_t seed = 1;
  std::string out;
};

struct AnalyzeFlags {
  std::string in;
  std::string report;
  std::string method = "automatic";
  std::string out = "-";
};

struct ExperimentFlags {
  std::string config;
  std::string out_dir;
};

struct VerifyFlags {
  std::string suite = "all";
  std::string in;
  VerifyOptions opt;
};

// Writes to a file, or to `out` for "-".
template <typename F>
void emit(const std::string& path, std::ostream& out, F&& write) {
  if (path == "-") {
    write(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(f);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

std::string num(double v) { return format_number(v, 12); }

int cmd_generate(const GenerateFlags& f, unsigned threads, std::ostream& out, std::ostream& err) {
  (void)threads;
  ModelKind kind;
  try {
    kind = parse_model_kind(f.model);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (kind == ModelKind::custom) throw UsageError("--model must be kpkvb, poisson or idealized");
  std::unique_ptr<ModelParams> params;
  try {
    params = std::make_unique<ModelParams>(f.n, f.alpha, f.nu);
  } catch (const InvalidParameters& e) {
    throw UsageError(e.what());
  }
  err << "generate: model=" << f.model << " N=" << f.n << " alpha=" << num(f.alpha) << " nu=" << num(f.nu)
      << " R=" << num(params->radius()) << " lambda=" << num(params->lambda()) << " seed=" << f.seed << '\n';
  Graph g;
  switch (kind) {
    case ModelKind::kpkvb: g = generate_kpkvb(*params, f.seed); break;
    case ModelKind::poisson: g = generate_kpkvb_poisson(*params, f.seed); break;
    default: g = generate_idealized(params->alpha(), params->lambda(), params->radius(), f.seed); break;
  }
  emit(f.out, out, [&](std::ostream& o) { write_graph(o, g); });
  err << "generate: vertices=" << g.vertex_count() << " edges=" << g.edge_count() << " -> " << f.out << '\n';
  return kExitOk;
}

DiameterMethod parse_method(const std::string& s) {
  if (s == "automatic") return DiameterMethod::automatic;
  if (s == "bfs") return DiameterMethod::all_sources_bfs;
  if (s == "ifub") return DiameterMethod::ifub;
  if (s == "floyd-warshall") return DiameterMethod::floyd_warshall;
  throw UsageError("unknown --method '" + s + "'");
}

int cmd_analyze(const AnalyzeFlags& f, unsigned threads, std::ostream& out, std::ostream& err) {
  const DiameterMethod method = parse_method(f.method);
  const Graph g = load_graph(f.in);
  err << "analyze: in=" << f.in << " report=" << f.report << " vertices=" << g.vertex_count()
      << " edges=" << g.edge_count() << " model=" << to_string(g.info().model) << " seed=" << g.info().seed << '\n';
  nlohmann::json body;
  if (f.report == "diameter") {
    body = to_json(component_diameters(g, method, threads));
  } else if (f.report == "degrees") {
    body = to_json(degree_statistics(g));
  } else if (f.report == "clustering") {
    body = clustering_json(clustering_coefficient(g));
  } else if (f.report == "components") {
    body = to_json(connected_components(g));
  } else {
    throw UsageError("unknown --report '" + f.report + "'");
  }
  body["graph"] = graph_header(g);
  body["source"] = f.in;
  emit(f.out, out, [&](std::ostream& o) { o << body.dump(2) << '\n'; });
  return kExitOk;
}

int cmd_experiment(const ExperimentFlags& f, std::optional<unsigned> threads, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = load_config(f.config);
  if (threads) cfg.threads = *threads;
  std::string dir = f.out_dir;
  if (dir.empty())
    if (const char* env = std::getenv(kOutDirEnv); env && *env) dir = env;
  if (dir.empty()) dir = cfg.output;
  if (dir.empty()) dir = kDefaultOutDir;
  err << "experiment: config=" << f.config << " base_seed=" << cfg.base_seed << " threads=" << cfg.threads
      << " out-dir=" << dir << '\n';
  for (const auto& spec : cfg.experiments) {
    err << "  " << spec.name << ": kind=" << to_string(spec.kind) << " replicates=" << spec.replicates << " N=[";
    for (std::size_t i = 0; i < spec.n_grid.size(); ++i) err << (i ? "," : "") << spec.n_grid[i];
    err << "] alpha=[";
    for (std::size_t i = 0; i < spec.alpha_grid.size(); ++i) err << (i ? "," : "") << num(spec.alpha_grid[i]);
    err << "] nu=[";
    for (std::size_t i = 0; i < spec.nu_grid.size(); ++i) err << (i ? "," : "") << num(spec.nu_grid[i]);
    err << "]\n";
  }
  const ConfigOutcome outcome = run_config(cfg, dir, &err);
  for (const auto& file : outcome.files) out << file << '\n';
  err << "experiment: " << (outcome.all_passed ? "all criteria passed" : "some criteria failed") << '\n';
  return outcome.all_passed ? kExitOk : kExitViolations;
}

int cmd_verify(VerifyFlags f, std::optional<unsigned> threads, std::ostream& out, std::ostream& err) {
  VerifySuite suite;
  try {
    suite = parse_verify_suite(f.suite);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  f.opt.suite = suite;
  if (threads) f.opt.threads = *threads;
  std::vector<SuiteResult> results;
  std::string repro_prefix;
  if (!f.in.empty()) {
    err << "verify: suite=" << f.suite << " in=" << f.in << '\n';
    results = verify_graph(load_graph(f.in), suite);
    repro_prefix = "kpkvb verify --suite " + f.suite + " --in " + f.in;
  } else {
    if (f.opt.seeds == 0) throw UsageError("--seeds must be at least 1");
    try {
      const ModelParams params(f.opt.n, f.opt.alpha, f.opt.nu);
      err << "verify: suite=" << f.suite << " N=" << f.opt.n << " alpha=" << num(f.opt.alpha)
          << " nu=" << num(f.opt.nu) << " R=" << num(params.radius()) << " lambda=" << num(params.lambda())
          << " seeds=" << f.opt.seeds << " base-seed=" << f.opt.base_seed << '\n';
    } catch (const InvalidParameters& e) {
      throw UsageError(e.what());
    }
    results = run_verify(f.opt);
  }
  bool ok = true;
  for (const SuiteResult& r : results) {
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << " checked=" << r.checked << " violations=" << r.violations
        << '\n';
    ok = ok && r.passed();
    for (const Counterexample& c : r.examples) {
      out << "  counterexample seed=" << c.seed << ": " << c.detail << '\n';
      if (!f.in.empty()) {
        out << "    reproduce: " << repro_prefix << '\n';
      } else {
        out << "    reproduce: kpkvb generate --model idealized --n " << f.opt.n << " --alpha " << num(f.opt.alpha)
            << " --nu " << num(f.opt.nu) << " --seed " << c.seed << " --out instance.txt && kpkvb verify --suite "
            << f.suite << " --in instance.txt\n";
      }
    }
  }
  return ok ? kExitOk : kExitViolations;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"KPKVB hyperbolic random graph simulator", "kpkvb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  unsigned threads_flag = 0;
  auto* threads_opt = app.add_option("--threads", threads_flag, "worker threads, 0 = all cores")->capture_default_str();

  GenerateFlags gen;
  auto* g = app.add_subcommand("generate", "sample a graph and write it as an edge list");
  g->add_option("--model", gen.model, "kpkvb | poisson | idealized")->capture_default_str();
  g->add_option("--n", gen.n, "N (model size parameter)")->required();
  g->add_option("--alpha", gen.alpha)->capture_default_str();
  g->add_option("--nu", gen.nu)->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "output file, - for stdout")->required();

  AnalyzeFlags an;
  auto* a = app.add_subcommand("analyze", "compute a JSON report for a graph file");
  a->add_option("--in", an.in, "graph file")->required();
  a->add_option("--report", an.report, "diameter | degrees | clustering | components")->required();
  a->add_option("--method", an.method, "diameter method: automatic | bfs | ifub | floyd-warshall")
      ->capture_default_str();
  a->add_option("--out", an.out, "output file, - for stdout")->capture_default_str();

  ExperimentFlags ex;
  auto* e = app.add_subcommand("experiment", "run an experiment config");
  e->add_option("--config", ex.config, "JSON config file")->required();
  e->add_option("--out-dir", ex.out_dir, std::string("output directory (default: $") + kOutDirEnv +
                                             ", then the config's \"output\", then " + kDefaultOutDir + ")");

  VerifyFlags vf;
  auto* v = app.add_subcommand("verify", "run invariant suites on generated or loaded idealized graphs");
  v->add_option("--suite", vf.suite, "geometry | boxes | paths | all")->capture_default_str();
  v->add_option("--n", vf.opt.n)->capture_default_str();
  v->add_option("--seeds", vf.opt.seeds, "number of instances")->capture_default_str();
  v->add_option("--base-seed", vf.opt.base_seed)->capture_default_str();
  v->add_option("--alpha", vf.opt.alpha)->capture_default_str();
  v->add_option("--nu", vf.opt.nu)->capture_default_str();
  v->add_option("--triples", vf.opt.triples_per_instance, "above-segment triples per instance")->capture_default_str();
  v->add_option("--quads", vf.opt.quads_per_instance, "crossing-edge pairs per instance")->capture_default_str();
  v->add_option("--pairs", vf.opt.pairs_per_instance, "path-bound pairs per instance")->capture_default_str();
  v->add_option("--in", vf.in, "verify a graph file instead of generated instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int rc = app.exit(pe, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  const std::optional<unsigned> threads =
      threads_opt->count() ? std::optional<unsigned>(threads_flag) : std::nullopt;
  try {
    if (g->parsed()) return cmd_generate(gen, threads.value_or(0), out, err);
    if (a->parsed()) return cmd_analyze(an, threads.value_or(0), out, err);
    if (e->parsed()) return cmd_experiment(ex, threads, out, err);
    if (v->parsed()) return cmd_verify(vf, threads, out, err);
  } catch (const UsageError& ue) {
    err << "error: " << ue.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& ce) {
    err << "config error: " << ce.what() << '\n';
    return kExitUsage;
  } catch (const InvalidParameters& ip) {
    err << "error: " << ip.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& pe) {
    err << "parse error: " << pe.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& ex2) {
    err << "error: " << ex2.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace kpkvb
