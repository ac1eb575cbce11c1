#include "kpkvb/graph_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "kpkvb/format.hpp"

namespace kpkvb {

namespace {

constexpr int kDigits = 12;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

void write_graph(std::ostream& out, const Graph& g) {
  const GraphInfo& info = g.info();
  const double lambda = info.nu * info.alpha / kPi;
  out << "# kpkvb graph\n"
      << "# version=" << kVersion << '\n'
      << "# model=" << to_string(info.model) << '\n'
      << "# N=" << info.n_param << '\n'
      << "# alpha=" << format_number(info.alpha, kDigits) << '\n'
      << "# nu=" << format_number(info.nu, kDigits) << '\n'
      << "# R=" << format_number(info.radius, kDigits) << '\n'
      << "# lambda=" << format_number(lambda, kDigits) << '\n'
      << "# seed=" << info.seed << '\n';
  out << "vertices " << g.vertex_count() << '\n';
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    out << v;
    if (g.has_coords()) {
      const auto& c = g.coord(v);
      out << ' ' << format_number(c.polar.r, kDigits) << ' ' << format_number(c.polar.theta, kDigits) << ' '
          << format_number(c.strip.x, kDigits) << ' ' << format_number(c.strip.y, kDigits);
    }
    out << '\n';
  }
  const auto edges = g.edges();
  out << "edges " << edges.size() << '\n';
  for (auto [u, v] : edges) out << u << ' ' << v << '\n';
}

void save_graph(const std::string& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_graph(out, g);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Graph read_graph(std::istream& in) {
  GraphInfo info;
  std::vector<VertexCoord> coords;
  std::vector<Edge> edges;
  std::size_t n = 0;
  bool have_vertices = false;
  bool with_coords = false;
  std::string line;
  std::size_t line_no = 0;
  std::size_t pending_vertices = 0;
  std::size_t pending_edges = 0;
  bool in_edges = false;
  auto fail = [&](const std::string& what) -> ParseError {
    return ParseError("line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split(line);
    if (tokens.empty()) continue;
    try {
      if (tokens[0].front() == '#') {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const auto key_tokens = split(std::string_view(line).substr(1, eq - 1));
        if (key_tokens.size() != 1) continue;
        const std::string_view key = key_tokens.front();
        const auto rest = split(std::string_view(line).substr(eq + 1));
        if (rest.empty()) continue;
        const std::string_view value = rest.front();
        if (key == "model") info.model = parse_model_kind(std::string(value));
        else if (key == "N") info.n_param = static_cast<std::uint64_t>(parse_integer(value));
        else if (key == "alpha") info.alpha = parse_double(value);
        else if (key == "nu") info.nu = parse_double(value);
        else if (key == "R") info.radius = parse_double(value);
        else if (key == "seed") info.seed = static_cast<std::uint64_t>(parse_integer(value));
        continue;
      }
      if (pending_vertices > 0) {
        const auto id = parse_integer(tokens[0]);
        if (id != static_cast<long long>(n - pending_vertices)) throw fail("vertex ids must be consecutive from 0");
        if (tokens.size() == 5) {
          if (!with_coords && id != 0) throw fail("coordinates missing on earlier vertices");
          with_coords = true;
          coords.push_back({{parse_double(tokens[1]), parse_double(tokens[2])},
                            {parse_double(tokens[3]), parse_double(tokens[4])}});
        } else if (tokens.size() != 1 || with_coords) {
          throw fail("expected 'id' or 'id r theta x y'");
        }
        --pending_vertices;
        continue;
      }
      if (in_edges && pending_edges > 0) {
        if (tokens.size() != 2) throw fail("expected 'u v'");
        const auto u = parse_integer(tokens[0]);
        const auto v = parse_integer(tokens[1]);
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
          throw fail("edge endpoint out of range");
        if (u == v) throw fail("self-loop");
        edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
        --pending_edges;
        continue;
      }
      if (tokens[0] == "vertices" && tokens.size() == 2 && !have_vertices) {
        const auto count = parse_integer(tokens[1]);
        if (count < 0) throw fail("negative vertex count");
        n = pending_vertices = static_cast<std::size_t>(count);
        have_vertices = true;
        continue;
      }
      if (tokens[0] == "edges" && tokens.size() == 2 && have_vertices && !in_edges) {
        const auto count = parse_integer(tokens[1]);
        if (count < 0) throw fail("negative edge count");
        pending_edges = static_cast<std::size_t>(count);
        in_edges = true;
        continue;
      }
      throw fail("unexpected line '" + line + "'");
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
  }
  if (!have_vertices) throw ParseError("missing 'vertices' block");
  if (pending_vertices > 0) throw ParseError("truncated vertex block");
  if (!in_edges) throw ParseError("missing 'edges' block");
  if (pending_edges > 0) throw ParseError("truncated edge block");
  try {
    return Graph::from_edges(n, edges, std::move(coords), info);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_graph(in);
}

}  // namespace kpkvb
