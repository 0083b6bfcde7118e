#include "mfa/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mfa/errors.hpp"
#include "mfa/format.hpp"
#include "mfa/thermo.hpp"

namespace mfa {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> fields(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_real(const std::string& s) {
  try {
    return parse_real(s);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t to_unsigned(const std::string& s) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError("not a nonnegative integer: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const std::string t = trim(s);
  int v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError("not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  const std::string t = trim(s);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_real(item));
  return out;
}

std::string show(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_real(v[i]);
  return out;
}

std::string show(const std::optional<double>& v) { return v ? format_real(*v) : "auto"; }

struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Field>& field_table() {
  static const std::vector<Field> table = {
      {"system", "builtin", [](RunConfig& c, const std::string& v) { c.system.builtin = trim(v); },
       [](const RunConfig& c) { return c.system.builtin; }},
      {"system", "truncation", [](RunConfig& c, const std::string& v) { c.system.truncation = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.system.truncation); }},
      {"system", "eps", [](RunConfig& c, const std::string& v) { c.system.eps = to_real(v); },
       [](const RunConfig& c) { return format_real(c.system.eps); }},
      {"system", "ratios", [](RunConfig& c, const std::string& v) { c.system.ratios = to_list(v); },
       [](const RunConfig& c) { return show(c.system.ratios); }},
      {"system", "gaps", [](RunConfig& c, const std::string& v) { c.system.gaps = to_list(v); },
       [](const RunConfig& c) { return show(c.system.gaps); }},
      {"system", "vertices", [](RunConfig& c, const std::string& v) { c.system.vertices = trim(v); },
       [](const RunConfig& c) { return c.system.vertices; }},
      {"system", "edges", [](RunConfig& c, const std::string& v) { c.system.edges = trim(v); },
       [](const RunConfig& c) { return c.system.edges; }},
      {"system", "incidence", [](RunConfig& c, const std::string& v) { c.system.incidence = trim(v); },
       [](const RunConfig& c) { return c.system.incidence; }},
      {"system", "tail_gamma", [](RunConfig& c, const std::string& v) { c.system.tail_gamma = to_real(v); },
       [](const RunConfig& c) { return show(c.system.tail_gamma); }},
      {"system", "tail_log_exponent",
       [](RunConfig& c, const std::string& v) { c.system.tail_log_exponent = to_real(v); },
       [](const RunConfig& c) { return format_real(c.system.tail_log_exponent); }},
      {"system", "tail_accumulation",
       [](RunConfig& c, const std::string& v) { c.system.tail_accumulation = to_list(v); },
       [](const RunConfig& c) { return show(c.system.tail_accumulation); }},

      {"potential", "psi", [](RunConfig& c, const std::string& v) { c.potential.psi = trim(v); },
       [](const RunConfig& c) { return c.potential.psi; }},
      {"potential", "probabilities",
       [](RunConfig& c, const std::string& v) { c.potential.probabilities = to_list(v); },
       [](const RunConfig& c) { return show(c.potential.probabilities); }},
      {"potential", "values", [](RunConfig& c, const std::string& v) { c.potential.values = to_list(v); },
       [](const RunConfig& c) { return show(c.potential.values); }},
      {"potential", "u",
       [](RunConfig& c, const std::string& v) {
         if (trim(v) == "auto")
           c.potential.u.reset();
         else
           c.potential.u = to_real(v);
       },
       [](const RunConfig& c) { return show(c.potential.u); }},
      {"potential", "normalize", [](RunConfig& c, const std::string& v) { c.potential.normalize = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.potential.normalize ? "true" : "false"); }},

      {"numerics", "n_max", [](RunConfig& c, const std::string& v) { c.numerics.n_max = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.n_max); }},
      {"numerics", "nodes", [](RunConfig& c, const std::string& v) { c.numerics.nodes = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.nodes); }},
      {"numerics", "max_nodes", [](RunConfig& c, const std::string& v) { c.numerics.max_nodes = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.max_nodes); }},
      {"numerics", "agreement", [](RunConfig& c, const std::string& v) { c.numerics.agreement = to_real(v); },
       [](const RunConfig& c) { return format_real(c.numerics.agreement); }},
      {"numerics", "power_tolerance",
       [](RunConfig& c, const std::string& v) { c.numerics.power_tolerance = to_real(v); },
       [](const RunConfig& c) { return format_real(c.numerics.power_tolerance); }},
      {"numerics", "max_iterations",
       [](RunConfig& c, const std::string& v) { c.numerics.max_iterations = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.max_iterations); }},
      {"numerics", "residual_tolerance",
       [](RunConfig& c, const std::string& v) { c.numerics.residual_tolerance = to_real(v); },
       [](const RunConfig& c) { return format_real(c.numerics.residual_tolerance); }},
      {"numerics", "q_min", [](RunConfig& c, const std::string& v) { c.numerics.q_grid.q_min = to_real(v); },
       [](const RunConfig& c) { return format_real(c.numerics.q_grid.q_min); }},
      {"numerics", "q_max", [](RunConfig& c, const std::string& v) { c.numerics.q_grid.q_max = to_real(v); },
       [](const RunConfig& c) { return format_real(c.numerics.q_grid.q_max); }},
      {"numerics", "q_steps", [](RunConfig& c, const std::string& v) { c.numerics.q_grid.steps = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.q_grid.steps); }},
      {"numerics", "q_values", [](RunConfig& c, const std::string& v) { c.numerics.q_values = to_list(v); },
       [](const RunConfig& c) { return show(c.numerics.q_values); }},
      {"numerics", "t_min", [](RunConfig& c, const std::string& v) { c.numerics.t_min = to_real(v); },
       [](const RunConfig& c) { return show(c.numerics.t_min); }},
      {"numerics", "t_max", [](RunConfig& c, const std::string& v) { c.numerics.t_max = to_real(v); },
       [](const RunConfig& c) { return show(c.numerics.t_max); }},
      {"numerics", "t_steps", [](RunConfig& c, const std::string& v) { c.numerics.t_steps = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.t_steps); }},
      {"numerics", "q", [](RunConfig& c, const std::string& v) { c.numerics.q = to_real(v); },
       [](const RunConfig& c) { return format_real(c.numerics.q); }},
      {"numerics", "seed", [](RunConfig& c, const std::string& v) { c.numerics.seed = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.seed); }},
      {"numerics", "word_budget", [](RunConfig& c, const std::string& v) { c.numerics.word_budget = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.word_budget); }},
      {"numerics", "count", [](RunConfig& c, const std::string& v) { c.numerics.count = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.count); }},
      {"numerics", "word_length", [](RunConfig& c, const std::string& v) { c.numerics.word_length = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.word_length); }},
      {"numerics", "memory", [](RunConfig& c, const std::string& v) { c.numerics.memory = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.numerics.memory); }},
      {"numerics", "band", [](RunConfig& c, const std::string& v) { c.numerics.band = to_real(v); },
       [](const RunConfig& c) { return format_real(c.numerics.band); }},
      {"numerics", "points", [](RunConfig& c, const std::string& v) { c.numerics.points = to_list(v); },
       [](const RunConfig& c) { return show(c.numerics.points); }},

      {"output", "out", [](RunConfig& c, const std::string& v) { c.output.out = trim(v); },
       [](const RunConfig& c) { return c.output.out; }},
      {"output", "precision", [](RunConfig& c, const std::string& v) { c.output.precision = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.output.precision); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + section + "' outside of a section");
    for (const auto& [key, node] : body) {
      const auto& table = field_table();
      const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
        return section == f.section && key == f.key;
      });
      if (it == table.end()) throw ConfigError("unknown key [" + section + "] " + key);
      it->set(cfg, node.data());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot read config file " + path);
  return parse_config(file);
}

void RunConfig::validate() const {
  const auto& n = numerics;
  if (!(n.q_grid.q_min < n.q_grid.q_max)) throw ConfigError("q_min must be below q_max");
  if (n.q_grid.steps < 2) throw ConfigError("q_steps must be at least 2");
  if (n.t_steps < 2) throw ConfigError("t_steps must be at least 2");
  if (n.t_min && n.t_max && !(*n.t_min < *n.t_max)) throw ConfigError("t_min must be below t_max");
  if (n.n_max == 0 || n.nodes == 0 || n.word_budget == 0 || n.count == 0 || n.word_length == 0 || n.memory == 0 ||
      n.max_iterations == 0)
    throw ConfigError("counts and budgets must be positive");
  if (n.max_nodes < n.nodes) throw ConfigError("max_nodes must be at least nodes");
  if (!(n.band > 0.0) || !(n.agreement > 0.0) || !(n.power_tolerance > 0.0) || !(n.residual_tolerance > 0.0))
    throw ConfigError("tolerances must be positive");
  if (output.precision < 1 || output.precision > 17) throw ConfigError("precision must lie in 1..17");
  const auto& p = potential.psi;
  if (p != "geometric" && p != "probabilities" && p != "constant")
    throw ConfigError("psi must be geometric, probabilities or constant");
  if (p == "probabilities" && potential.probabilities.empty()) throw ConfigError("psi = probabilities needs probabilities");
  if (p == "constant" && potential.values.empty()) throw ConfigError("psi = constant needs values");
  const auto& b = system.builtin;
  if (b != "cf_full" && b != "cf_no_one" && b != "affine_cantor" && b != "custom")
    throw ConfigError("unknown builtin system '" + b + "'");
  if (b == "custom" && (system.vertices.empty() || system.edges.empty()))
    throw ConfigError("custom systems need vertices and edges");
}

std::vector<std::string> RunConfig::echo() const {
  std::vector<std::string> lines;
  for (const auto& f : field_table()) {
    const std::string value = f.get(*this);
    if (value.empty()) continue;
    lines.push_back(std::string("[") + f.section + "] " + f.key + " = " + value);
  }
  return lines;
}

SolverOptions RunConfig::solver_options() const {
  SolverOptions s;
  s.collocation.nodes = numerics.nodes;
  s.collocation.max_nodes = numerics.max_nodes;
  s.collocation.agreement = numerics.agreement;
  s.collocation.power_tolerance = numerics.power_tolerance;
  s.collocation.max_iterations = numerics.max_iterations;
  s.residual_tolerance = numerics.residual_tolerance;
  return s;
}

namespace {

System build_custom(const SystemConfig& sc) {
  std::vector<VertexPiece> vertices;
  for (const auto& entry : split(sc.vertices, ';')) {
    const auto f = fields(entry);
    if (f.size() != 3) throw ConfigError("vertex entry needs 'id lo hi': " + entry);
    vertices.push_back({static_cast<int>(to_unsigned(f[0])), {to_real(f[1]), to_real(f[2])}});
  }
  std::vector<EdgeMap> edges;
  for (const auto& entry : split(sc.edges, ';')) {
    const auto f = fields(entry);
    if (f.size() < 4) throw ConfigError("edge entry needs 'id source target kind params': " + entry);
    EdgeMap e;
    e.id = static_cast<int>(to_unsigned(f[0]));
    e.source = static_cast<int>(to_unsigned(f[1]));
    e.target = static_cast<int>(to_unsigned(f[2]));
    if (f[3] == "affine" && f.size() == 6) {
      e.map = AffineMap{to_real(f[4]), to_real(f[5])};
    } else if (f[3] == "moebius" && f.size() == 8) {
      e.map = MoebiusMap{to_real(f[4]), to_real(f[5]), to_real(f[6]), to_real(f[7])};
    } else {
      throw ConfigError("edge kind must be 'affine r b' or 'moebius a b c d': " + entry);
    }
    edges.push_back(e);
  }
  Incidence inc(edges.size(), false);
  if (sc.incidence.empty()) {
    for (std::size_t e = 0; e < edges.size(); ++e)
      for (std::size_t f = 0; f < edges.size(); ++f) inc.set(e, f, edges[e].target == edges[f].source);
  } else {
    const auto rows = split(sc.incidence, ';');
    if (rows.size() != edges.size()) throw ConfigError("incidence needs one row per edge");
    for (std::size_t e = 0; e < rows.size(); ++e) {
      const auto cells = fields(rows[e]);
      if (cells.size() != edges.size()) throw ConfigError("incidence row has the wrong length");
      for (std::size_t f = 0; f < cells.size(); ++f) inc.set(e, f, to_bool(cells[f]));
    }
  }
  SystemOptions opts;
  opts.name = "custom";
  if (sc.tail_gamma) opts.tail = TailModel{*sc.tail_gamma, sc.tail_log_exponent, sc.tail_accumulation};
  return System(std::move(vertices), std::move(edges), std::move(inc), std::move(opts));
}

}  // namespace

System build_system(const RunConfig& config) {
  const auto& sc = config.system;
  try {
    if (sc.builtin == "custom") return build_custom(sc);
    BuiltinParams params;
    params.truncation = sc.truncation;
    params.eps = sc.eps;
    params.ratios = sc.ratios;
    params.gaps = sc.gaps;
    return builtin_system(sc.builtin, params);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

PotentialFamily build_family(const RunConfig& config, const System& system) {
  const auto& pc = config.potential;
  PotentialFamily family = [&] {
    try {
      if (pc.psi == "geometric") {
        const double u = pc.u ? *pc.u : hausdorff_dimension(system, DimensionOptions{config.solver_options(), 1, false}).dimension;
        return PotentialFamily::geometric(system, u);
      }
      const double u = pc.u ? *pc.u : system.theta() + 1.0;
      if (pc.psi == "probabilities") return PotentialFamily::from_probabilities(system, pc.probabilities, u);
      return PotentialFamily(system, EdgeConstantPsi{pc.values}, u);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }();
  return pc.normalize ? normalize(system, family) : family;
}

}  // namespace mfa
