#include "mfa/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "mfa/config.hpp"
#include "mfa/diagnostics.hpp"
#include "mfa/errors.hpp"
#include "mfa/format.hpp"
#include "mfa/measures.hpp"
#include "mfa/pressure.hpp"
#include "mfa/spectrum.hpp"
#include "mfa/thermo.hpp"

namespace mfa::cli {

namespace {

const std::vector<std::string> kCommands = {"check", "pressure", "dim", "temperature", "spectrum", "localdim",
                                            "concentrate"};

struct Flags {
  std::string command;
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> q_min;
  std::optional<double> q_max;
  std::optional<std::size_t> q_steps;
  std::optional<std::size_t> n_max;
  std::optional<std::size_t> nodes;
};

void apply_overrides(RunConfig& cfg, const Flags& f) {
  if (f.out) cfg.output.out = *f.out;
  if (f.seed) cfg.numerics.seed = *f.seed;
  if (f.q_min) cfg.numerics.q_grid.q_min = *f.q_min;
  if (f.q_max) cfg.numerics.q_grid.q_max = *f.q_max;
  if (f.q_steps) cfg.numerics.q_grid.steps = *f.q_steps;
  if (f.n_max) cfg.numerics.n_max = *f.n_max;
  if (f.nodes) {
    cfg.numerics.nodes = *f.nodes;
    cfg.numerics.max_nodes = std::max(cfg.numerics.max_nodes, *f.nodes);
  }
  cfg.validate();
}

void configure_threads(const Flags& f) {
  int n = 0;
  if (f.threads) {
    n = *f.threads;
  } else if (const char* env = std::getenv("MFA_THREADS")) {
    n = std::atoi(env);
  }
  if (n > 0) omp_set_num_threads(n);
}

/// Table writer bound to the configured precision.
class Table {
 public:
  Table(std::ostream& os, int precision) : os_(os), precision_(precision) {}

  void header(const std::string& h) { os_ << h << '\n'; }
  Table& cell(double x) { return text(format_real(x, precision_)); }
  Table& cell(const std::optional<double>& x) { return x ? cell(*x) : text("nan"); }
  Table& text(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }
  void end_row() {
    os_ << '\n';
    first_ = true;
  }

 private:
  std::ostream& os_;
  int precision_;
  bool first_ = true;
};

int cmd_check(const RunConfig&, const System& system, std::ostream& os, std::ostream&) {
  for (const auto& [k, v] : diagnose(system).lines()) os << k << ": " << v << '\n';
  return kExitOk;
}

int cmd_pressure(const RunConfig& cfg, const System& system, std::ostream& os, std::ostream&) {
  const PotentialFamily family = build_family(cfg, system);
  const auto& n = cfg.numerics;
  Table t(os, cfg.output.precision);
  t.header("q,t,value,lower,upper,method,level,eigen_residual");
  for (double q : n.q_values) {
    const double t_min = n.t_min ? *n.t_min : system.theta() - q * family.u() + 0.1;
    const double t_max = n.t_max ? *n.t_max : t_min + 2.0;
    for (std::size_t i = 0; i < n.t_steps; ++i) {
      const double tt = t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(n.t_steps - 1);
      const PressureEstimate est = pressure(system, family, q, tt, cfg.solver_options().collocation);
      std::optional<double> lower, upper;
      if (system.is_full_shift() && family.edge_constant()) {
        std::size_t depth = 0;
        std::uint64_t total = 0;
        for (std::size_t k = 1; k <= n.n_max; ++k) {
          total += std::min(count_words(system, k), n.word_budget + 1);
          if (total > n.word_budget) break;
          depth = k;
        }
        if (depth > 0) {
          const PressureEstimate br = pressure_bracket(system, family, q, tt, depth, n.word_budget);
          lower = br.lower;
          upper = br.upper;
        }
      }
      t.cell(q).cell(tt).cell(est.value).cell(lower).cell(upper);
      t.text(to_string(est.method)).text(std::to_string(est.level)).cell(est.eigen_residual);
      t.end_row();
    }
  }
  return kExitOk;
}

int cmd_dim(const RunConfig& cfg, const System& system, std::ostream& os, std::ostream&) {
  DimensionOptions opts;
  opts.solver = cfg.solver_options();
  opts.n_max = cfg.numerics.n_max;
  opts.budget = cfg.numerics.word_budget;
  const DimensionEstimate d = hausdorff_dimension(system, opts);
  Table t(os, cfg.output.precision);
  t.header("dim,lower,upper");
  t.cell(d.dimension).cell(d.lower).cell(d.upper);
  t.end_row();
  return kExitOk;
}

int report_failures(const std::vector<PointFailure>& failures, std::ostream& err) {
  for (const auto& f : failures) err << "error: q = " << format_real(f.q) << ": " << f.message << '\n';
  return failures.empty() ? kExitOk : kExitConvergence;
}

int cmd_temperature(const RunConfig& cfg, const System& system, std::ostream& os, std::ostream& err) {
  const PotentialFamily family = build_family(cfg, system);
  const auto q = cfg.numerics.q_grid.values();
  const TemperatureCurve curve = temperature_curve(system, family, q, cfg.solver_options(), false);
  Table t(os, cfg.output.precision);
  t.header("q,T,residual");
  for (const auto& p : curve.points) {
    t.cell(p.q).cell(p.T).cell(p.root_residual);
    t.end_row();
  }
  return report_failures(curve.failures, err);
}

int cmd_spectrum(const RunConfig& cfg, const System& system, std::ostream& os, std::ostream& err) {
  const PotentialFamily family = build_family(cfg, system);
  const SpectrumCurve curve = spectrum_curve(system, family, cfg.numerics.q_grid, cfg.solver_options());
  for (const auto& p : curve.points)
    if (!p.hypothesis_ok)
      err << "warning: q = " << format_real(p.q) << ": q*alpha + T = " << format_real(p.f_value)
          << " does not exceed theta\n";
  Table t(os, cfg.output.precision);
  t.header(kSpectrumHeader);
  for (const auto& p : curve.points) {
    t.cell(p.q).cell(p.T).cell(p.alpha_fd).cell(p.alpha_grad).cell(p.f_value).cell(p.chi).cell(p.root_residual);
    t.end_row();
  }
  return report_failures(curve.failures, err);
}

SamplingOptions sampling(const RunConfig& cfg) {
  SamplingOptions s;
  s.count = cfg.numerics.count;
  s.word_length = cfg.numerics.word_length;
  s.seed = cfg.numerics.seed;
  s.memory = cfg.numerics.memory;
  return s;
}

int cmd_localdim(const RunConfig& cfg, const System& system, std::ostream& os, std::ostream&) {
  const PotentialFamily family = build_family(cfg, system);
  const MeasureModel model = cylinder_weights(system, family, cfg.numerics.word_length, cfg.numerics.word_budget);
  const std::vector<double> radii = default_radii(system, model);
  std::vector<double> points = cfg.numerics.points;
  std::vector<std::size_t> vertices(points.size(), 0);
  if (points.empty()) {
    const MuQSample s = sample_mu_q(system, family, cfg.numerics.q, sampling(cfg), cfg.solver_options());
    points = s.points;
    for (const auto& w : s.words) vertices.push_back(system.source_vertex(w.front()));
  }
  Table t(os, cfg.output.precision);
  t.header("x,slope,stderr");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LocalDimEstimate e = local_dimension(model, points[i], radii, vertices[i]);
    t.cell(e.x).cell(e.slope).cell(e.slope_stderr);
    t.end_row();
  }
  return kExitOk;
}

int cmd_concentrate(const RunConfig& cfg, const System& system, std::ostream& os, std::ostream&) {
  const PotentialFamily family = build_family(cfg, system);
  Table t(os, cfg.output.precision);
  t.header("q,alpha,fraction_in_band");
  for (double q : cfg.numerics.q_values) {
    const ConcentrationResult r =
        concentration_test(system, family, q, cfg.numerics.band, sampling(cfg), cfg.solver_options());
    t.cell(r.q).cell(r.alpha).cell(r.fraction);
    t.end_row();
  }
  return kExitOk;
}

int dispatch(const std::string& command, const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  const System system = build_system(cfg);
  static const std::map<std::string, std::function<int(const RunConfig&, const System&, std::ostream&, std::ostream&)>>
      table = {{"check", cmd_check},           {"pressure", cmd_pressure}, {"dim", cmd_dim},
               {"temperature", cmd_temperature}, {"spectrum", cmd_spectrum}, {"localdim", cmd_localdim},
               {"concentrate", cmd_concentrate}};
  return table.at(command)(cfg, system, os, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thermodynamic formalism and multifractal analysis of conformal GDMS on intervals", "mfa"};
  Flags f;
  app.add_option("command", f.command, "check | pressure | dim | temperature | spectrum | localdim | concentrate")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--config", f.config, "INI configuration file")->required();
  app.add_option("--out", f.out, "write the CSV table to this file");
  app.add_option("--seed", f.seed, "sampling seed");
  app.add_option("--threads", f.threads, "worker threads (default: MFA_THREADS or all cores)");
  app.add_option("--q-min", f.q_min);
  app.add_option("--q-max", f.q_max);
  app.add_option("--q-steps", f.q_steps);
  app.add_option("--n-max", f.n_max, "partition depth");
  app.add_option("--nodes", f.nodes, "initial Chebyshev node count");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    configure_threads(f);
    RunConfig cfg = load_config(f.config);
    apply_overrides(cfg, f);

    out << "# command = " << f.command << '\n';
    for (const auto& line : cfg.echo()) out << "# " << line << '\n';

    if (cfg.output.out.empty()) return dispatch(f.command, cfg, out, err);
    std::ostringstream table;
    const int code = dispatch(f.command, cfg, table, err);
    std::ofstream file(cfg.output.out, std::ios::binary);
    if (!file || !(file << table.str()) || !file.flush()) throw ResourceError("cannot write " + cfg.output.out);
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mfa::cli
