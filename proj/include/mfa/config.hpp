#pragma once

// INI run configuration: [system], [potential], [numerics], [output].

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfa/gdms.hpp"
#include "mfa/potentials.hpp"
#include "mfa/spectrum.hpp"
#include "mfa/thermo.hpp"

namespace mfa {

struct SystemConfig {
  std::string builtin = "affine_cantor";  ///< cf_full, cf_no_one, affine_cantor or custom
  std::size_t truncation = 2;
  double eps = -0.25;
  std::vector<double> ratios{1.0 / 3.0, 1.0 / 3.0};
  std::vector<double> gaps;
  /// custom systems: "id lo hi; ..." and "id source target affine r b; id source target moebius a b c d; ..."
  std::string vertices;
  std::string edges;
  /// custom incidence rows "1 1; 0 1"; empty means induced by the multigraph
  std::string incidence;
  std::optional<double> tail_gamma;
  double tail_log_exponent = 0.0;
  std::vector<double> tail_accumulation;
};

struct PotentialConfig {
  std::string psi = "geometric";  ///< geometric, probabilities or constant
  std::vector<double> probabilities;
  std::vector<double> values;
  std::optional<double> u;  ///< unset: HD(J) for geometric, 1 otherwise (above theta)
  bool normalize = true;
};

struct NumericsConfig {
  std::size_t n_max = 16;
  std::size_t nodes = 32;
  std::size_t max_nodes = 256;
  double agreement = 1e-10;
  double power_tolerance = 1e-13;
  std::size_t max_iterations = 10000;
  double residual_tolerance = 1e-10;
  QGrid q_grid;
  std::vector<double> q_values{0.0, 1.0, 2.0};
  std::optional<double> t_min;
  std::optional<double> t_max;
  std::size_t t_steps = 21;
  double q = 1.0;
  std::uint64_t seed = 42;
  std::uint64_t word_budget = kDefaultWordBudget;
  std::size_t count = 200;
  std::size_t word_length = 14;
  std::size_t memory = 1;
  double band = 0.1;
  std::vector<double> points;
};

struct OutputConfig {
  std::string out;
  int precision = 17;
};

struct RunConfig {
  SystemConfig system;
  PotentialConfig potential;
  NumericsConfig numerics;
  OutputConfig output;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
  /// Effective configuration as "[section] key = value" lines.
  std::vector<std::string> echo() const;
  SolverOptions solver_options() const;
};

/// Parses INI text; unknown sections or keys are rejected with ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

System build_system(const RunConfig& config);
/// Builds the potential family, normalized when the config asks for it.
PotentialFamily build_family(const RunConfig& config, const System& system);

}  // namespace mfa
