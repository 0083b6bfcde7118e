// Acceptance gate: one PASS/FAIL line per criterion, tolerances fixed here.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mfa/cli.hpp"
#include "mfa/diagnostics.hpp"
#include "mfa/errors.hpp"
#include "mfa/format.hpp"
#include "mfa/measures.hpp"
#include "mfa/pressure.hpp"
#include "mfa/spectrum.hpp"
#include "mfa/thermo.hpp"
#include "oracles.hpp"

using namespace mfa;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s |%s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.str().c_str());
  std::fflush(stdout);
}

std::string num(double x) { return format_real(x, 10); }

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("mfa_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

/// Runs the CLI and returns the CSV rows (header dropped) split into cells.
std::vector<std::vector<double>> cli_rows(const std::string& command, const std::string& config,
                                          std::vector<std::string> extra = {}) {
  const fs::path cfg = scratch() / (command + ".ini");
  std::ofstream(cfg) << config;
  std::vector<std::string> args{command, "--config", cfg.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != cli::kExitOk) throw Error("mfa " + command + " exited with " + std::to_string(code) + ": " + err.str());
  std::vector<std::vector<double>> rows;
  std::istringstream in(out.str());
  bool header = true;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) row.push_back(parse_real(cell));
    rows.push_back(row);
  }
  return rows;
}

const System& binomial_system() {
  static const System s = builtin_system("affine_cantor");
  return s;
}

const PotentialFamily& binomial_family() {
  static const PotentialFamily f = [] {
    const double p[] = {0.3, 0.7};
    return normalize(binomial_system(), PotentialFamily::from_probabilities(binomial_system(), p, 1.0));
  }();
  return f;
}

const std::vector<double> kP{0.3, 0.7};
constexpr double kR = 1.0 / 3.0;

}  // namespace

int main() {
  criterion(1, "Cantor dimension", [](Outcome& o) {
    const auto t0 = Clock::now();
    const auto rows = cli_rows("dim", "[system]\nbuiltin = affine_cantor\n");
    const double elapsed = seconds_since(t0);
    const double dim = rows.at(0).at(0);
    const System s = builtin_system("affine_cantor");
    const PressureEstimate br = pressure_bracket(s, PotentialFamily::geometric(s, 1.0), 0.0, dim, 1);
    o.detail << " dim=" << num(dim) << " err=" << num(std::abs(dim - oracle::kCantorDim))
             << " width(n=1)=" << num(br.bracket_width()) << " time=" << num(elapsed) << "s";
    o.require(std::abs(dim - oracle::kCantorDim) <= 1e-12, "|dim - log2/log3| <= 1e-12");
    o.require(br.bracket_width() == 0.0, "bracket width 0 at n=1");
    o.require(elapsed < 1.0, "runtime < 1 s");
  });

  criterion(2, "ratios (1/2, 1/4)", [](Outcome& o) {
    const auto rows = cli_rows("dim", "[system]\nbuiltin = affine_cantor\nratios = 0.5, 0.25\n");
    const double dim = rows.at(0).at(0);
    o.detail << " dim=" << num(dim) << " err=" << num(std::abs(dim - oracle::kGoldenDim));
    o.require(std::abs(dim - oracle::kGoldenDim) <= 1e-10, "|dim - log phi/log 2| <= 1e-10");
  });

  criterion(3, "binomial temperature", [](Outcome& o) {
    const auto t0 = Clock::now();
    const auto rows = cli_rows("temperature",
                               "[system]\nbuiltin = affine_cantor\nratios = 0.3333333333333333, 0.3333333333333333\n"
                               "[potential]\npsi = probabilities\nprobabilities = 0.3, 0.7\nu = 1\n",
                               {"--q-min", "-5", "--q-max", "5", "--q-steps", "101"});
    const double elapsed = seconds_since(t0);
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(r.at(1) - oracle::binomial_T(kP, kR, r.at(0))));
    o.detail << " points=" << rows.size() << " max_err=" << num(worst) << " time=" << num(elapsed) << "s";
    o.require(rows.size() == 101, "101 grid points");
    o.require(worst <= 1e-8, "max |T - closed form| <= 1e-8");
    o.require(elapsed < 30.0, "runtime < 30 s");
  });

  criterion(4, "binomial spectrum identities", [](Outcome& o) {
    const SpectrumCurve c = spectrum_curve(binomial_system(), binomial_family(), QGrid{});
    const double legendre = legendre_check(c);
    const double hd = oracle::kCantorDim;
    double peak_err = INFINITY, tangent_err = INFINITY, alpha1 = NAN, disagreement = 0.0;
    for (const auto& p : c.points) {
      disagreement = std::max(disagreement, std::abs(p.alpha_fd - p.alpha_grad));
      if (p.q == 0.0) peak_err = std::abs(p.f_value - hd);
      if (std::abs(p.q - 1.0) < 1e-12) {
        alpha1 = p.alpha_grad;
        tangent_err = std::max(std::abs(p.f_value - p.alpha_grad), std::abs(p.alpha_grad - 0.5560321));
      }
    }
    o.detail << " points=" << c.points.size() << " legendre=" << num(legendre) << " |f(a(0))-HD|=" << num(peak_err)
             << " alpha(1)=" << num(alpha1) << " tangent_err=" << num(tangent_err)
             << " alpha_disagreement=" << num(disagreement);
    o.require(c.points.size() == 101, "101 points");
    o.require(legendre <= 1e-6, "Legendre residual <= 1e-6");
    o.require(peak_err <= 1e-6, "f(alpha(0)) = HD within 1e-6");
    o.require(tangent_err <= 1e-6, "f(alpha(1)) = alpha(1) = 0.5560321 within 1e-6");
    o.require(disagreement <= 1e-4, "alpha estimators agree within 1e-4");
  });

  criterion(5, "CF{1,2} dimension", [](Outcome& o) {
    const auto t0 = Clock::now();
    const System s = builtin_system("cf_full", {.truncation = 2});
    const DimensionEstimate d = hausdorff_dimension(s, {.n_max = 16});
    const PotentialFamily g = PotentialFamily::geometric(s, 1.5);
    const double p32 = pressure_collocation(s, g, 0.0, d.dimension, 32).value;
    const double p48 = pressure_collocation(s, g, 0.0, d.dimension, 48).value;
    const double elapsed = seconds_since(t0);
    o.detail << " dim=" << num(d.dimension) << " bracket=[" << num(d.lower.value_or(NAN)) << ", "
             << num(d.upper.value_or(NAN)) << "] depth=" << d.bracket_depth << " |P32-P48|=" << num(std::abs(p32 - p48))
             << " |dim-0.53128|=" << num(std::abs(d.dimension - 0.53128)) << " time=" << num(elapsed) << "s";
    o.require(std::abs(p32 - p48) <= 1e-8, "M=32 vs M=48 within 1e-8");
    o.require(d.lower && d.upper && *d.lower <= d.dimension && d.dimension <= *d.upper, "inside certified bracket");
    o.require(d.bracket_depth == 16, "bracket at n_max = 16");
    o.require(d.upper && d.lower && *d.upper - *d.lower <= 0.03, "bracket width <= 0.03");
    o.require(std::abs(d.dimension - 0.53128) <= 5e-3, "within 5e-3 of 0.53128");
    o.require(elapsed < 60.0, "runtime < 60 s");
  });

  criterion(6, "cf_full truncations", [](Outcome& o) {
    double prev = 0.0;
    bool increasing = true, below_one = true;
    double last = 0.0;
    for (std::size_t n : {5, 10, 20, 50}) {
      const double d = hausdorff_dimension(builtin_system("cf_full", {.truncation = n})).dimension;
      o.detail << " dim(" << n << ")=" << num(d);
      increasing = increasing && d > prev;
      below_one = below_one && d < 1.0;
      prev = last = d;
    }
    o.require(increasing, "strictly increasing in N");
    o.require(below_one, "all below 1");
    o.require(last > 0.97, "dim(50) > 0.97");
  });

  criterion(7, "pressure property suite", [](Outcome& o) {
    const System cf = builtin_system("cf_full", {.truncation = 10});
    const System& cantor = binomial_system();
    struct Case {
      const System* system;
      PotentialFamily family;
      std::string label;
    };
    std::vector<Case> cases{
        {&cf, PotentialFamily::geometric(cf, 1.0), "cf10/geometric"},
        {&cf, PotentialFamily(cf, EdgeConstantPsi{{0.3, -0.2, 0.1, 0.0, -0.4, 0.2, 0.05, -0.1, 0.15, -0.3}}, 1.0),
         "cf10/edge-constant"},
        {&cantor, PotentialFamily::geometric(cantor, 1.0), "cantor/geometric"},
        {&cantor, binomial_family(), "cantor/binomial"},
    };
    std::size_t decrease_fail = 0, convex_fail = 0, bound_fail = 0, guard_fail = 0, evaluations = 0;
    double min_second = INFINITY;
    for (const Case& c : cases) {
      const System& s = *c.system;
      const PotentialFamily geo = PotentialFamily::geometric(s, c.family.u());
      for (double q : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
        const double floor = s.theta() - q * c.family.u();
        std::vector<double> ts, ps;
        for (int k = 0; k < 25; ++k) ts.push_back(floor + 0.02 + 0.1 * k);
        for (double t : ts) {
          ps.push_back(pressure(s, c.family, q, t).value);
          ++evaluations;
          const double ref = pressure(s, geo, 0.0, q * c.family.u() + t).value;
          if (std::abs(ps.back() - ref) > std::abs(q) * c.family.norm() + 1e-10) ++bound_fail;
        }
        for (std::size_t i = 1; i < ps.size(); ++i)
          if (!(ps[i] < ps[i - 1])) ++decrease_fail;
        for (std::size_t i = 1; i + 1 < ps.size(); ++i) {
          const double second = ps[i - 1] - 2 * ps[i] + ps[i + 1];
          min_second = std::min(min_second, second);
          if (second < -1e-8) ++convex_fail;
        }
        for (double t : {floor, floor - 0.1}) {
          try {
            pressure(s, c.family, q, t);
            ++guard_fail;
          } catch (const DomainError&) {
          }
        }
      }
    }
    o.detail << " evaluations=" << evaluations << " decrease_violations=" << decrease_fail
             << " min_second_difference=" << num(min_second) << " bound_violations=" << bound_fail
             << " guard_misses=" << guard_fail;
    o.require(decrease_fail == 0, "strictly decreasing in t");
    o.require(convex_fail == 0, "second differences >= -1e-8");
    o.require(bound_fail == 0, "|P(q,t) - P(qu+t)| <= |q| ||Psi||");
    o.require(guard_fail == 0, "domain guard rejects qu + t <= theta");
  });

  criterion(8, "degenerate family", [](Outcome& o) {
    const System s = builtin_system("cf_full", {.truncation = 2});
    const double hd = hausdorff_dimension(s, {.bracket = false}).dimension;
    const SpectrumCurve c = spectrum_curve(s, PotentialFamily::geometric(s, hd), QGrid{-3.0, 3.0, 13});
    double lin = 0.0, second = 0.0, alpha_dev = 0.0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const auto& p = c.points[i];
      lin = std::max(lin, std::abs(p.T - hd * (1.0 - p.q)));
      alpha_dev = std::max({alpha_dev, std::abs(p.alpha_grad - hd), std::abs(p.alpha_fd - hd)});
      if (i > 0 && i + 1 < c.points.size()) {
        const double h = c.points[i + 1].q - p.q;
        second = std::max(second, std::abs(c.points[i - 1].T - 2 * p.T + c.points[i + 1].T) / (h * h));
      }
    }
    o.detail << " HD=" << num(hd) << " max|T-HD(1-q)|=" << num(lin) << " max|T''|=" << num(second)
             << " max|alpha-HD|=" << num(alpha_dev);
    o.require(c.points.size() == 13, "all points solved");
    o.require(lin <= 1e-8, "T(q) = HD (1 - q)");
    o.require(second <= 1e-8, "|T''| <= 1e-8");
    o.require(alpha_dev <= 1e-8, "alpha = HD");
  });

  criterion(9, "binomial concentration", [](Outcome& o) {
    const auto t0 = Clock::now();
    SamplingOptions opts;
    opts.count = 200;
    opts.word_length = 14;
    opts.seed = 42;
    bool ok = true;
    for (double q : {0.0, 1.0, 2.0}) {
      const ConcentrationResult r = concentration_test(binomial_system(), binomial_family(), q, 0.1, opts);
      o.detail << " q=" << q << ":alpha=" << num(r.alpha) << ",fraction=" << num(r.fraction);
      ok = ok && r.fraction >= 0.9;
    }
    const double elapsed = seconds_since(t0);
    o.detail << " time=" << num(elapsed) << "s";
    o.require(ok, "fraction within 0.1 of alpha(q) >= 0.9");
    o.require(elapsed < 120.0, "runtime < 120 s");
  });

  criterion(10, "diagnostics", [](Outcome& o) {
    const DiagnosticsReport no_one = diagnose(builtin_system("cf_no_one", {.truncation = 50, .eps = -0.25}));
    const DiagnosticsReport full = diagnose(builtin_system("cf_full", {.truncation = 50}));
    const DiagnosticsReport cantor = diagnose(binomial_system());
    o.detail << " bsc(cf_no_one)=" << no_one.bsc.exact << " bsc(cf_full)=" << num(full.bsc.gap.value_or(NAN))
             << " regular=" << to_string(no_one.cofinitely_regular.verdict) << "/"
             << to_string(full.cofinitely_regular.verdict) << " p=" << full.primitive.p << "/"
             << cantor.primitive.p;
    o.require(no_one.bsc.exact == "5/28", "BSC gap 5/28");
    o.require(full.bsc.gap && *full.bsc.gap == 0.0, "cf_full gap 0");
    o.require(no_one.cofinitely_regular.verdict == Verdict::yes && full.cofinitely_regular.verdict == Verdict::yes,
              "cofinitely regular");
    o.require(full.primitive.verdict == Verdict::yes && full.primitive.p == 0 &&
                  cantor.primitive.verdict == Verdict::yes && cantor.primitive.p == 0,
              "full shifts primitive with p = 0");
  });

  std::error_code ec;
  fs::remove_all(scratch(), ec);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
