#include "mfa/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

struct Bracket {
  double a, fa, b, fb;
};

/// Finds [a, b] with f(a) > 0 > f(b) for a decreasing f on (floor, inf).
Bracket bracket_decreasing(const std::function<double(double)>& f, double floor, double start,
                           const SolverOptions& options) {
  const double min_t = floor + options.margin;
  double a = std::max(start, min_t);
  double fa = f(a);
  double step = 0.25;
  if (fa >= 0.0) {
    for (std::size_t k = 0; k < options.max_expansions; ++k) {
      const double b = a + step;
      const double fb = f(b);
      if (fb <= 0.0) return {a, fa, b, fb};
      a = b;
      fa = fb;
      step *= 2.0;
    }
    throw ConvergenceError("pressure stays positive; no sign change found");
  }
  double b = a;
  double fb = fa;
  for (std::size_t k = 0; k < options.max_expansions; ++k) {
    double cand = b - step;
    if (cand <= min_t) cand = std::max(min_t, floor + 0.25 * (b - floor));
    const double fc = f(cand);
    if (fc >= 0.0) return {cand, fc, b, fb};
    if (cand <= min_t) break;
    b = cand;
    fb = fc;
    step *= 2.0;
  }
  throw DomainError("no sign change before qu + t reaches theta");
}

double solve_decreasing(const std::function<double(double)>& f, const Bracket& br, std::size_t max_iterations) {
  if (br.fa == 0.0) return br.a;
  if (br.fb == 0.0) return br.b;
  const boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = max_iterations;
  const auto r = boost::math::tools::toms748_solve(f, br.a, br.b, br.fa, br.fb, tol, iters);
  if (iters >= max_iterations) throw ConvergenceError("root solver hit its iteration limit");
  return 0.5 * (r.first + r.second);
}

double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

}  // namespace

TemperatureRoot temperature_root(const System& system, const PotentialFamily& family, double q,
                                 const SolverOptions& options, std::optional<double> guess) {
  const double floor = system.theta() - q * family.u();
  TemperatureRoot out;
  auto p = [&](double t) {
    ++out.evaluations;
    return pressure(system, family, q, t, options.collocation).value;
  };
  const double start = guess ? *guess : floor + 1.0;
  const Bracket br = bracket_decreasing(p, floor, start, options);
  out.t = solve_decreasing(p, br, options.max_iterations);
  out.residual = std::abs(p(out.t));
  if (out.residual > options.residual_tolerance)
    throw ConvergenceError("temperature root residual " + std::to_string(out.residual) + " above tolerance");
  return out;
}

DimensionEstimate hausdorff_dimension(const System& system, const DimensionOptions& options) {
  const PotentialFamily geometric = PotentialFamily::geometric(system, system.theta() + 1.0);
  const TemperatureRoot root = temperature_root(system, geometric, 0.0, options.solver);

  DimensionEstimate est;
  est.dimension = root.t;
  est.residual = root.residual;
  est.nodes = pressure(system, geometric, 0.0, root.t, options.solver.collocation).level;

  if (!options.bracket || !system.is_full_shift()) return est;
  std::size_t depth = 0;
  std::uint64_t total = 0;
  for (std::size_t n = 1; n <= options.n_max; ++n) {
    total += std::min(count_words(system, n), options.budget + 1);
    if (total > options.budget) break;
    depth = n;
  }
  if (depth == 0) return est;

  const double floor = system.theta();
  auto upper_fn = [&](double t) {
    return *pressure_bracket(system, geometric, 0.0, t, depth, options.budget).upper;
  };
  auto lower_fn = [&](double t) {
    return *pressure_bracket(system, geometric, 0.0, t, depth, options.budget).lower;
  };
  est.upper = solve_decreasing(upper_fn, bracket_decreasing(upper_fn, floor, root.t, options.solver),
                               options.solver.max_iterations);
  est.lower = solve_decreasing(lower_fn, bracket_decreasing(lower_fn, floor, root.t, options.solver),
                               options.solver.max_iterations);
  est.bracket_depth = depth;
  return est;
}

double alpha_from_T_derivative(const System& system, const PotentialFamily& family, double q,
                               const SolverOptions& options, std::optional<double> t_at_q) {
  const double h = options.fd_step;
  auto t_of = [&](double qq) { return temperature_root(system, family, qq, options, t_at_q).t; };
  const double coarse = -(t_of(q + h) - t_of(q - h)) / (2.0 * h);
  const double fine = -(t_of(q + 0.5 * h) - t_of(q - 0.5 * h)) / h;
  return richardson(coarse, fine);
}

GradientAlpha alpha_from_pressure_gradient(const System& system, const PotentialFamily& family, double q, double t,
                                           const SolverOptions& options) {
  const double d = options.gradient_step;
  auto p = [&](double qq, double tt) { return pressure(system, family, qq, tt, options.collocation).value; };
  auto dq = [&](double h) { return (p(q + h, t) - p(q - h, t)) / (2.0 * h); };
  auto dt = [&](double h) { return (p(q, t + h) - p(q, t - h)) / (2.0 * h); };
  const double p_q = richardson(dq(d), dq(0.5 * d));
  const double p_t = richardson(dt(d), dt(0.5 * d));
  if (std::abs(p_t) < 1e-6) throw ConvergenceError("dP/dt vanishes; alpha ratio ill-conditioned");
  return {p_q / p_t, -p_t};
}

ThermoPoint solve_temperature(const System& system, const PotentialFamily& family, double q,
                              const SolverOptions& options, std::optional<double> guess) {
  const TemperatureRoot root = temperature_root(system, family, q, options, guess);
  ThermoPoint pt;
  pt.q = q;
  pt.T = root.t;
  pt.root_residual = root.residual;
  pt.alpha_fd = alpha_from_T_derivative(system, family, q, options, root.t);
  const GradientAlpha g = alpha_from_pressure_gradient(system, family, q, root.t, options);
  pt.alpha_grad = g.alpha;
  pt.chi = g.chi;
  pt.f_value = q * pt.alpha_grad + pt.T;
  pt.hypothesis_ok = pt.f_value > system.theta();
  return pt;
}

TemperatureCurve temperature_curve(const System& system, const PotentialFamily& family, std::span<const double> q_grid,
                                   const SolverOptions& options, bool with_alpha) {
  const std::size_t n = q_grid.size();
  std::vector<std::optional<ThermoPoint>> solved(n);
  std::vector<std::string> errors(n);
  const std::size_t chunks = (n + kContinuationChunk - 1) / kContinuationChunk;

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    std::optional<double> guess;
    const std::size_t begin = static_cast<std::size_t>(c) * kContinuationChunk;
    const std::size_t end = std::min(n, begin + kContinuationChunk);
    for (std::size_t i = begin; i < end; ++i) {
      try {
        ThermoPoint pt;
        if (with_alpha) {
          pt = solve_temperature(system, family, q_grid[i], options, guess);
        } else {
          const TemperatureRoot r = temperature_root(system, family, q_grid[i], options, guess);
          pt.q = q_grid[i];
          pt.T = r.t;
          pt.root_residual = r.residual;
        }
        guess = pt.T;
        solved[i] = pt;
      } catch (const Error& e) {
        errors[i] = e.what();
        guess.reset();
      }
    }
  }

  TemperatureCurve curve;
  for (std::size_t i = 0; i < n; ++i) {
    if (solved[i])
      curve.points.push_back(*solved[i]);
    else
      curve.failures.push_back({q_grid[i], errors[i]});
  }
  return curve;
}

double alpha_upper_bound(const System& system, const PotentialFamily& family) {
  return family.u() + family.norm() / -std::log(system.contraction());
}

}  // namespace mfa
