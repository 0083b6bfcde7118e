#include "mfa/measures.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "mfa/errors.hpp"
#include "mfa/pressure.hpp"
#include "mfa/rng.hpp"

namespace mfa {

namespace {

constexpr double kPerronTolerance = 1e-14;
constexpr std::size_t kPerronIterations = 100000;

/// Weight exponent of edge e at y under F_{q,t}.
double edge_weight(const System& system, const PotentialFamily& family, const QTWeights& w, std::size_t e, double y) {
  return w.q * family.psi(e, y) + w.exponent * std::log(system.apply(e, y).abs_derivative);
}

/// Reference point of the cylinder of word v: phi_v(left end of X_{t(v)}).
double reference_point(const System& system, const Word& v) {
  return evaluate_word_map(system, v, system.domain(v.back()).lo).value;
}

/// Mass carried by the followers of each edge, from the Perron vector of the
/// level-one weight matrix. Identically 1 on full shifts.
std::vector<double> follower_masses(const System& system, const PotentialFamily& family, const QTWeights& w) {
  const std::size_t n = system.num_edges();
  if (system.is_full_shift()) return std::vector<double>(n, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t f = 0; f < n; ++f)
      if (system.admissible(e, f))
        m(e, f) = std::exp(edge_weight(system, family, w, e, reference_point(system, Word{f})));
  const LeadingEigen r = power_iteration(m, kPerronTolerance, kPerronIterations);
  const Eigen::VectorXd level_one = r.vector / r.vector.sum();
  std::vector<double> mass(n, 0.0);
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t f = 0; f < n; ++f)
      if (system.admissible(e, f)) mass[e] += level_one(f);
  return mass;
}

}  // namespace

MeasureModel cylinder_weights(const System& system, const PotentialFamily& family, const QTWeights& weights,
                              std::size_t n, std::uint64_t budget) {
  if (n == 0) throw ParameterError("generation must be at least 1");
  const std::vector<Word> words = enumerate_words(system, n, budget);
  const std::vector<double> mass = follower_masses(system, family, weights);

  MeasureModel model;
  model.generation = n;
  model.q = weights.q;
  model.t = weights.t;
  model.cells.resize(words.size());
  const auto count = static_cast<std::ptrdiff_t>(words.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const Word& w = words[static_cast<std::size_t>(i)];
    const SumBracket b = cylinder_sum_bracket(system, family, weights, w);
    CylinderCell& c = model.cells[static_cast<std::size_t>(i)];
    c.word = w;
    c.interval = cylinder_interval(system, w);
    c.weight_low = std::exp(b.inf_sum) * mass[w.back()];
    c.weight_high = std::exp(b.sup_sum) * mass[w.back()];
    c.vertex = system.source_vertex(w.front());
  }

  double low = 0.0, high = 0.0;
  for (const auto& c : model.cells) {
    low += c.weight_low;
    high += c.weight_high;
  }
  if (!(low > 0.0) || !std::isfinite(high)) throw ConvergenceError("cylinder weights do not normalize");
  const double g = std::sqrt(low * high);
  for (auto& c : model.cells) {
    c.weight_low /= g;
    c.weight_high /= g;
  }

  std::sort(model.cells.begin(), model.cells.end(), [](const CylinderCell& a, const CylinderCell& b) {
    return a.vertex != b.vertex ? a.vertex < b.vertex : a.interval.lo < b.interval.lo;
  });
  const std::size_t nv = system.vertices().size();
  model.vertex_begin.assign(nv + 1, model.cells.size());
  for (std::size_t i = model.cells.size(); i-- > 0;) model.vertex_begin[model.cells[i].vertex] = i;
  for (std::size_t v = nv; v-- > 0;) model.vertex_begin[v] = std::min(model.vertex_begin[v], model.vertex_begin[v + 1]);

  model.prefix_low.assign(model.cells.size() + 1, 0.0);
  model.prefix_high.assign(model.cells.size() + 1, 0.0);
  model.min_length = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.cells.size(); ++i) {
    model.prefix_low[i + 1] = model.prefix_low[i] + model.cells[i].weight_low;
    model.prefix_high[i + 1] = model.prefix_high[i] + model.cells[i].weight_high;
    model.min_length = std::min(model.min_length, model.cells[i].interval.length());
    model.max_length = std::max(model.max_length, model.cells[i].interval.length());
  }
  model.total_low = model.prefix_low.back();
  model.total_high = model.prefix_high.back();
  model.defect = std::max({0.0, 1.0 - model.total_low, model.total_high - 1.0});
  return model;
}

MeasureModel cylinder_weights(const System& system, const PotentialFamily& family, std::size_t n,
                              std::uint64_t budget) {
  return cylinder_weights(system, family, QTWeights{1.0, 0.0, family.u()}, n, budget);
}

BallMeasure ball_measure(const MeasureModel& model, double x, double r, std::size_t vertex) {
  if (vertex + 1 >= model.vertex_begin.size()) throw ParameterError("vertex out of range");
  const auto first = model.cells.begin() + static_cast<std::ptrdiff_t>(model.vertex_begin[vertex]);
  const auto last = model.cells.begin() + static_cast<std::ptrdiff_t>(model.vertex_begin[vertex + 1]);
  const double a = x - r;
  const double b = x + r;
  auto index = [&](auto it) { return static_cast<std::size_t>(it - model.cells.begin()); };

  // Interiors are disjoint, so both endpoints are sorted along the cells.
  const auto meet_begin = std::partition_point(first, last, [a](const CylinderCell& c) { return c.interval.hi < a; });
  const auto meet_end = std::partition_point(first, last, [b](const CylinderCell& c) { return c.interval.lo <= b; });
  const auto in_begin = std::partition_point(first, last, [a](const CylinderCell& c) { return c.interval.lo < a; });
  const auto in_end = std::partition_point(first, last, [b](const CylinderCell& c) { return c.interval.hi <= b; });

  BallMeasure m;
  if (index(meet_end) > index(meet_begin))
    m.high = model.prefix_high[index(meet_end)] - model.prefix_high[index(meet_begin)];
  if (index(in_end) > index(in_begin))
    m.low = model.prefix_low[index(in_end)] - model.prefix_low[index(in_begin)];
  return m;
}

std::vector<double> default_radii(const System& system, const MeasureModel& model) {
  std::vector<double> radii;
  for (double r = system.diameter() / 4.0; r >= model.max_length; r *= 0.5) radii.push_back(r);
  return radii;
}

LocalDimEstimate local_dimension(const MeasureModel& model, double x, std::span<const double> radii,
                                 std::size_t vertex) {
  if (radii.size() < 6) throw ParameterError("local dimension needs at least 6 radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1])) throw ParameterError("radii must be strictly decreasing");

  LocalDimEstimate est;
  est.x = x;
  est.radii.assign(radii.begin(), radii.end());
  const std::size_t n = radii.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    const BallMeasure m = ball_measure(model, x, radii[i], vertex);
    if (!(m.high > 0.0)) throw DomainError("ball around x misses every cylinder");
    lx[i] = std::log(radii[i]);
    ly[i] = std::log(m.midpoint());
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  est.slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double res = ly[i] - my - est.slope * (lx[i] - mx);
    rss += res * res;
  }
  est.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  return est;
}

MuQSample sample_mu_q(const System& system, const PotentialFamily& family, double q, double t,
                      const SamplingOptions& options) {
  const std::size_t k = options.memory;
  if (k == 0) throw ParameterError("sampling memory must be at least 1");
  if (options.word_length < k) throw ParameterError("word length shorter than the sampling memory");
  if (check_finitely_primitive(system, 4 * system.num_edges() * system.num_edges()).verdict != Verdict::yes)
    throw UnsupportedStructureError("sampling needs a primitive incidence matrix");
  const QTWeights w = make_weights(system, family, q, t);

  const std::vector<Word> blocks = enumerate_words(system, k, options.max_states);
  const std::size_t s = blocks.size();
  std::map<Word, std::size_t> index;
  for (std::size_t i = 0; i < s; ++i) index.emplace(blocks[i], i);

  // Transition b -> (b_2..b_k, c) carries exp(F_{b_1}) at the reference point
  // of the cylinder (b_2..b_k, c).
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t i = 0; i < s; ++i) {
    const Word& b = blocks[i];
    for (std::size_t c = 0; c < system.num_edges(); ++c) {
      if (!system.admissible(b.back(), c)) continue;
      Word tail(b.begin() + 1, b.end());
      tail.push_back(c);
      const double y = reference_point(system, tail);
      m(i, index.at(tail)) = std::exp(edge_weight(system, family, w, b.front(), y));
    }
  }
  const LeadingEigen right = power_iteration(m, kPerronTolerance, kPerronIterations);
  const LeadingEigen left = left_power_iteration(m, kPerronTolerance, kPerronIterations);
  const double lambda = right.value;

  std::vector<std::vector<double>> cdf(s);
  std::vector<std::vector<std::size_t>> next(s);
  for (std::size_t i = 0; i < s; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      if (m(i, j) == 0.0) continue;
      acc += m(i, j) * right.vector(j) / (lambda * right.vector(i));
      cdf[i].push_back(acc);
      next[i].push_back(j);
    }
    for (double& v : cdf[i]) v /= acc;
  }
  std::vector<double> start(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    acc += left.vector(i) * right.vector(i);
    start[i] = acc;
  }
  for (double& v : start) v /= acc;

  auto pick = [](const std::vector<double>& c, double u) {
    const auto it = std::upper_bound(c.begin(), c.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - c.begin(), static_cast<std::ptrdiff_t>(c.size()) - 1));
  };

  const CounterRng rng(options.seed);
  MuQSample out;
  out.points.resize(options.count);
  out.words.resize(options.count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(options.count); ++i) {
    const auto stream = static_cast<std::uint64_t>(i);
    std::uint64_t draw = 0;
    std::size_t state = pick(start, rng.uniform(stream, draw++));
    Word word = blocks[state];
    while (word.size() < options.word_length) {
      const std::size_t choice = pick(cdf[state], rng.uniform(stream, draw++));
      state = next[state][choice];
      word.push_back(blocks[state].back());
    }
    out.points[static_cast<std::size_t>(i)] = cylinder_interval(system, word).midpoint();
    out.words[static_cast<std::size_t>(i)] = std::move(word);
  }

  out.edge_frequencies.assign(system.num_edges(), 0.0);
  std::size_t letters = 0;
  for (const auto& word : out.words) {
    for (std::size_t e : word) out.edge_frequencies[e] += 1.0;
    letters += word.size();
  }
  for (double& f : out.edge_frequencies) f /= static_cast<double>(letters);
  return out;
}

MuQSample sample_mu_q(const System& system, const PotentialFamily& family, double q, const SamplingOptions& options,
                      const SolverOptions& solver) {
  const double t = temperature_root(system, family, q, solver).t;
  return sample_mu_q(system, family, q, t, options);
}

ConcentrationResult concentration_test(const System& system, const PotentialFamily& family, double q, double band,
                                       const SamplingOptions& options, const SolverOptions& solver) {
  const double t = temperature_root(system, family, q, solver).t;
  ConcentrationResult result;
  result.q = q;
  result.band = band;
  result.alpha = alpha_from_pressure_gradient(system, family, q, t, solver).alpha;

  const MuQSample sample = sample_mu_q(system, family, q, t, options);
  const MeasureModel base = cylinder_weights(system, family, options.word_length);
  const std::vector<double> radii = default_radii(system, base);
  result.estimates.resize(sample.points.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(sample.points.size()); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      result.estimates[idx] =
          local_dimension(base, sample.points[idx], radii, system.source_vertex(sample.words[idx].front()));
    } catch (...) {
#pragma omp critical(mfa_concentration_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::size_t inside = 0;
  for (const auto& e : result.estimates)
    if (std::abs(e.slope - result.alpha) <= band) ++inside;
  result.fraction = sample.points.empty() ? 0.0 : static_cast<double>(inside) / static_cast<double>(sample.points.size());
  return result;
}

}  // namespace mfa
