#include "mfa/gdms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

constexpr int kGridPoints = 33;

double relative_slack(const Interval& iv) { return 1e-12 * std::max(1.0, iv.length()); }

std::pair<double, double> eval_signed(const MapKind& map, double x) {
  return std::visit(
      [x](const auto& m) -> std::pair<double, double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineMap>) {
          return {m.ratio * x + m.shift, m.ratio};
        } else if constexpr (std::is_same_v<T, MoebiusMap>) {
          const double den = m.c * x + m.d;
          return {(m.a * x + m.b) / den, (m.a * m.d - m.b * m.c) / (den * den)};
        } else {
          return m.eval(x);
        }
      },
      map);
}

/// Lipschitz constant of log|phi'| on the interval.
double log_derivative_lipschitz(const MapKind& map, const Interval& dom) {
  if (const auto* m = std::get_if<MoebiusMap>(&map)) {
    if (m->c == 0.0) return 0.0;
    const double d0 = std::abs(m->c * dom.lo + m->d);
    const double d1 = std::abs(m->c * dom.hi + m->d);
    return 2.0 * std::abs(m->c) / std::min(d0, d1);
  }
  if (const auto* m = std::get_if<CustomMap>(&map)) return m->log_derivative_lipschitz;
  return 0.0;
}

std::vector<double> grid(const Interval& iv) {
  std::vector<double> xs(kGridPoints);
  for (int k = 0; k < kGridPoints; ++k)
    xs[k] = iv.lo + iv.length() * static_cast<double>(k) / (kGridPoints - 1);
  return xs;
}

using boost::multiprecision::cpp_rational;

cpp_rational exact_apply(const MapKind& map, const cpp_rational& x) {
  if (const auto* m = std::get_if<AffineMap>(&map))
    return cpp_rational(m->ratio) * x + cpp_rational(m->shift);
  const auto& m = std::get<MoebiusMap>(map);
  return (cpp_rational(m.a) * x + cpp_rational(m.b)) / (cpp_rational(m.c) * x + cpp_rational(m.d));
}

cpp_rational exact_distance(const cpp_rational& p, const cpp_rational& lo, const cpp_rational& hi) {
  if (p < lo) return lo - p;
  if (p > hi) return p - hi;
  return cpp_rational(0);
}

}  // namespace

// ---------------------------------------------------------------------------

Incidence Incidence::from_rows(const std::vector<std::vector<int>>& rows) {
  Incidence a(rows.size(), false);
  for (std::size_t e = 0; e < rows.size(); ++e) {
    if (rows[e].size() != rows.size()) throw ParameterError("incidence matrix must be square");
    for (std::size_t f = 0; f < rows.size(); ++f) a.set(e, f, rows[e][f] != 0);
  }
  return a;
}

bool Incidence::all_ones() const {
  return std::all_of(cells_.begin(), cells_.end(), [](std::uint8_t c) { return c != 0; });
}

System::System(std::vector<VertexPiece> vertices, std::vector<EdgeMap> edges, Incidence incidence,
               SystemOptions options)
    : name_(std::move(options.name)),
      vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      incidence_(std::move(incidence)),
      tail_(std::move(options.tail)),
      distortion_meta_(options.distortion_meta) {
  if (vertices_.empty()) throw ParameterError("system needs at least one vertex");
  if (edges_.empty()) throw ParameterError("system needs at least one edge");
  if (incidence_.size() != edges_.size())
    throw ParameterError("incidence matrix size does not match edge count");

  // Sort edges by id and permute the incidence accordingly.
  std::vector<std::size_t> order(edges_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return edges_[x].id < edges_[y].id; });
  {
    std::vector<EdgeMap> sorted;
    Incidence permuted(edges_.size(), false);
    for (std::size_t e = 0; e < order.size(); ++e) {
      sorted.push_back(edges_[order[e]]);
      for (std::size_t f = 0; f < order.size(); ++f)
        permuted.set(e, f, incidence_(order[e], order[f]));
    }
    edges_ = std::move(sorted);
    incidence_ = std::move(permuted);
  }
  for (std::size_t e = 1; e < edges_.size(); ++e)
    if (edges_[e].id == edges_[e - 1].id) throw ParameterError("duplicate edge id");

  for (const auto& v : vertices_) {
    if (!(v.interval.hi > v.interval.lo))
      throw ParameterError("vertex " + std::to_string(v.id) + " interval has nonpositive length");
    diameter_ = std::max(diameter_, v.interval.length());
  }
  for (std::size_t v = 1; v < vertices_.size(); ++v)
    for (std::size_t w = 0; w < v; ++w)
      if (vertices_[v].id == vertices_[w].id) throw ParameterError("duplicate vertex id");

  for (const auto& e : edges_) {
    source_.push_back(vertex_position(e.source));
    target_.push_back(vertex_position(e.target));
    if (std::holds_alternative<CustomMap>(e.map)) {
      has_custom_ = true;
      if (!std::get<CustomMap>(e.map).eval) throw ParameterError("custom map without evaluator");
    }
    if (!std::holds_alternative<AffineMap>(e.map)) all_affine_ = false;
  }

  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto& edge = edges_[e];
    const Interval& dom = domain(e);
    const Interval& cod = codomain(e);
    const std::string label = "edge " + std::to_string(edge.id);
    if (const auto* m = std::get_if<AffineMap>(&edge.map)) {
      if (m->ratio == 0.0) throw ParameterError(label + ": affine ratio must be nonzero");
    } else if (const auto* m = std::get_if<MoebiusMap>(&edge.map)) {
      if (m->a * m->d - m->b * m->c == 0.0) throw ParameterError(label + ": singular Moebius map");
      if (m->c != 0.0) {
        const double pole = -m->d / m->c;
        if (dom.contains(pole)) throw ParameterError(label + ": pole inside the domain interval");
      }
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double s_e = 0.0;
    const auto xs = std::holds_alternative<CustomMap>(edge.map) ? grid(dom)
                                                                 : std::vector<double>{dom.lo, dom.hi};
    for (double x : xs) {
      const auto [y, dy] = eval_signed(edge.map, x);
      lo = std::min(lo, y);
      hi = std::max(hi, y);
      s_e = std::max(s_e, std::abs(dy));
    }
    if (!cod.contains(Interval{lo, hi}, relative_slack(cod)))
      throw ParameterError(label + ": image escapes the codomain interval");
    if (edge.contraction <= 0.0) edge.contraction = s_e;
    if (edge.contraction > 1.0 + 1e-12) throw ParameterError(label + ": map is expanding");
  }

  for (std::size_t e = 0; e < edges_.size(); ++e)
    for (std::size_t f = 0; f < edges_.size(); ++f)
      if (incidence_(e, f) && target_[e] != source_[f])
        throw ParameterError("incidence matrix does not respect the multigraph");

  double s1 = 0.0;
  for (const auto& e : edges_) s1 = std::max(s1, e.contraction);
  if (s1 < 1.0) {
    contraction_ = s1;
    prefactor_ = 1.0;
  } else {
    // Eventual contraction over two steps (e.g. the Gauss map branch 1/(1+x)).
    double s2 = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e)
      for (std::size_t f = 0; f < edges_.size(); ++f)
        if (incidence_(e, f)) s2 = std::max(s2, word_derivative_range(*this, Word{e, f}).sup);
    if (!(s2 < 1.0)) throw ParameterError("system is not eventually contracting");
    contraction_ = std::sqrt(s2);
    prefactor_ = s1 / contraction_;
  }

  if (tail_ && !(tail_->gamma > 0.0)) throw ParameterError("tail model gamma must be positive");

  if (options.distortion) {
    if (*options.distortion < 1.0) throw ParameterError("distortion constant must be >= 1");
    distortion_ = options.distortion;
  } else {
    distortion_ = estimate_distortion_constant(*this).constant;
  }
}

std::size_t System::edge_position(int id) const {
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                                   [](const EdgeMap& e, int v) { return e.id < v; });
  if (it == edges_.end() || it->id != id) throw ParameterError("unknown edge id " + std::to_string(id));
  return static_cast<std::size_t>(it - edges_.begin());
}

std::size_t System::vertex_position(int id) const {
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (vertices_[v].id == id) return v;
  throw ParameterError("unknown vertex id " + std::to_string(id));
}

MapValue System::apply(std::size_t e, double x) const {
  const auto [y, dy] = eval_signed(edges_[e].map, x);
  return {y, std::abs(dy)};
}

std::optional<MoebiusMatrix> System::matrix(std::size_t e) const {
  const auto& map = edges_[e].map;
  if (const auto* m = std::get_if<AffineMap>(&map)) return MoebiusMatrix::from(*m);
  if (const auto* m = std::get_if<MoebiusMap>(&map)) return MoebiusMatrix::from(*m);
  return std::nullopt;
}

bool System::is_full_shift() const { return vertices_.size() == 1 && incidence_.all_ones(); }

bool System::is_multigraph_induced() const {
  for (std::size_t e = 0; e < edges_.size(); ++e)
    for (std::size_t f = 0; f < edges_.size(); ++f)
      if (incidence_(e, f) != (target_[e] == source_[f])) return false;
  return true;
}

double System::distortion_or_throw() const {
  if (!distortion_) throw DomainError("distortion constant unknown for this system");
  return *distortion_;
}

// ---------------------------------------------------------------------------

void check_admissible(const System& system, const Word& w) {
  if (w.empty()) throw AdmissibilityError("empty word");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= system.num_edges()) throw AdmissibilityError("edge position out of range");
    if (i + 1 < w.size() && !system.admissible(w[i], w[i + 1]))
      throw AdmissibilityError("inadmissible pair (" + std::to_string(system.edges()[w[i]].id) + ", " +
                               std::to_string(system.edges()[w[i + 1]].id) + ")");
  }
}

MapValue evaluate_word_map(const System& system, const Word& w, double x) {
  check_admissible(system, w);
  const Interval& dom = system.domain(w.back());
  if (!dom.contains(x, relative_slack(dom))) throw DomainError("point outside the domain of the word");
  double y = x;
  double derivative = 1.0;
  for (std::size_t i = w.size(); i-- > 0;) {
    const MapValue step = system.apply(w[i], y);
    derivative *= step.abs_derivative;
    y = step.value;
  }
  return {y, derivative};
}

Interval cylinder_interval(const System& system, const Word& w) {
  check_admissible(system, w);
  const Interval& dom = system.domain(w.back());
  if (!system.has_custom_maps()) {
    const double a = evaluate_word_map(system, w, dom.lo).value;
    const double b = evaluate_word_map(system, w, dom.hi).value;
    return {std::min(a, b), std::max(a, b)};
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double x : grid(dom)) {
    const double y = evaluate_word_map(system, w, x).value;
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  return {lo, hi};
}

DerivativeRange word_derivative_range(const System& system, const Word& w) {
  check_admissible(system, w);
  const Interval& dom = system.domain(w.back());
  bool exact = true;
  for (std::size_t e : w) exact = exact && !std::holds_alternative<CustomMap>(system.edges()[e].map);
  if (exact) {
    MoebiusMatrix m;
    for (std::size_t e : w) m = m.then_inner(*system.matrix(e));
    const double d0 = m.abs_derivative(dom.lo);
    const double d1 = m.abs_derivative(dom.hi);
    return {std::min(d0, d1), std::max(d0, d1)};
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double x : grid(dom)) {
    const double d = evaluate_word_map(system, w, x).abs_derivative;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  double lip = 0.0;
  for (std::size_t e : w) lip = std::max(lip, log_derivative_lipschitz(system.edges()[e].map, system.domain(e)));
  const double s = system.contraction();
  const double slack = lip * system.contraction_prefactor() / (1.0 - s) * 0.5 * dom.length() / (kGridPoints - 1);
  return {lo * std::exp(-slack), hi * std::exp(slack)};
}

std::uint64_t count_words(const System& system, std::size_t n) {
  if (n == 0) return 0;
  const std::size_t k = system.num_edges();
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> ending(k, 1);
  for (std::size_t step = 1; step < n; ++step) {
    std::vector<std::uint64_t> next(k, 0);
    for (std::size_t e = 0; e < k; ++e)
      for (std::size_t f = 0; f < k; ++f)
        if (system.admissible(e, f)) next[f] = (next[f] > kMax - ending[e]) ? kMax : next[f] + ending[e];
    ending = std::move(next);
  }
  std::uint64_t total = 0;
  for (auto c : ending) total = (total > kMax - c) ? kMax : total + c;
  return total;
}

namespace {

void visit_words(const System& system, std::size_t n, Word& prefix,
                 const std::function<void(const Word&)>& visit) {
  if (prefix.size() == n) {
    visit(prefix);
    return;
  }
  for (std::size_t f = 0; f < system.num_edges(); ++f) {
    if (!prefix.empty() && !system.admissible(prefix.back(), f)) continue;
    prefix.push_back(f);
    visit_words(system, n, prefix, visit);
    prefix.pop_back();
  }
}

}  // namespace

void for_each_word(const System& system, std::size_t n, const std::function<void(const Word&)>& visit,
                   std::uint64_t budget) {
  if (n == 0) throw DomainError("word length must be positive");
  const auto count = count_words(system, n);
  if (count > budget)
    throw ResourceError("word budget exceeded: " + std::to_string(count) + " words of length " +
                        std::to_string(n));
  Word prefix;
  prefix.reserve(n);
  visit_words(system, n, prefix, visit);
}

std::vector<Word> enumerate_words(const System& system, std::size_t n, std::uint64_t budget) {
  std::vector<Word> out;
  for_each_word(system, n, [&](const Word& w) { out.push_back(w); }, budget);
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::unknown: return "unknown";
  }
  return "unknown";
}

PrimitivityVerdict check_finitely_primitive(const System& system, std::size_t p_max) {
  const std::size_t k = system.num_edges();
  using Bool = std::vector<std::uint8_t>;
  auto multiply = [k](const Bool& x, const Bool& y) {
    Bool z(k * k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l)
        if (x[i * k + l])
          for (std::size_t j = 0; j < k; ++j) z[i * k + j] |= y[l * k + j];
    return z;
  };
  Bool a(k * k);
  for (std::size_t e = 0; e < k; ++e)
    for (std::size_t f = 0; f < k; ++f) a[e * k + f] = system.admissible(e, f) ? 1 : 0;

  PrimitivityVerdict verdict;
  Bool power = a;  // A^{p+1}
  std::vector<Bool> seen{power};
  for (std::size_t p = 0; p <= p_max; ++p) {
    if (std::all_of(power.begin(), power.end(), [](std::uint8_t c) { return c != 0; })) {
      verdict.verdict = Verdict::yes;
      verdict.p = p;
      break;
    }
    power = multiply(power, a);
    if (std::find(seen.begin(), seen.end(), power) != seen.end()) {
      // The boolean power sequence has entered a cycle without becoming positive.
      verdict.verdict = Verdict::no;
      return verdict;
    }
    seen.push_back(power);
  }
  if (verdict.verdict != Verdict::yes) {
    // Wielandt: a primitive k x k matrix satisfies A^{(k-1)^2+1} > 0.
    const std::size_t wielandt = (k - 1) * (k - 1) + 1;
    verdict.verdict = (p_max + 1 >= wielandt) ? Verdict::no : Verdict::unknown;
    return verdict;
  }

  // Witnesses: one connecting word of length p for each ordered pair (e, f).
  if (verdict.p == 0) {
    verdict.witnesses.push_back(Word{});
    return verdict;
  }
  if (k > 64) return verdict;
  const std::size_t p = verdict.p;
  // reach[j][x] = x can be the j-th connecting letter and still reach f.
  for (std::size_t e = 0; e < k; ++e) {
    for (std::size_t f = 0; f < k; ++f) {
      // backward layers: ok[j] letters at position j (1..p) that lead to f
      std::vector<Bool> ok(p + 1, Bool(k, 0));
      for (std::size_t x = 0; x < k; ++x) ok[p][x] = system.admissible(x, f);
      for (std::size_t j = p; j-- > 1;)
        for (std::size_t x = 0; x < k; ++x)
          for (std::size_t y = 0; y < k; ++y)
            if (system.admissible(x, y) && ok[j + 1][y]) ok[j][x] = 1;
      Word word;
      std::size_t prev = e;
      for (std::size_t j = 1; j <= p; ++j) {
        for (std::size_t x = 0; x < k; ++x)
          if (system.admissible(prev, x) && ok[j][x]) {
            word.push_back(x);
            prev = x;
            break;
          }
      }
      if (word.size() == p && std::find(verdict.witnesses.begin(), verdict.witnesses.end(), word) ==
                                   verdict.witnesses.end())
        verdict.witnesses.push_back(word);
    }
  }
  std::sort(verdict.witnesses.begin(), verdict.witnesses.end());
  return verdict;
}

OscReport check_osc(const System& system) {
  OscReport report;
  const std::size_t k = system.num_edges();
  std::vector<Interval> images(k);
  for (std::size_t e = 0; e < k; ++e) images[e] = cylinder_interval(system, Word{e});
  for (std::size_t e = 0; e < k; ++e)
    for (std::size_t f = e + 1; f < k; ++f) {
      if (system.source_vertex(e) != system.source_vertex(f)) continue;
      const double overlap = std::min(images[e].hi, images[f].hi) - std::max(images[e].lo, images[f].lo);
      if (overlap > 0.0) {
        report.ok = false;
        report.worst_overlap = std::max(report.worst_overlap, overlap);
      }
    }
  return report;
}

BscReport check_bsc(const System& system) {
  BscReport report;
  if (system.has_custom_maps() && !system.tail()) {
    report.reason = "custom maps without a tail model";
    return report;
  }
  if (system.has_custom_maps()) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < system.vertices().size(); ++v) {
      const Interval& x = system.vertices()[v].interval;
      for (std::size_t e = 0; e < system.num_edges(); ++e) {
        if (system.source_vertex(e) != v) continue;
        const Interval img = cylinder_interval(system, Word{e});
        for (double b : {x.lo, x.hi}) gap = std::min(gap, b < img.lo ? img.lo - b : (b > img.hi ? b - img.hi : 0.0));
      }
      for (double acc : system.tail()->accumulation_points)
        for (double b : {x.lo, x.hi}) gap = std::min(gap, std::abs(b - acc));
    }
    report.gap = gap;
    report.reason = "endpoint evaluation of custom maps";
    return report;
  }

  cpp_rational best;
  bool have = false;
  auto consider = [&](const cpp_rational& d) {
    if (!have || d < best) {
      best = d;
      have = true;
    }
  };
  for (std::size_t v = 0; v < system.vertices().size(); ++v) {
    const Interval& x = system.vertices()[v].interval;
    const cpp_rational bounds[2] = {cpp_rational(x.lo), cpp_rational(x.hi)};
    std::optional<std::pair<cpp_rational, cpp_rational>> last_image;
    for (std::size_t e = 0; e < system.num_edges(); ++e) {
      if (system.source_vertex(e) != v) continue;
      const Interval& dom = system.domain(e);
      cpp_rational a = exact_apply(system.edges()[e].map, cpp_rational(dom.lo));
      cpp_rational b = exact_apply(system.edges()[e].map, cpp_rational(dom.hi));
      if (b < a) std::swap(a, b);
      for (const auto& p : bounds) consider(exact_distance(p, a, b));
      last_image = std::make_pair(a, b);
    }
    if (system.tail() && last_image) {
      // Images of the untruncated tail lie between the last image and the
      // accumulation points.
      for (double acc_d : system.tail()->accumulation_points) {
        const cpp_rational acc(acc_d);
        const cpp_rational lo = acc < last_image->first ? acc : last_image->first;
        const cpp_rational hi = acc > last_image->second ? acc : last_image->second;
        for (const auto& p : bounds) consider(exact_distance(p, lo, hi));
      }
    }
  }
  report.gap = best.convert_to<double>();
  std::ostringstream os;
  os << best;
  report.exact = os.str();
  report.reason = system.tail() ? "exact endpoint arithmetic with tail accumulation points"
                                : "exact endpoint arithmetic";
  return report;
}

DistortionEstimate estimate_distortion_constant(const System& system) {
  DistortionEstimate est;
  for (std::size_t e = 0; e < system.num_edges(); ++e) {
    const auto r = word_derivative_range(system, Word{e});
    est.level_one_ratio = std::max(est.level_one_ratio, r.sup / r.inf);
  }
  if (system.distortion_meta()) {
    const auto& meta = *system.distortion_meta();
    est.constant = std::exp(meta.lipschitz * system.contraction_prefactor() / (1.0 - system.contraction()) *
                            std::pow(system.diameter(), meta.exponent));
    est.method = "hoelder metadata";
    return est;
  }
  if (system.all_affine()) {
    est.constant = 1.0;
    est.method = "affine";
    return est;
  }
  if (system.has_custom_maps()) {
    est.method = "unknown: custom maps without metadata";
    return est;
  }

  // Extend every piece X_v to W_v = [a - left, b + right] such that each map is
  // pole-free on W_{t(e)} and maps it into W_{i(e)}. Every composite phi_w is
  // then a Moebius map whose pole lies outside W_{t(w)}, which bounds its
  // derivative ratio on X_{t(w)} by (1 + |X| / dist(X, pole))^2.
  const auto& verts = system.vertices();
  const std::size_t nv = verts.size();
  std::vector<double> left_room(nv, std::numeric_limits<double>::infinity());
  std::vector<double> right_room(nv, std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < system.num_edges(); ++e) {
    const auto* m = std::get_if<MoebiusMap>(&system.edges()[e].map);
    if (!m || m->c == 0.0) continue;
    const double pole = -m->d / m->c;
    const std::size_t v = system.target_vertex(e);
    const Interval& x = verts[v].interval;
    if (pole < x.lo) left_room[v] = std::min(left_room[v], x.lo - pole);
    if (pole > x.hi) right_room[v] = std::min(right_room[v], pole - x.hi);
  }
  auto candidates = [](double room, double len) {
    std::vector<double> c;
    if (std::isfinite(room)) {
      for (int k = 1; k <= 20; ++k) c.push_back(room * (1.0 - std::ldexp(1.0, -k)));
    } else {
      for (int k = -4; k <= 12; ++k) c.push_back(len * std::ldexp(1.0, k));
    }
    return c;
  };
  std::optional<double> best;
  const std::size_t ncand = 20;
  for (std::size_t il = 0; il < ncand; ++il) {
    for (std::size_t ir = 0; ir < ncand; ++ir) {
      std::vector<Interval> w(nv);
      std::vector<double> dl(nv), dr(nv);
      bool usable = true;
      for (std::size_t v = 0; v < nv; ++v) {
        const double len = verts[v].interval.length();
        const auto cl = candidates(left_room[v], len);
        const auto cr = candidates(right_room[v], len);
        if (il >= cl.size() || ir >= cr.size()) {
          usable = false;
          break;
        }
        dl[v] = cl[il];
        dr[v] = cr[ir];
        w[v] = {verts[v].interval.lo - dl[v], verts[v].interval.hi + dr[v]};
      }
      if (!usable) continue;
      bool invariant = true;
      for (std::size_t e = 0; e < system.num_edges() && invariant; ++e) {
        const Interval& we = w[system.target_vertex(e)];
        const auto mm = *system.matrix(e);
        if (mm.c != 0.0L) {
          const double pole = static_cast<double>(-mm.d / mm.c);
          if (we.contains(pole)) {
            invariant = false;
            break;
          }
        }
        const double y0 = mm.value(we.lo);
        const double y1 = mm.value(we.hi);
        invariant = w[system.source_vertex(e)].contains(Interval{std::min(y0, y1), std::max(y0, y1)});
      }
      if (!invariant) continue;
      double k = 1.0;
      for (std::size_t v = 0; v < nv; ++v) {
        const double len = verts[v].interval.length();
        k = std::max({k, std::pow(1.0 + len / dl[v], 2.0), std::pow(1.0 + len / dr[v], 2.0)});
      }
      if (!best || k < *best) best = k;
    }
  }
  if (best) {
    est.constant = std::max(*best, est.level_one_ratio);
    est.method = "moebius extension";
  } else {
    est.method = "unknown: no invariant extension found";
  }
  return est;
}

double norm_comparability_constant(const System& system) {
  double c = 1.0;
  for (std::size_t e = 0; e + 1 < system.num_edges(); ++e) {
    const double a = system.edges()[e].contraction;
    const double b = system.edges()[e + 1].contraction;
    if (a <= 0.0 || b <= 0.0) return std::numeric_limits<double>::infinity();
    c = std::max({c, a / b, b / a});
  }
  return c;
}

// ---------------------------------------------------------------------------

System builtin_system(const std::string& name, const BuiltinParams& params) {
  if (name == "cf_full" || name == "cf_no_one") {
    const bool no_one = name == "cf_no_one";
    const int first = no_one ? 2 : 1;
    if (params.truncation < static_cast<std::size_t>(first))
      throw ParameterError(name + ": truncation too small");
    Interval x{0.0, 1.0};
    if (no_one) {
      if (!(params.eps >= -0.25 && params.eps < 0.0))
        throw ParameterError("cf_no_one: eps must lie in [-1/4, 0)");
      x = {params.eps, 0.75};
    }
    std::vector<EdgeMap> edges;
    for (int n = first; n <= static_cast<int>(params.truncation); ++n)
      edges.push_back({n, 0, 0, MoebiusMap{0.0, 1.0, 1.0, static_cast<double>(n)}, 0.0});
    SystemOptions opts;
    opts.name = name + "(" + std::to_string(params.truncation) + ")";
    opts.tail = TailModel{2.0, 0.0, {0.0}};
    const std::size_t k = edges.size();
    return System({VertexPiece{0, x}}, std::move(edges), Incidence(k, true), std::move(opts));
  }
  if (name == "affine_cantor") {
    const auto& r = params.ratios;
    if (r.empty()) throw ParameterError("affine_cantor: no ratios");
    for (double ri : r)
      if (!(ri > 0.0 && ri < 1.0)) throw ParameterError("affine_cantor: ratios must lie in (0,1)");
    std::vector<double> gaps = params.gaps;
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    if (gaps.empty() && r.size() > 1) gaps.assign(r.size() - 1, (1.0 - total) / static_cast<double>(r.size() - 1));
    if (gaps.size() + 1 != r.size() && !(r.size() == 1 && gaps.empty()))
      throw ParameterError("affine_cantor: need one gap between each pair of images");
    for (double g : gaps)
      if (g < 0.0) throw ParameterError("affine_cantor: images overlap");
    std::vector<EdgeMap> edges;
    double left = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      edges.push_back({static_cast<int>(i + 1), 0, 0, AffineMap{r[i], left}, 0.0});
      left += r[i] + (i < gaps.size() ? gaps[i] : 0.0);
    }
    if (left > 1.0 + 1e-12) throw ParameterError("affine_cantor: images escape [0,1]");
    SystemOptions opts;
    opts.name = "affine_cantor";
    const std::size_t k = edges.size();
    return System({VertexPiece{0, {0.0, 1.0}}}, std::move(edges), Incidence(k, true), std::move(opts));
  }
  throw ParameterError("unknown builtin system '" + name + "'");
}

}  // namespace mfa
