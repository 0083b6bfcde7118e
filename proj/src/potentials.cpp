#include "mfa/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

constexpr int kGridPoints = 33;

double raw_psi(const PsiSpec& spec, std::size_t e, double x) {
  return std::visit(
      [e, x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, EdgeConstantPsi>) {
          return p.values[e];
        } else if constexpr (std::is_same_v<T, AffinePsi>) {
          return p.slope[e] * x + p.offset[e];
        } else {
          return p.eval(e, x);
        }
      },
      spec);
}

}  // namespace

PotentialFamily::PotentialFamily(const System& system, PsiSpec psi, double u, HolderMeta holder)
    : psi_(std::move(psi)), u_(u), holder_(holder), num_edges_(system.num_edges()) {
  if (!(u_ > system.theta()))
    throw DomainError("exponent u must exceed the finiteness parameter theta = " +
                      std::to_string(system.theta()));
  if (const auto* p = std::get_if<EdgeConstantPsi>(&psi_)) {
    if (p->values.size() != num_edges_) throw ParameterError("psi needs one value per edge");
  } else if (const auto* p = std::get_if<AffinePsi>(&psi_)) {
    if (p->slope.size() != num_edges_ || p->offset.size() != num_edges_)
      throw ParameterError("affine psi needs one slope and offset per edge");
  } else if (!std::get<CustomPsi>(psi_).eval) {
    throw ParameterError("custom psi without evaluator");
  }
  compute_bounds(system);
}

void PotentialFamily::compute_bounds(const System& system) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (const auto* p = std::get_if<EdgeConstantPsi>(&psi_)) {
    for (double v : p->values) {
      if (!std::isfinite(v)) throw ParameterError("psi values must be finite");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  } else if (std::holds_alternative<AffinePsi>(psi_)) {
    for (std::size_t e = 0; e < num_edges_; ++e)
      for (double x : {system.domain(e).lo, system.domain(e).hi}) {
        lo = std::min(lo, raw_psi(psi_, e, x));
        hi = std::max(hi, raw_psi(psi_, e, x));
      }
  } else {
    lo = -holder_.norm;
    hi = holder_.norm;
  }
  raw_inf_ = lo;
  raw_sup_ = hi;
  inf_psi_ = lo - normalization_;
  sup_psi_ = hi - normalization_;
}

PotentialFamily PotentialFamily::geometric(const System& system, double u) {
  return PotentialFamily(system, EdgeConstantPsi{std::vector<double>(system.num_edges(), 0.0)}, u);
}

PotentialFamily PotentialFamily::from_probabilities(const System& system, std::span<const double> p, double u) {
  if (p.size() != system.num_edges()) throw ParameterError("need one probability per edge");
  std::vector<double> values;
  for (std::size_t e = 0; e < p.size(); ++e) {
    const auto* m = std::get_if<AffineMap>(&system.edges()[e].map);
    if (!m) throw ParameterError("probability encoding requires affine maps");
    if (!(p[e] > 0.0)) throw ParameterError("probabilities must be positive");
    values.push_back(std::log(p[e]) - u * std::log(std::abs(m->ratio)));
  }
  return PotentialFamily(system, EdgeConstantPsi{std::move(values)}, u);
}

double PotentialFamily::psi(std::size_t e, double x) const { return raw_psi(psi_, e, x) - normalization_; }

double PotentialFamily::psi_constant(std::size_t e) const {
  return std::get<EdgeConstantPsi>(psi_).values[e] - normalization_;
}

double PotentialFamily::f(const System& system, std::size_t e, double x) const {
  return psi(e, x) + u_ * std::log(system.apply(e, x).abs_derivative);
}

PotentialFamily PotentialFamily::with_normalization(double c, std::string method) const {
  PotentialFamily out = *this;
  out.normalization_ = c;
  out.normalization_method_ = std::move(method);
  out.inf_psi_ = raw_inf_ - c;
  out.sup_psi_ = raw_sup_ - c;
  return out;
}

PotentialFamily PotentialFamily::shifted(double delta) const {
  PotentialFamily out = *this;
  if (auto* p = std::get_if<EdgeConstantPsi>(&out.psi_)) {
    for (double& v : p->values) v += delta;
  } else if (auto* p = std::get_if<AffinePsi>(&out.psi_)) {
    for (double& v : p->offset) v += delta;
  } else {
    auto inner = std::get<CustomPsi>(out.psi_).eval;
    out.psi_ = CustomPsi{[inner, delta](std::size_t e, double x) { return inner(e, x) + delta; }};
  }
  out.raw_inf_ += delta;
  out.raw_sup_ += delta;
  out.inf_psi_ += delta;
  out.sup_psi_ += delta;
  return out;
}

QTWeights make_weights(const System& system, const PotentialFamily& family, double q, double t) {
  const double exponent = q * family.u() + t;
  if (!(exponent > system.theta()))
    throw DomainError("qu + t = " + std::to_string(exponent) + " does not exceed theta = " +
                      std::to_string(system.theta()));
  return {q, t, exponent};
}

double ergodic_sum(const System& system, const PotentialFamily& family, const Word& w, double x) {
  return weighted_sum(system, family, QTWeights{1.0, 0.0, family.u()}, w, x);
}

double weighted_sum(const System& system, const PotentialFamily& family, const QTWeights& weights, const Word& w,
                    double x) {
  check_admissible(system, w);
  const Interval& dom = system.domain(w.back());
  if (!dom.contains(x, 1e-12 * std::max(1.0, dom.length())))
    throw DomainError("point outside the domain of the word");
  double y = x;
  double psi_sum = 0.0;
  double log_derivative = 0.0;
  for (std::size_t i = w.size(); i-- > 0;) {
    psi_sum += family.psi(w[i], y);
    const MapValue step = system.apply(w[i], y);
    log_derivative += std::log(step.abs_derivative);
    y = step.value;
  }
  return weights.q * psi_sum + weights.exponent * log_derivative;
}

SumBracket cylinder_sum_bracket(const System& system, const PotentialFamily& family, const QTWeights& weights,
                                const Word& w) {
  check_admissible(system, w);
  const Interval& dom = system.domain(w.back());

  double psi_lo = 0.0;
  double psi_hi = 0.0;
  if (family.edge_constant()) {
    for (std::size_t e : w) psi_lo += family.psi_constant(e);
    psi_hi = psi_lo;
  } else {
    psi_lo = std::numeric_limits<double>::infinity();
    psi_hi = -psi_lo;
    const double h = dom.length() / (kGridPoints - 1);
    for (int k = 0; k < kGridPoints; ++k) {
      double y = dom.lo + h * k;
      double sum = 0.0;
      for (std::size_t i = w.size(); i-- > 0;) {
        sum += family.psi(w[i], y);
        y = system.apply(w[i], y).value;
      }
      psi_lo = std::min(psi_lo, sum);
      psi_hi = std::max(psi_hi, sum);
    }
    double slack = 0.0;
    if (const auto* p = std::get_if<AffinePsi>(&family.psi_spec())) {
      double a = 0.0;
      for (double s : p->slope) a = std::max(a, std::abs(s));
      slack = a * system.contraction_prefactor() / (1.0 - system.contraction()) * 0.5 * h;
    } else {
      slack = family.holder().v_beta * std::pow(0.5 * h, family.holder().beta);
    }
    psi_lo -= slack;
    psi_hi += slack;
  }

  const DerivativeRange d = word_derivative_range(system, w);
  const double log_lo = std::log(d.inf);
  const double log_hi = std::log(d.sup);

  const double q = weights.q;
  const double s = weights.exponent;
  SumBracket b;
  b.inf_sum = (q >= 0 ? q * psi_lo : q * psi_hi) + (s >= 0 ? s * log_lo : s * log_hi);
  b.sup_sum = (q >= 0 ? q * psi_hi : q * psi_lo) + (s >= 0 ? s * log_hi : s * log_lo);
  return b;
}

SumBracket cylinder_sum_bracket(const System& system, const PotentialFamily& family, const Word& w) {
  return cylinder_sum_bracket(system, family, QTWeights{1.0, 0.0, family.u()}, w);
}

}  // namespace mfa
