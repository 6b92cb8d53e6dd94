#include "pofin/relation_checks.hpp"

#include <algorithm>
#include <limits>

namespace pofin {

namespace {

DyadicFunction weighted(const DyadicFunction& env, const std::optional<WeightSeq>& w, long prec) {
  if (!w) return env;
  return dyadic_product(env, from_weight(*w, std::min(env.depth(), w->depth())), prec);
}

Rational pow2q(long e) { return PosValue::pow2(BigInt(e)).exact_value(); }

PosValue scaled(const PosValue& v, const Rational& q, long prec) { return pv_mul(v, PosValue::exact(q), prec); }

}  // namespace

RelationSpec::RelationSpec(Rational alpha, DyadicFunction envelope, std::optional<WeightSeq> weight,
                           const NumCfg& cfg)
    : alpha_(std::move(alpha)),
      envelope_(std::move(envelope)),
      weight_(std::move(weight)),
      psi_(weighted(envelope_, weight_, cfg.prec)) {
  if (alpha_ < 1) throw CheckError("InvalidInput", "alpha must be >= 1");
  auto ess = ess_incr_witness(psi_, cfg);
  if (auto* v = std::get_if<EssIncrViolation>(&ess)) {
    throw CheckError("HypothesisFailed", "envelope is not essentially increasing", v->n);
  }
  auto& w = std::get<EssIncrWitness>(ess);
  k_exponent_ = w.exponent;
  majorant_ = std::move(w.majorant);
  if (psi_.at(1).is_zero()) throw CheckError("HypothesisFailed", "psi(1/2) must be positive", 1);
}

PosValue RelationSpec::f(long n, long prec) const {
  const NonNeg& p = psi_.at(n);
  if (p.is_zero()) throw CheckError("ZeroValue", "psi vanishes on the grid", n);
  return pv_mul(pv_exp2_rat(-alpha_ * n, prec), p.value(), prec);
}

R2Report check_R1_R2(const RelationSpec& r, long depth, std::optional<Rational> delta, const NumCfg& cfg) {
  if (depth > r.depth()) throw std::out_of_range("depth past the relation grid");
  const long prec = cfg.prec;
  R2Report rep;
  rep.depth = depth;
  // f(0) = 0: psi is bounded by K psi(1) on the grid and x^alpha -> 0.
  rep.r1 = r.alpha() > 0;

  Rational K = pow2q(r.k_exponent());
  std::vector<PosValue> f(static_cast<size_t>(depth) + 1);
  for (long n = 0; n <= depth; ++n) f[static_cast<size_t>(n)] = r.f(n, prec);
  const auto& psi = r.psi();

  long worst = 0;
  auto note = [&](long e, long a, long b) {
    if (e > worst) {
      worst = e;
      rep.worst_a = a;
      rep.worst_b = b;
    }
  };
  for (long a = 1; a <= depth; ++a) {
    for (long b = a; b <= depth; ++b) {
      const PosValue &fa = f[static_cast<size_t>(a)], &fb = f[static_cast<size_t>(b)];
      PosValue hi, lo;
      if (a == b) {
        hi = lo = f[static_cast<size_t>(a - 1)];
      } else {
        // x + y lies strictly between 1/2^a and 1/2^(a-1).
        Rational s = Rational(1) / pow2q(a) + Rational(1) / pow2q(b);
        s.canonicalize();
        PosValue sa = pv_pow_rat(PosValue::exact(s), r.alpha(), prec);
        hi = pv_mul(sa, scaled(psi.at(a - 1).value(), K, prec), prec);
        lo = pv_mul(sa, scaled(psi.at(a).value(), 1 / K, prec), prec);
      }
      note(min_pow2_exponent(hi, pv_add(fa, fb, prec), cfg), a, b);
      note(min_pow2_exponent(fa, pv_add(lo, fb, prec), cfg), a, b);
      note(min_pow2_exponent(fb, pv_add(lo, fa, prec), cfg), a, b);
    }
  }
  rep.exponent = worst;
  rep.pass = rep.r1 && worst <= cfg.cap_c;

  if (delta && depth >= 3) {
    const auto& maj = r.majorant();
    Rational eight_alpha_log = 3 * r.alpha();
    PosValue g_ratio = pv_mul(pv_exp2_rat(eight_alpha_log, prec), pv_div(maj[0].value(), maj[3].value(), prec), prec);
    long e1 = min_pow2_exponent(g_ratio, PosValue(), cfg);
    PosValue second = pv_mul(pv_exp2_rat(2 * r.alpha(), prec), PosValue::exact(K * K / *delta), prec);
    long e2 = min_pow2_exponent(second, PosValue(), cfg);
    rep.proof_exponent = std::max({0L, e1, e2});
  }
  return rep;
}

A1Cert check_A1(const RelationSpec& r, long depth, std::optional<Rational> delta, const NumCfg& cfg) {
  if (depth > r.depth()) throw std::out_of_range("depth past the relation grid");
  const auto& psi = r.psi();
  for (long n = 0; n <= depth; ++n) {
    if (psi.at(n).is_zero()) throw CheckError("HypothesisFailed", "psi must be positive on the grid", n);
  }
  auto val = [&](long n) -> const PosValue& { return psi.at(n).value(); };

  if (delta) {
    if (*delta <= 0) throw CheckError("HypothesisFailed", "delta must be positive");
    for (long n = 1; 2 * n <= depth; ++n) {
      auto v = pv_cmp_scaled(val(n), 1 / *delta, val(2 * n), cfg);
      if (v.is_unknown()) throw CheckError("Unknown", "square-scale undecided", n);
      if (v.is_false()) throw CheckError("HypothesisFailed", "square-scale", n);
    }
  } else {
    long j = 0;
    for (long n = 1; 2 * n <= depth; ++n) {
      long e = min_pow2_exponent(val(n), val(2 * n), cfg);
      if (e > cfg.cap_c) throw CheckError("HypothesisFailed", "square-scale", n);
      j = std::max(j, e);
    }
    delta = 1 / pow2q(j);
  }

  A1Cert c;
  c.K = pow2q(r.k_exponent());
  c.delta = *delta;
  c.n_hi = depth;
  const PosValue& psi1 = r.majorant()[0].value();
  Rational K4 = c.K * c.K * c.K * c.K;
  PosValue b1 = pv_inv(scaled(psi1, 2, cfg.prec));
  PosValue b2 = pv_div(PosValue::exact(c.delta * c.delta / (2 * K4)), psi1, cfg.prec);
  long j = -min_pow2_exponent(pv_min(b1, b2, cfg.prec), PosValue(), cfg) - 1;
  for (;; ++j) {
    PosValue e = PosValue::pow2(BigInt(-j));
    if (pv_lt(e, b1, cfg).is_true() && pv_lt(e, b2, cfg).is_true()) break;
    if (j > cfg.cap_c + 4 * r.k_exponent() + 2 * cfg.cap_c) throw CheckError("Unknown", "epsilon search exhausted");
  }
  c.epsilon = 1 / pow2q(j);
  c.epsilon_psi = c.epsilon / (c.K * c.K * c.K);

  // psi(x) <= eps psi(y) psi(1/2^n) with x = 1/2^a, y = 1/2^b must force a > b + n,
  // i.e. min_{a <= b+n} psi(1/2^a) > eps psi(1/2^b) psi(1/2^n).
  std::vector<PosValue> pmin(static_cast<size_t>(depth) + 1);
  std::vector<long> pidx(static_cast<size_t>(depth) + 1);
  for (long n = 0; n <= depth; ++n) {
    if (n == 0 || pv_lt(val(n), pmin[static_cast<size_t>(n) - 1], cfg).is_true()) {
      pmin[static_cast<size_t>(n)] = val(n);
      pidx[static_cast<size_t>(n)] = n;
    } else {
      const PosValue& prev = pmin[static_cast<size_t>(n) - 1];
      pmin[static_cast<size_t>(n)] = pv_le(prev, val(n), cfg).is_true() ? prev : pv_min(prev, val(n), cfg.prec);
      pidx[static_cast<size_t>(n)] = pidx[static_cast<size_t>(n) - 1];
    }
  }
  for (long n = 2; n <= depth; ++n) {
    PosValue en = scaled(val(n), c.epsilon_psi, cfg.prec);
    for (long b = 0; b <= depth; ++b) {
      long top = std::min(b + n, depth);
      PosValue rhs = pv_mul(en, val(b), cfg.prec);
      auto v = pv_lt(rhs, pmin[static_cast<size_t>(top)], cfg);
      if (v.is_unknown()) throw CheckError("Unknown", "A1 implication undecided", n);
      if (v.is_false()) {
        throw CheckError("ImplicationFailed",
                         "a=" + std::to_string(pidx[static_cast<size_t>(top)]) + " b=" + std::to_string(b) +
                             " n=" + std::to_string(n),
                         n);
      }
    }
  }
  return c;
}

A2Result a2_liminf_witness(const DyadicFunction& num, const DyadicFunction& den, const std::vector<long>& idxseq,
                           const std::vector<PosValue>& bound, const NumCfg& cfg) {
  A2Result res;
  long d = std::min(num.depth(), den.depth());
  if (idxseq.empty() || idxseq.size() != bound.size()) {
    res.outcome = A2Result::Outcome::InvalidBound;
    return res;
  }
  for (size_t l = 0; l < idxseq.size(); ++l) {
    if (idxseq[l] < 0 || idxseq[l] > d || (l > 0 && idxseq[l] <= idxseq[l - 1])) {
      throw std::out_of_range("index sequence must increase within depth");
    }
    if (l > 0 && !pv_lt(bound[l], bound[l - 1], cfg).is_true()) {
      res.outcome = A2Result::Outcome::InvalidBound;
      res.l = static_cast<long>(l);
      return res;
    }
  }
  if (!pv_lt(bound.back(), PosValue(), cfg).is_true()) {
    res.outcome = A2Result::Outcome::InvalidBound;
    res.l = static_cast<long>(bound.size()) - 1;
    return res;
  }

  std::vector<std::optional<PosValue>> ratio;
  for (long i : idxseq) {
    if (den.at(i).is_zero()) throw CheckError("ZeroValue", "denominator vanishes", i);
    if (num.at(i).is_zero()) {
      ratio.emplace_back();
      res.ratio_log2_hi.push_back(std::numeric_limits<long>::min());
    } else {
      ratio.emplace_back(pv_div(num.at(i).value(), den.at(i).value(), cfg.prec));
      res.ratio_log2_hi.push_back(min_pow2_exponent(*ratio.back(), PosValue(), cfg));
    }
  }
  if (ratio.back() && !pv_lt(*ratio.back(), PosValue(), cfg).is_true()) {
    res.outcome = A2Result::Outcome::NoWitness;
    return res;
  }
  for (size_t l = 0; l < ratio.size(); ++l) {
    if (ratio[l] && !pv_le(*ratio[l], bound[l], cfg).is_true()) {
      res.outcome = A2Result::Outcome::BoundViolated;
      res.l = static_cast<long>(l);
      return res;
    }
  }
  res.outcome = A2Result::Outcome::Verified;
  return res;
}

std::string a2_outcome_str(A2Result::Outcome o) {
  switch (o) {
    case A2Result::Outcome::Verified:
      return "Verified";
    case A2Result::Outcome::NoWitness:
      return "NoWitness";
    case A2Result::Outcome::BoundViolated:
      return "BoundViolated";
    case A2Result::Outcome::InvalidBound:
      return "InvalidBound";
  }
  return "?";
}

}  // namespace pofin
