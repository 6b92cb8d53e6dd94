#include "pofin/dyadic_function.hpp"

#include <algorithm>
#include <limits>

#include "pofin/subsets.hpp"
#include "pofin/towers.hpp"

namespace pofin {

namespace {

void require(const Verdict3& v, const std::string& code, const std::string& what, long index) {
  if (v.is_true()) return;
  if (v.is_unknown()) throw CheckError("Unknown", what + " undecided at the precision cap", index);
  throw CheckError(code, what, index);
}

long two_sided_exponent(const PosValue& a, const PosValue& b, const NumCfg& cfg) {
  return std::max({0L, min_pow2_exponent(a, b, cfg), min_pow2_exponent(b, a, cfg)});
}

long ceil_log2(const Rational& q) { return min_pow2_exponent(PosValue::exact(q), PosValue()); }

}  // namespace

DyadicFunction::DyadicFunction(std::vector<NonNeg> samples, Interp interp)
    : samples_(std::move(samples)), interp_(interp) {
  if (depth() < 8) throw CheckError("InvalidDepth", "a dyadic function needs depth >= 8");
}

const NonNeg& DyadicFunction::at(long n) const {
  if (n < 0 || n > depth()) throw std::out_of_range("grid index " + std::to_string(n) + " past depth");
  return samples_[static_cast<size_t>(n)];
}

DyadicFunction DyadicFunction::truncated(long d) const {
  if (d > depth()) throw std::out_of_range("cannot extend by truncation");
  return DyadicFunction(std::vector<NonNeg>(samples_.begin(), samples_.begin() + d + 1), interp_);
}

DyadicFunction from_weight(const WeightSeq& w, long depth) {
  std::vector<NonNeg> s;
  s.reserve(static_cast<size_t>(depth) + 1);
  for (long n = 0; n <= depth; ++n) s.emplace_back(w.at(n));
  return DyadicFunction(std::move(s), Interp::MonotoneJoin);
}

DyadicFunction dyadic_product(const DyadicFunction& a, const DyadicFunction& b, long prec) {
  long d = std::min(a.depth(), b.depth());
  std::vector<NonNeg> s;
  s.reserve(static_cast<size_t>(d) + 1);
  for (long n = 0; n <= d; ++n) s.push_back(nn_mul(a.at(n), b.at(n), prec));
  return DyadicFunction(std::move(s), a.interp());
}

DyadicFunction builtin_function(const std::string& name, long depth, const BuiltinContext& ctx, long prec) {
  auto colon = name.find(':');
  if (colon == std::string::npos) throw CheckError("ParseError", "builtin needs kind:arg, got '" + name + "'");
  std::string kind = name.substr(0, colon), arg = name.substr(colon + 1);
  std::vector<NonNeg> s;
  s.reserve(static_cast<size_t>(depth) + 1);
  auto fill = [&](auto&& at) {
    for (long n = 0; n <= depth; ++n) s.push_back(at(n));
  };
  if (kind == "const") {
    Rational q = parse_rational(arg);
    if (q < 0) throw CheckError("ParseError", "negative constant");
    fill([&](long) { return NonNeg::from_rational(q); });
  } else if (kind == "idpow" || kind == "pow2") {
    Rational r = parse_rational(arg);
    if (kind == "idpow") r = -r;
    fill([&](long n) { return NonNeg(pv_exp2_rat(r * n, prec)); });
  } else if (kind == "inv_t") {
    long j = std::stol(arg);
    fill([&](long n) { return NonNeg(pv_inv(tower_t(j, TowerNat::of(BigInt(n)), prec))); });
  } else if (kind == "inv_l" || kind == "inv_lp") {
    EtaSpec eta = EtaSpec::parse(arg);
    bool prime = kind == "inv_lp";
    fill([&](long n) {
      TowerNat N = TowerNat::of(BigInt(n));
      return NonNeg(pv_inv(prime ? l_eta_prime(eta, N, prec) : l_eta(eta, N, prec)));
    });
  } else if (kind == "weight") {
    if (!ctx.scale) throw CheckError("ParseError", "weight builtin needs a scale system");
    return from_weight(weight_seq(SubsetSpec::parse(arg), *ctx.scale, depth, WindowPolicy::Strict, prec), depth);
  } else {
    throw CheckError("ParseError", "unknown builtin '" + kind + "'");
  }
  return DyadicFunction(std::move(s));
}

Rational EquivCert::C() const { return PosValue::pow2(BigInt(exponent)).exact_value(); }

EssIncrResult ess_incr_witness(const DyadicFunction& v, const NumCfg& cfg) {
  long d = v.depth();
  std::optional<long> first_zero;
  for (long n = 0; n <= d; ++n) {
    if (v.at(n).is_zero()) {
      if (!first_zero) first_zero = n;
    } else if (first_zero) {
      throw CheckError("ZeroValue", "zero sample followed by a positive one at n=" + std::to_string(n), *first_zero);
    }
  }
  long last = first_zero ? *first_zero - 1 : d;

  long exponent = 0, worst_n = 0, worst_m = 0;
  PosValue pmin;
  long pmin_idx = 0;
  for (long n = 0; n <= last; ++n) {
    const PosValue& x = v.at(n).value();
    if (n == 0) {
      pmin = x;
    } else if (pv_lt(x, pmin, cfg).is_true()) {
      pmin = x;
      pmin_idx = n;
    } else if (!pv_le(pmin, x, cfg).is_true()) {
      pmin = pv_min(pmin, x, cfg.prec);
    }
    long e = min_pow2_exponent(x, pmin, cfg);
    if (e > exponent) {
      exponent = e;
      worst_n = n;
      worst_m = pmin_idx;
    }
  }
  if (exponent > cfg.cap_c) return EssIncrViolation{worst_m, worst_n};

  std::vector<NonNeg> maj(static_cast<size_t>(d) + 1);
  for (long n = last; n >= 0; --n) {
    const PosValue& x = v.at(n).value();
    if (n == last) {
      maj[static_cast<size_t>(n)] = x;
    } else {
      const PosValue& prev = maj[static_cast<size_t>(n) + 1].value();
      maj[static_cast<size_t>(n)] = pv_le(prev, x, cfg).is_true() ? x
                                    : pv_le(x, prev, cfg).is_true() ? prev
                                                                    : pv_max(x, prev, cfg.prec);
    }
  }
  return EssIncrWitness{exponent, std::move(maj)};
}

EquivResult equiv_witness(const DyadicFunction& f, const DyadicFunction& g, long n_lo, long n_hi,
                          const NumCfg& cfg) {
  if (n_lo < 0 || n_hi < n_lo || n_hi > std::min(f.depth(), g.depth())) {
    throw std::out_of_range("equivalence range outside both grids");
  }
  std::vector<long> e(static_cast<size_t>(n_hi - n_lo) + 1, 0);
  long exponent = 0;
  for (long n = n_lo; n <= n_hi; ++n) {
    bool fz = f.at(n).is_zero(), gz = g.at(n).is_zero();
    if (fz != gz) throw CheckError("MixedZero", "exactly one side vanishes", n);
    if (fz) continue;
    long en = two_sided_exponent(f.at(n).value(), g.at(n).value(), cfg);
    e[static_cast<size_t>(n - n_lo)] = en;
    exponent = std::max(exponent, en);
  }
  if (exponent <= cfg.cap_c) return EquivCert{exponent, n_lo, n_hi};
  EquivDivergence div;
  for (long j = 0; j <= cfg.cap_c; ++j) {
    for (long n = n_lo; n <= n_hi; ++n) {
      if (e[static_cast<size_t>(n - n_lo)] > j) {
        div.escapes.emplace_back(j, n);
        break;
      }
    }
  }
  return div;
}

EquivCheck check_equiv_cert(const EquivCert& c, const DyadicFunction& f, const DyadicFunction& g,
                            const NumCfg& cfg) {
  if (c.n_lo < 0 || c.n_hi < c.n_lo || c.n_hi > std::min(f.depth(), g.depth()) || c.exponent < 0) {
    return {Verdict3{Cert::False}, c.n_lo};
  }
  Rational C = c.C();
  EquivCheck out{Verdict3{Cert::True}, -1};
  for (long n = c.n_lo; n <= c.n_hi; ++n) {
    bool fz = f.at(n).is_zero(), gz = g.at(n).is_zero();
    if (fz != gz) return {Verdict3{Cert::False}, n};
    if (fz) continue;
    for (auto v : {pv_cmp_scaled(f.at(n).value(), C, g.at(n).value(), cfg),
                   pv_cmp_scaled(g.at(n).value(), C, f.at(n).value(), cfg)}) {
      if (v.is_false()) return {v, n};
      if (v.is_unknown() && out.verdict.is_true()) out = {v, n};
    }
  }
  return out;
}

BridgeReport step_bridge_check(const DyadicFunction& f, const DyadicFunction& g, const std::vector<long>& xseq,
                               const Rational& delta, const Rational& K, const NumCfg& cfg) {
  long d = std::min(f.depth(), g.depth());
  if (xseq.empty() || xseq.front() != 0 || xseq.back() != d) {
    throw CheckError("HypothesisFailed", "xseq must start at 0 and end at depth");
  }
  if (delta <= 0 || delta > 1 || K < 1) throw CheckError("HypothesisFailed", "need 0 < delta <= 1 and K >= 1");
  for (size_t i = 1; i < xseq.size(); ++i) {
    if (xseq[i] <= xseq[i - 1]) throw CheckError("HypothesisFailed", "xseq not increasing", xseq[i]);
  }
  for (long n = 0; n <= d; ++n) {
    if (f.at(n).is_zero() || g.at(n).is_zero()) throw CheckError("HypothesisFailed", "positivity", n);
  }

  auto ess = ess_incr_witness(f.truncated(d), cfg);
  if (auto* v = std::get_if<EssIncrViolation>(&ess)) {
    throw CheckError("HypothesisFailed", "f is not essentially increasing", v->n);
  }
  long c1 = std::get<EssIncrWitness>(ess).exponent;
  for (long x : xseq) c1 = std::max(c1, two_sided_exponent(f.at(x).value(), g.at(x).value(), cfg));

  Rational inv_delta = 1 / delta;
  for (size_t i = 0; i + 1 < xseq.size(); ++i) {
    long a = xseq[i], b = xseq[i + 1];
    require(pv_cmp_scaled(f.at(a).value(), inv_delta, f.at(b).value(), cfg), "HypothesisFailed", "delta-step", b);
    const PosValue &ga = g.at(a).value(), &gb = g.at(b).value();
    for (long n = a + 1; n < b; ++n) {
      const PosValue& x = g.at(n).value();
      require(pv_cmp_scaled(pv_min(ga, gb, cfg.prec), K, x, cfg), "HypothesisFailed", "K-sandwich", n);
      require(pv_cmp_scaled(x, K, pv_max(ga, gb, cfg.prec), cfg), "HypothesisFailed", "K-sandwich", n);
    }
  }

  Rational C1 = PosValue::pow2(BigInt(c1)).exact_value();
  Rational K2C12 = K * K * C1 * C1;
  BridgeReport r;
  r.c1_exponent = c1;
  r.c2 = std::max<Rational>(K2C12 * C1, K2C12 / delta);
  r.assembled = C1 * C1 * r.c2 / delta;
  r.cert = EquivCert{ceil_log2(r.assembled), 0, d};
  auto direct = equiv_witness(f, g, 0, d, NumCfg{cfg.prec, cfg.prec_cap, std::numeric_limits<long>::max()});
  r.direct_exponent = std::get<EquivCert>(direct).exponent;
  return r;
}

SquareReport square_invariance_check(const DyadicFunction& phi, const Rational& lambda, const NumCfg& cfg) {
  if (lambda <= 0) throw CheckError("HypothesisFailed", "lambda must be positive");
  if (phi.at(1).is_zero()) throw CheckError("HypothesisFailed", "phi(1/2) must be positive", 1);
  long d = phi.depth();
  auto ess = ess_incr_witness(phi, cfg);
  if (auto* v = std::get_if<EssIncrViolation>(&ess)) {
    throw CheckError("HypothesisFailed", "phi is not essentially increasing", v->n);
  }
  const auto& w = std::get<EssIncrWitness>(ess);

  SquareReport r;
  r.k_exponent = w.exponent;
  long top = d / 2;
  long exponent = 0;
  for (long n = 1; n <= top; ++n) {
    const NonNeg &a = phi.at(n), &b = phi.at(2 * n);
    if (b.is_zero()) throw CheckError("HypothesisFailed", "square-scale", n);
    require(pv_cmp_scaled(a.value(), 1 / lambda, b.value(), cfg), "HypothesisFailed", "square-scale", n);
    exponent = std::max(exponent, two_sided_exponent(a.value(), b.value(), cfg));
  }
  r.cert = EquivCert{exponent, 0, top};

  Rational K = PosValue::pow2(BigInt(w.exponent)).exact_value();
  PosValue lhs = pv_mul(w.majorant[0].value(), PosValue::exact(K * K), cfg.prec);
  long e1 = min_pow2_exponent(lhs, w.majorant[2].value(), cfg);
  Rational k6 = K * K * K * K * K * K;
  r.proof_exponent = std::max(e1, ceil_log2(k6 / (lambda * lambda)));
  return r;
}

}  // namespace pofin
