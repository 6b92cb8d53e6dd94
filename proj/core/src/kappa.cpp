#include <algorithm>

#include "pofin/reduction_engine.hpp"

namespace pofin {

namespace {

PosValue exact_pv(const Rational& q) { return PosValue::exact(q); }

Rational pow2q(long e) { return PosValue::pow2(BigInt(e)).exact_value(); }

bool in_ratio_window(const PosValue& a, const PosValue& b, const Rational& eps, const NumCfg& cfg) {
  // a / b in [1 - eps, 1 + eps]
  return pv_cmp_scaled(a, 1 + eps, b, cfg).is_true() && pv_cmp_scaled(b, 1 / (1 - eps), a, cfg).is_true();
}

std::vector<PosValue> flattened(const DyadicFunction& psi, long n0, long depth) {
  std::vector<PosValue> out;
  out.reserve(static_cast<size_t>(depth) + 1);
  for (long n = 0; n <= depth; ++n) out.push_back(psi.at(std::max(n, n0)).value());
  return out;
}

long ess_exponent(const std::vector<PosValue>& v, const NumCfg& cfg) {
  std::vector<NonNeg> s(v.begin(), v.end());
  auto r = ess_incr_witness(DyadicFunction(std::move(s)), cfg);
  if (auto* bad = std::get_if<EssIncrViolation>(&r)) {
    throw CheckError("HypothesisFailed", "flattened envelope is not essentially increasing", bad->n);
  }
  return std::get<EssIncrWitness>(r).exponent;
}

// C psi_flat(D) / M * 2^(-(D+1) alpha) / (1 - 2^-alpha): bounds sum_{i > D} g(1/2^i).
PosValue kappa_tail(const std::vector<PosValue>& g_flat, long c_exp, const Rational& alpha, long prec) {
  long d = static_cast<long>(g_flat.size()) - 1;
  PosValue geo = pv_exp2_rat(-alpha * (d + 1), prec);
  SubResult denom = pv_sub(PosValue(), pv_exp2_rat(-alpha, prec), prec);
  PosValue t = pv_mul(geo, pv_mul(g_flat.back(), PosValue::pow2(BigInt(c_exp)), prec), prec);
  return pv_div(t, *denom.value, prec);
}

}  // namespace

std::vector<PosValue> kappa_target(const KappaCert& cert, const RelationSpec& from, long prec) {
  if (cert.depth > from.depth()) throw CheckError("SchemaMismatch", "certificate deeper than the relation grid");
  if (cert.n0 < 0 || cert.n0 > cert.depth) throw CheckError("SchemaMismatch", "n0 outside the grid");
  for (long n = 0; n <= cert.depth; ++n) {
    if (from.psi().at(n).is_zero()) throw CheckError("ZeroValue", "envelope vanishes", n);
  }
  auto flat = flattened(from.psi(), cert.n0, cert.depth);
  std::vector<PosValue> g;
  g.reserve(flat.size());
  for (long n = 0; n <= cert.depth; ++n) {
    g.push_back(pv_div(pv_mul(pv_exp2_rat(-from.alpha() * n, prec), flat[static_cast<size_t>(n)], prec),
                       cert.normalizer, prec));
  }
  return g;
}

KappaCert solve_kappa_closed(const RelationSpec& from, const Rational& beta, long depth, const NumCfg& cfg) {
  const Rational& alpha = from.alpha();
  if (beta <= alpha) throw CheckError("InvalidInput", "beta must exceed alpha");
  if (depth > from.depth()) throw std::out_of_range("depth past the relation grid");
  const long prec = cfg.prec;
  const auto& psi = from.psi();
  for (long n = 0; n <= depth; ++n) {
    if (psi.at(n).is_zero()) throw CheckError("ZeroValue", "envelope vanishes", n);
  }
  auto val = [&](long n) -> const PosValue& { return psi.at(n).value(); };

  KappaCert c;
  c.alpha = alpha;
  c.beta = beta;
  c.depth = depth;
  // eps: largest 2^-j below min{1, 2^(beta-alpha) - 1}
  PosValue inv_lambda = pv_exp2_rat(beta - alpha, prec);
  long j = 1;
  while (!pv_lt(exact_pv(1 + Rational(1) / pow2q(j)), inv_lambda, cfg).is_true()) {
    if (++j > cfg.cap_c) throw CheckError("Unknown", "no epsilon below 1/lambda - 1 within the cap");
  }
  c.epsilon = Rational(1) / pow2q(j);

  long last_bad = -1;
  for (long n = 0; n < depth; ++n) {
    if (!in_ratio_window(val(n), val(n + 1), c.epsilon, cfg)) last_bad = n;
  }
  c.n0 = last_bad + 1;
  PosValue lambda = pv_inv(inv_lambda);
  if (c.n0 >= depth) {
    for (long n = 1; n <= depth; ++n) {
      SubResult r = pv_sub(val(n), pv_mul(lambda, val(n - 1), prec), prec);
      if (r.sign != SubSign::Positive) throw CheckError("NegativeRadicand", "envelope drops too fast", n);
    }
    throw CheckError("NoN0Found", "consecutive ratios never settle near 1 within depth");
  }

  auto flat = flattened(psi, c.n0, depth);
  c.c_ess_exponent = ess_exponent(flat, cfg);
  PosValue maj0 = flat[0];
  for (const auto& v : flat) maj0 = pv_max(maj0, v, prec);
  c.normalizer = pv_le(maj0, PosValue(), cfg).is_true() ? PosValue() : maj0;

  std::vector<PosValue> g;
  for (long n = 0; n <= depth; ++n) {
    g.push_back(pv_div(pv_mul(pv_exp2_rat(-alpha * n, prec), flat[static_cast<size_t>(n)], prec), c.normalizer, prec));
  }
  PosValue two_beta = pv_exp2_rat(beta, prec);
  Rational inv_beta = 1 / beta;
  c.kappa.reserve(static_cast<size_t>(depth) + 1);
  std::vector<PosValue> kb;  // kappa^beta
  for (long n = 0; n <= depth; ++n) {
    PosValue rad;
    if (n == 0) {
      rad = g[0];
    } else {
      SubResult r = pv_sub(g[static_cast<size_t>(n)], pv_div(g[static_cast<size_t>(n) - 1], two_beta, prec), prec);
      if (r.sign == SubSign::Unknown) throw CheckError("Unknown", "radicand sign undecided", n);
      if (r.sign != SubSign::Positive) throw CheckError("NegativeRadicand", "radicand is not positive", n);
      rad = *r.value;
    }
    kb.push_back(rad);
    c.kappa.push_back(pv_pow_rat(rad, inv_beta, prec));
  }

  // (ii): truncated suffix sum plus geometric tail against the reconstruction g.
  long need = 0;
  PosValue suffix = kappa_tail(g, c.c_ess_exponent, alpha, prec);
  for (long n = depth; n >= 0; --n) {
    suffix = pv_add(suffix, kb[static_cast<size_t>(n)], prec);
    need = std::max(need, min_pow2_exponent(suffix, g[static_cast<size_t>(n)], cfg));
  }
  // (iii) on the grid.
  PosValue run = c.kappa[0];
  for (long n = 1; n <= depth; ++n) {
    run = pv_div(run, PosValue::exact(2), prec);
    need = std::max(need, min_pow2_exponent(c.kappa[static_cast<size_t>(n)], run, cfg));
    run = pv_max(run, c.kappa[static_cast<size_t>(n)], prec);
  }
  c.L_exponent = need;

  // 2 [(1 - lambda(1-eps)) / (2 (1-eps) (1 - lambda(1+eps)))]^(1/beta)
  SubResult num = pv_sub(PosValue(), pv_mul(lambda, exact_pv(1 - c.epsilon), prec), prec);
  SubResult den = pv_sub(PosValue(), pv_mul(lambda, exact_pv(1 + c.epsilon), prec), prec);
  if (num.sign == SubSign::Positive && den.sign == SubSign::Positive) {
    PosValue q = pv_div(*num.value, pv_mul(*den.value, exact_pv(2 * (1 - c.epsilon)), prec), prec);
    c.proof_L3_exponent = min_pow2_exponent(pv_mul(PosValue::exact(2), pv_pow_rat(q, inv_beta, prec), prec),
                                            PosValue(), cfg);
  }
  return c;
}

Verdict verify_kappa_cert(const KappaCert& cert, const RelationSpec& from, const NumCfg& cfg) {
  const long prec = cfg.prec;
  const long d = cert.depth;
  if (static_cast<long>(cert.kappa.size()) != d + 1) throw CheckError("SchemaMismatch", "kappa length != depth + 1");
  if (cert.alpha != from.alpha() || cert.beta <= cert.alpha) throw CheckError("SchemaMismatch", "alpha/beta mismatch");
  auto g = kappa_target(cert, from, prec);
  auto fail = [](std::string code, long n, std::string detail) { return Verdict{false, std::move(code), n, std::move(detail)}; };

  std::vector<PosValue> kb;
  kb.reserve(cert.kappa.size());
  for (const auto& k : cert.kappa) kb.push_back(pv_pow_rat(k, cert.beta, prec));

  // reconstruction: g(1/2^n) = 2^(-n beta) sum_{i<=n} kappa_i^beta 2^(i beta)
  std::vector<PosValue> recon;
  PosValue acc;
  for (long n = 0; n <= d; ++n) {
    PosValue term = pv_mul(kb[static_cast<size_t>(n)], pv_exp2_rat(cert.beta * n, prec), prec);
    acc = n == 0 ? term : pv_add(acc, term, prec);
    PosValue r = pv_mul(acc, pv_exp2_rat(-cert.beta * n, prec), prec);
    const PosValue& t = g[static_cast<size_t>(n)];
    if (pv_lt(r, t, cfg).is_true() || pv_lt(t, r, cfg).is_true()) {
      return fail("ReconstructFailed", n, "sum " + r.str() + " vs target " + t.str());
    }
    recon.push_back(r);
  }

  // pointwise kappa^beta <= g justifies the tail; then truncation + tail.
  for (long n = 0; n <= d; ++n) {
    auto v = pv_le(kb[static_cast<size_t>(n)], g[static_cast<size_t>(n)], cfg);
    if (v.is_unknown()) return fail("Unknown", n, "pointwise tail bound undecided");
    if (v.is_false()) return fail("TailBoundFailed", n, "kappa^beta exceeds g");
  }
  auto flat = flattened(from.psi(), cert.n0, d);
  long c_exp = ess_exponent(flat, cfg);
  std::vector<PosValue> gflat;
  for (long n = 0; n <= d; ++n) gflat.push_back(pv_div(flat[static_cast<size_t>(n)], cert.normalizer, prec));
  Rational L = pow2q(cert.L_exponent);
  std::vector<PosValue> suffix(static_cast<size_t>(d) + 1);
  PosValue s = kappa_tail(gflat, c_exp, cert.alpha, prec);
  for (long n = d; n >= 0; --n) {
    s = pv_add(s, kb[static_cast<size_t>(n)], prec);
    suffix[static_cast<size_t>(n)] = s;
  }
  for (long n = 0; n <= d; ++n) {
    auto v = pv_cmp_scaled(suffix[static_cast<size_t>(n)], L, recon[static_cast<size_t>(n)], cfg);
    if (v.is_unknown()) return fail("Unknown", n, "tail inequality undecided");
    if (v.is_false()) return fail("TailBoundFailed", n, "suffix sum exceeds L times the reconstruction");
  }

  // kappa(1/2^n) <= L max_{i<n} kappa(1/2^i) / 2
  PosValue run = cert.kappa[0];
  for (long n = 1; n <= d; ++n) {
    run = pv_div(run, PosValue::exact(2), prec);
    auto v = pv_cmp_scaled(cert.kappa[static_cast<size_t>(n)], L, run, cfg);
    if (v.is_unknown()) return fail("Unknown", n, "max bound undecided");
    if (v.is_false()) return fail("MaxBoundFailed", n, "kappa exceeds L times the shifted running max");
    run = pv_max(run, cert.kappa[static_cast<size_t>(n)], prec);
  }
  return {};
}

}  // namespace pofin
