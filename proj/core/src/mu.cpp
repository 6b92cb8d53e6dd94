#include <algorithm>
#include <map>
#include <tuple>

#include "pofin/reduction_engine.hpp"

namespace pofin {

namespace {

Rational pow2q(long e) { return PosValue::pow2(BigInt(e)).exact_value(); }

long ceil_log2(const Rational& q) { return min_pow2_exponent(PosValue::exact(q), PosValue()); }

bool certified_equal(const NonNeg& a, const NonNeg& b, const NumCfg& cfg) {
  if (a.is_zero() || b.is_zero()) return a.is_zero() == b.is_zero();
  if (a.identical(b)) return true;
  return !pv_lt(a.value(), b.value(), cfg).is_true() && !pv_lt(b.value(), a.value(), cfg).is_true();
}

// psi(v / 2^n) lies in [psi(1/2^(n+sl)) / f, f psi(1/2^(n+sh))], f = 1 or C.
struct Bracket {
  long sl = 0;
  long sh = 0;
  bool exact = false;
  auto key() const { return std::tie(sl, sh, exact); }
  bool operator<(const Bracket& o) const { return key() < o.key(); }
};

Bracket bracket_of(const PosValue& v, long prec) {
  if (v.is_exact()) {
    const Rational& q = v.exact_value();
    if (auto d = BigDyadic::from_rational_exact(q); d && d->mantissa() == 1) {
      long t = d->exponent().get_si();
      return {-t, -t, true};
    }
  }
  Interval lv = v.log2(prec);
  long f_lo = lv.lo.floor().get_si(), f_hi = lv.hi.floor().get_si();
  return {-f_lo, -f_hi - 1, false};
}

DyadicFunction psi_of(const DyadicFunction& phi, const WeightSeq& wV, long depth, long prec) {
  return dyadic_product(phi.truncated(depth), from_weight(wV, depth), prec);
}

long ess_exponent(const DyadicFunction& f, const NumCfg& cfg) {
  auto r = ess_incr_witness(f, cfg);
  if (auto* bad = std::get_if<EssIncrViolation>(&r)) {
    throw CheckError("HypothesisFailed", "phi * u_V is not essentially increasing", bad->n);
  }
  return std::get<EssIncrWitness>(r).exponent;
}

Rational lower_M(const ScaleSystem& s) {
  // mu^alpha >= 1/Delta - 1 gives mu >= min{1, 1/Delta - 1} for alpha >= 1.
  Rational d = s.delta_sup();
  Rational m = d / (1 - d);
  return m < 1 ? Rational(1) : m;
}

std::vector<NonNeg> powers(const std::vector<NonNeg>& v, const Rational& alpha, long prec) {
  std::vector<NonNeg> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.is_zero() ? NonNeg() : NonNeg(pv_pow_rat(x.value(), alpha, prec)));
  return out;
}

// Needed exponent for psi(n) sum_{i<=n} nu^alpha against phi u_U, first n above `limit`.
struct Need {
  long exponent = 0;
  long first_over = -1;
};

Need ca_need(const DyadicFunction& psi, const std::vector<NonNeg>& nu_a, const DyadicFunction& phi,
             const WeightSeq& wU, long depth, std::optional<long> limit, const NumCfg& cfg) {
  Need need;
  NonNeg acc;
  for (long n = 0; n <= depth; ++n) {
    acc = nn_add(acc, nu_a[static_cast<size_t>(n)], cfg.prec);
    PosValue lhs = pv_mul(psi.at(n).value(), acc.value(), cfg.prec);
    PosValue rhs = pv_mul(phi.at(n).value(), wU.at(n), cfg.prec);
    long e = std::max({0L, min_pow2_exponent(lhs, rhs, cfg), min_pow2_exponent(rhs, lhs, cfg)});
    if (limit && e > *limit && need.first_over < 0) need.first_over = n;
    need.exponent = std::max(need.exponent, e);
  }
  return need;
}

struct SumBoundTerms {
  std::vector<PosValue> lhs;  // upper bounds, n <= top
  std::vector<PosValue> rhs;  // lower bounds
};

// LHS_n <= 2^(n alpha) sum_{j=n}^D nu_j^alpha 2^(-j alpha) psi_hi(nu_j / 2^j) + tail_n,
// RHS_n >= psi(1/2^n) sum_{i<=n} nu_i^alpha / K.
SumBoundTerms sum_bound_terms(const DyadicFunction& psi, const std::vector<NonNeg>& nu, const Rational& alpha, long c_exp,
                         long k_exp, long k_tail_exp, long top, const NumCfg& cfg) {
  const long prec = cfg.prec;
  const long d = psi.depth();
  auto nu_a = powers(nu, alpha, prec);
  PosValue C = PosValue::pow2(BigInt(c_exp));

  std::vector<NonNeg> suffix(static_cast<size_t>(d) + 2);
  for (long j = d; j >= 0; --j) {
    NonNeg term;
    if (!nu[static_cast<size_t>(j)].is_zero()) {
      Bracket b = bracket_of(nu[static_cast<size_t>(j)].value(), prec);
      long ch = std::clamp(j + b.sh, 0L, d);
      PosValue hi = psi.at(ch).value();
      if (!b.exact) hi = pv_mul(hi, C, prec);
      term = pv_mul(pv_mul(nu_a[static_cast<size_t>(j)].value(), pv_exp2_rat(-alpha * j, prec), prec), hi, prec);
    }
    suffix[static_cast<size_t>(j)] = nn_add(suffix[static_cast<size_t>(j) + 1], term, prec);
  }

  // tail: K_tail C psi(n) 2^(n alpha) 2^(-(D+1)(alpha-1/2)) / (1 - 2^-(alpha-1/2))
  Rational a_half = alpha - Rational(1, 2);
  SubResult geo_den = pv_sub(PosValue(), pv_exp2_rat(-a_half, prec), prec);
  PosValue tail_base = pv_div(pv_mul(pv_exp2_rat(-a_half * (d + 1), prec),
                                     PosValue::pow2(BigInt(k_tail_exp + c_exp)), prec),
                              *geo_den.value, prec);

  SumBoundTerms t;
  NonNeg acc;
  PosValue inv_k = PosValue::pow2(BigInt(-k_exp));
  for (long n = 0; n <= top; ++n) {
    acc = nn_add(acc, nu_a[static_cast<size_t>(n)], prec);
    PosValue scale = pv_exp2_rat(alpha * n, prec);
    PosValue tail = pv_mul(pv_mul(tail_base, psi.at(n).value(), prec), scale, prec);
    const NonNeg& sfx = suffix[static_cast<size_t>(n)];
    t.lhs.push_back(sfx.is_zero() ? tail : pv_add(pv_mul(sfx.value(), scale, prec), tail, prec));
    t.rhs.push_back(pv_mul(pv_mul(psi.at(n).value(), acc.value(), prec), inv_k, prec));
  }
  return t;
}

long max_growth_need(const std::vector<NonNeg>& nu, const NumCfg& cfg) {
  long need = 0;
  PosValue run = nu[0].value();
  for (size_t n = 1; n < nu.size(); ++n) {
    if (!nu[n].is_zero()) {
      need = std::max(need, min_pow2_exponent(nu[n].value(), run, cfg));
      run = pv_max(run, nu[n].value(), cfg.prec);
    }
  }
  return need;
}

}  // namespace

MuRaw build_mu(const WeightSeq& wU, const WeightSeq& wV, const Rational& alpha, long depth, const NumCfg& cfg) {
  if (alpha < 1) throw CheckError("InvalidInput", "alpha must be >= 1");
  if (depth > wU.depth() || depth > wV.depth()) throw std::out_of_range("depth past the weight sequences");
  const long prec = cfg.prec;
  MuRaw raw;
  raw.alpha = alpha;
  raw.mu.reserve(static_cast<size_t>(depth) + 1);
  Rational inv_alpha = 1 / alpha;
  long last_bad = -1;
  for (long n = 0; n <= depth; ++n) {
    raw.ratio.push_back(pv_div(wU.at(n), wV.at(n), prec));
    if (n == 0) {
      raw.mu.emplace_back(PosValue());
      raw.mu_alpha.emplace_back(PosValue());
      continue;
    }
    const PosValue &cur = raw.ratio.back(), &prev = raw.ratio[static_cast<size_t>(n) - 1];
    if (cur.identical(prev)) {
      raw.mu.emplace_back();
      raw.mu_alpha.emplace_back();
      continue;
    }
    SubResult d = pv_sub(cur, prev, prec);
    if (d.sign == SubSign::Negative) throw CheckError("NegativeDifference", "u_U/u_V decreases", n);
    if (d.sign == SubSign::Unknown) throw CheckError("Unknown", "sign of the ratio difference undecided", n);
    if (d.sign == SubSign::Zero) {
      raw.mu.emplace_back();
      raw.mu_alpha.emplace_back();
      continue;
    }
    raw.mu_alpha.emplace_back(*d.value);
    raw.mu.emplace_back(pv_pow_rat(*d.value, inv_alpha, prec));
    if (!pv_le(*d.value, pv_exp2_rat(Rational(n, 2), prec), cfg).is_true()) last_bad = n;
  }
  raw.n0 = last_bad + 1;
  return raw;
}

MuGrowthReport check_mu_growth(const MuRaw& raw, const ScaleSystem& s, const NumCfg& cfg) {
  const long prec = cfg.prec;
  Rational delta = s.delta_inf(), Delta = s.delta_sup();
  PosValue lower = PosValue::exact(1 / Delta - 1);
  Rational inv_delta = 1 / delta;
  auto e = BigDyadic::from_rational_exact(inv_delta);
  std::optional<long> int_exp;
  if (e && e->mantissa() == 1) int_exp = e->exponent().get_si();
  Interval le = log2_enclosure(inv_delta, prec);
  for (size_t n = 1; n < raw.mu_alpha.size(); ++n) {
    if (raw.mu_alpha[n].is_zero()) continue;
    const PosValue& v = raw.mu_alpha[n].value();
    if (!pv_le(lower, v, cfg).is_true()) return {false, static_cast<long>(n), "lower"};
    PosValue nb = PosValue::exact(static_cast<long>(n));
    PosValue pw = int_exp ? pv_pow_int(nb, BigInt(*int_exp), prec) : pv_pow_iv(nb, le, prec);
    PosValue upper = pv_mul(pw, PosValue::exact(1 - delta), prec);
    if (!pv_le(v, upper, cfg).is_true()) return {false, static_cast<long>(n), "upper"};
  }
  return {};
}

BandResult band_check(const DyadicFunction& psi, const std::vector<NonNeg>& mu, const Rational& eps, long n0,
                      const Rational& lambda, std::optional<Rational> lower, const NumCfg& cfg) {
  if (eps < 0 || eps >= 1) throw CheckError("InvalidInput", "band width must lie in [0,1)");
  const long prec = cfg.prec;
  const long d = std::min(psi.depth(), static_cast<long>(mu.size()) - 1);
  for (long i = n0; i <= d; ++i) {
    const NonNeg& m = mu[static_cast<size_t>(i)];
    if (m.is_zero()) continue;
    bool up = pv_le(m.value(), pv_exp2_rat(eps * i, prec), cfg).is_true();
    bool lo = lower ? pv_le(PosValue::exact(1 / *lower), m.value(), cfg).is_true()
                    : pv_le(pv_exp2_rat(-eps * i, prec), m.value(), cfg).is_true();
    if (!up || !lo) {
      throw CheckError("BandHypothesisFailed", "mu(i) leaves the band at i=n=" + std::to_string(i), i);
    }
  }
  BandResult r;
  r.n1 = n0;
  if (lower && *lower > 1) {
    if (eps == 0) throw CheckError("BandHypothesisFailed", "constant lower bound needs eps > 0");
    Rational need = Rational(ceil_log2(*lower)) / eps;
    BigInt c;
    mpz_cdiv_q(c.get_mpz_t(), need.get_num_mpz_t(), need.get_den_mpz_t());
    r.n1 = std::max(n0, c.get_si());
  }

  long c_exp = ess_exponent(psi, cfg);
  SquareReport sq = square_invariance_check(psi, lambda, cfg);
  long j = sq.cert.exponent;
  r.m = std::max(0L, ceil_log2(1 / (1 - eps)) - 1);
  r.k_proof_exponent = c_exp + j * (r.m + 1);

  std::map<Bracket, long> first;
  for (long i = r.n1; i <= d; ++i) {
    const NonNeg& m = mu[static_cast<size_t>(i)];
    if (m.is_zero()) continue;
    first.try_emplace(bracket_of(m.value(), prec), i);
  }
  PosValue C = PosValue::pow2(BigInt(c_exp));
  long k = 0;
  for (const auto& [b, i0] : first) {
    for (long n = i0; n <= d; ++n) {
      long cl = n + b.sl, ch = std::max(0L, n + b.sh);
      if (cl > d) {
        ++r.off_grid_pairs;
        continue;
      }
      PosValue lo = psi.at(cl).value(), hi = psi.at(ch).value();
      if (!b.exact) {
        lo = pv_div(lo, C, prec);
        hi = pv_mul(hi, C, prec);
      }
      const PosValue& p = psi.at(n).value();
      k = std::max({k, min_pow2_exponent(p, lo, cfg), min_pow2_exponent(hi, p, cfg)});
    }
  }
  r.k_exponent = k;
  return r;
}

PatchResult patch_nu(const std::vector<NonNeg>& mu, const Rational& alpha, long n1, const NumCfg& cfg) {
  PatchResult r;
  r.nu.reserve(mu.size());
  for (size_t n = 0; n < mu.size(); ++n) {
    r.nu.push_back(static_cast<long>(n) < n1 ? NonNeg(PosValue()) : mu[n]);
  }
  long top = std::min(n1, static_cast<long>(mu.size()) - 1);
  auto mu_a = powers(mu, alpha, cfg.prec), nu_a = powers(r.nu, alpha, cfg.prec);
  NonNeg a, b;
  for (long i = 0; i <= top; ++i) {
    a = nn_add(a, mu_a[static_cast<size_t>(i)], cfg.prec);
    b = nn_add(b, nu_a[static_cast<size_t>(i)], cfg.prec);
  }
  if (a.is_zero()) throw CheckError("HypothesisFailed", "mu vanishes on the patched prefix");
  r.k3_exponent = std::max({0L, min_pow2_exponent(a.value(), b.value(), cfg),
                            min_pow2_exponent(b.value(), a.value(), cfg)});
  return r;
}

MuCert build_mu_cert(const WeightSeq& wU, const WeightSeq& wV, const ScaleSystem& s, const DyadicFunction& phi,
                     const Rational& alpha, long depth, const MuBuildOptions& opt, const NumCfg& cfg) {
  MuRaw raw = build_mu(wU, wV, alpha, depth, cfg);
  MuGrowthReport c1 = check_mu_growth(raw, s, cfg);
  if (!c1.pass) throw CheckError("MuGrowthFailed", c1.which + " bound", c1.index);

  DyadicFunction psi = psi_of(phi, wV, depth, cfg.prec);
  Rational lambda;
  if (opt.lambda) {
    lambda = *opt.lambda;
  } else {
    long j = 0;
    for (long n = 1; 2 * n <= depth; ++n) j = std::max(j, min_pow2_exponent(psi.at(n).value(), psi.at(2 * n).value(), cfg));
    lambda = 1 / pow2q(j);
  }
  BandResult band = band_check(psi, raw.mu, opt.eps, raw.n0, lambda, lower_M(s), cfg);
  PatchResult patch = patch_nu(raw.mu, alpha, band.n1, cfg);

  MuCert c;
  c.alpha = alpha;
  c.depth = depth;
  c.n0 = raw.n0;
  c.n1 = band.n1;
  c.k_exponent = band.k_exponent;
  c.k_tail_exponent = std::max(band.k_proof_exponent, band.k_exponent);
  c.eps = opt.eps;
  c.lambda = lambda;
  c.sum_depth = depth / 2;
  c.mu = raw.mu;
  c.nu = patch.nu;
  c.ca_exponent = ca_need(psi, powers(c.nu, alpha, cfg.prec), phi, wU, depth, std::nullopt, cfg).exponent;

  if (opt.force_L_exponent) {
    c.L_exponent = *opt.force_L_exponent;
  } else {
    long c_exp = ess_exponent(psi, cfg);
    auto t = sum_bound_terms(psi, c.nu, alpha, c_exp, c.k_exponent, c.k_tail_exponent, c.sum_depth, cfg);
    long need = max_growth_need(c.nu, cfg);
    for (size_t n = 0; n < t.lhs.size(); ++n) need = std::max(need, min_pow2_exponent(t.lhs[n], t.rhs[n], cfg));
    c.L_exponent = need;
  }
  return c;
}

const InequalityStatus* MuVerdict::first_failure() const {
  for (const auto& c : checks) {
    if (!c.pass) return &c;
  }
  return nullptr;
}

MuVerdict verify_mu_cert(const MuCert& cert, const WeightSeq& wU, const WeightSeq& wV, const ScaleSystem& s,
                         const DyadicFunction& phi, const NumCfg& cfg) {
  const long d = cert.depth;
  if (static_cast<long>(cert.mu.size()) != d + 1 || static_cast<long>(cert.nu.size()) != d + 1) {
    throw CheckError("SchemaMismatch", "mu/nu length != depth + 1");
  }
  if (d > phi.depth() || d > wU.depth() || d > wV.depth()) throw CheckError("SchemaMismatch", "depth past inputs");
  if (cert.n1 < 0 || cert.n1 > d || cert.n0 < 0 || cert.sum_depth < 0 || 2 * cert.sum_depth > d) {
    throw CheckError("SchemaMismatch", "thresholds outside the grid");
  }
  MuVerdict v;
  auto add = [&](std::string name, long first, std::string detail = {}) {
    v.checks.push_back({std::move(name), first < 0, first, std::move(detail)});
    if (first >= 0) v.pass = false;
  };

  MuRaw raw = build_mu(wU, wV, cert.alpha, d, cfg);
  long bad = -1;
  for (long n = 0; n <= d && bad < 0; ++n) {
    if (!certified_equal(raw.mu[static_cast<size_t>(n)], cert.mu[static_cast<size_t>(n)], cfg)) bad = n;
  }
  add("mu", bad, "mu^alpha = u_U(n)/u_V(n) - u_U(n-1)/u_V(n-1)");

  MuGrowthReport c1 = check_mu_growth(raw, s, cfg);
  long c1_bad = c1.pass ? -1 : c1.index;
  for (long n = std::max(cert.n0, 1L); n <= d && c1_bad < 0; ++n) {
    const NonNeg& ma = raw.mu_alpha[static_cast<size_t>(n)];
    if (!ma.is_zero() && !pv_le(ma.value(), pv_exp2_rat(Rational(n, 2), cfg.prec), cfg).is_true()) c1_bad = n;
  }
  add("mu_growth", c1_bad, c1.pass ? "mu^alpha <= 2^(n/2) past n0" : c1.which + " bound");

  bad = -1;
  for (long n = 0; n <= d && bad < 0; ++n) {
    const NonNeg& x = cert.nu[static_cast<size_t>(n)];
    bool ok = n < cert.n1 ? (!x.is_zero() && x.value().is_exact() && x.value().exact_value() == 1)
                          : certified_equal(x, cert.mu[static_cast<size_t>(n)], cfg);
    if (ok && !x.is_zero()) ok = pv_le(x.value(), PosValue::pow2(BigInt(n)), cfg).is_true();
    if (!ok) bad = n;
  }
  add("nu", bad, "nu = 1 before n1, mu after, 0 <= nu <= 2^n");

  DyadicFunction psi = psi_of(phi, wV, d, cfg.prec);
  long c_exp = ess_exponent(psi, cfg);
  try {
    BandResult band = band_check(psi, cert.mu, cert.eps, cert.n0, cert.lambda, lower_M(s), cfg);
    std::string detail = "K=" + pow2_str(cert.k_exponent);
    long first = -1;
    if (band.n1 > cert.n1 || band.k_exponent > cert.k_exponent || band.k_proof_exponent > cert.k_tail_exponent) {
      first = band.n1;
      detail = "certified band needs K=" + pow2_str(band.k_exponent) + " from n1=" + std::to_string(band.n1);
    }
    add("band", first, detail);
  } catch (const CheckError& e) {
    if (e.code() != "BandHypothesisFailed" && e.code() != "HypothesisFailed") throw;
    add("band", e.index().value_or(0), e.code() + ": " + e.what());
  }

  auto nu_a = powers(cert.nu, cert.alpha, cfg.prec);
  Need ca = ca_need(psi, nu_a, phi, wU, d, cert.ca_exponent, cfg);
  add("equivalence", ca.first_over, "C=" + pow2_str(cert.k_exponent + cert.ca_exponent));

  Rational L = pow2q(cert.L_exponent);
  auto t = sum_bound_terms(psi, cert.nu, cert.alpha, c_exp, cert.k_exponent, cert.k_tail_exponent, cert.sum_depth, cfg);
  bad = -1;
  bool unknown = false;
  for (size_t n = 0; n < t.lhs.size() && bad < 0; ++n) {
    auto r = pv_cmp_scaled(t.lhs[n], L, t.rhs[n], cfg);
    if (!r.is_true()) {
      bad = static_cast<long>(n);
      unknown = r.is_unknown();
    }
  }
  add("sum_bound", bad, "L=" + pow2_str(cert.L_exponent));
  v.checks.back().unknown = unknown;

  bad = -1;
  PosValue run = cert.nu[0].is_zero() ? PosValue() : cert.nu[0].value();
  for (long n = 1; n <= d && bad < 0; ++n) {
    const NonNeg& x = cert.nu[static_cast<size_t>(n)];
    if (x.is_zero()) continue;
    if (!pv_cmp_scaled(x.value(), L, run, cfg).is_true()) bad = n;
    run = pv_max(run, x.value(), cfg.prec);
  }
  add("max_growth", bad, "L=" + pow2_str(cert.L_exponent));
  return v;
}

}  // namespace pofin
