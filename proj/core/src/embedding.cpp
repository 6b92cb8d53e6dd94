#include "pofin/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <climits>
#include <numeric>
#include <thread>

namespace pofin {

namespace {

long ceil_log2(const Rational& q) { return min_pow2_exponent(PosValue::exact(q), PosValue()); }

Rational rpow(const Rational& q, long k) {
  Rational out(1);
  for (long i = 0; i < k; ++i) out *= q;
  return out;
}

const SubsetSpec& omega_set() {
  static const SubsetSpec w = SubsetSpec::periodic("", "1");
  return w;
}

bool is_omega(const SubsetSpec& u) {
  if (!u.is_periodic()) return false;
  const auto& p = u.as_periodic();
  auto ones = [](const std::string& s) { return std::all_of(s.begin(), s.end(), [](char c) { return c == '1'; }); };
  return ones(p.prefix) && ones(p.period);
}

// Smallest member of A \ B strictly above `after` (or >= 0 when unset).
std::optional<BigInt> next_diff(const SubsetSpec& a, const SubsetSpec& b, const std::optional<BigInt>& after,
                                WindowPolicy policy) {
  BigInt start = after ? BigInt(*after + 1) : BigInt(0);
  if (!a.is_periodic()) {
    const auto& mem = a.as_window().members;
    for (auto it = std::lower_bound(mem.begin(), mem.end(), start); it != mem.end(); ++it) {
      if (!b.member(*it, policy)) return *it;
    }
    return std::nullopt;
  }
  // A periodic: one full joint period past every prefix decides it.
  const auto& pa = a.as_periodic();
  long span = static_cast<long>(pa.period.size());
  long pre = static_cast<long>(pa.prefix.size());
  if (b.is_periodic()) {
    const auto& pb = b.as_periodic();
    span = std::lcm(span, static_cast<long>(pb.period.size()));
    pre = std::max(pre, static_cast<long>(pb.prefix.size()));
    BigInt limit = std::max(start, BigInt(pre)) + span;
    for (BigInt i = start; i < limit; ++i) {
      if (a.member(i, policy) && !b.member(i, policy)) return i;
    }
    return std::nullopt;
  }
  BigInt limit = std::max(start, BigInt(b.as_window().horizon)) + std::max(span, pre) + 1;
  for (BigInt i = start; i < limit; ++i) {
    if (a.member(i, policy) && !b.member(i, policy)) return i;
  }
  return std::nullopt;
}

long minimal_p(const Rational& delta, const Rational& Delta, long cap) {
  Rational pw = Delta;
  for (long p = 1; p <= cap; ++p, pw *= Delta) {
    if (pw <= delta) return p;
  }
  throw CheckError("HypothesisFailed", "no p with Delta^p <= delta within the cap");
}

std::vector<long> fired_ms(const WeightSeq& w) {
  std::vector<long> out;
  for (const auto& f : w.fires()) out.push_back(f.m);
  return out;
}

}  // namespace

namespace {

IncompWitness build_witness(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s, long levels,
                            bool one_sided, WindowPolicy policy, const NumCfg& cfg) {
  if (levels < 1) throw CheckError("InvalidInput", "levels must be >= 1");
  IncompWitness w;
  w.one_sided = one_sided;
  w.delta = s.delta_inf();
  w.Delta = s.delta_sup();
  w.p = minimal_p(w.delta, w.Delta, cfg.cap_c);
  w.levels = levels;

  std::optional<BigInt> cursor = BigInt(w.p);  // u_0 >= p + 1
  for (long l = 0; l < levels; ++l) {
    auto ul = next_diff(u, v, cursor, policy);
    if (!ul) throw CheckError("InterleavingExhausted", "U \\ V has no member past " + cursor->get_str(), l);
    w.u.push_back(*ul);
    if (one_sided) {
      cursor = *ul + 1;
      continue;
    }
    auto vl = next_diff(v, u, ul, policy);
    if (!vl) throw CheckError("InterleavingExhausted", "V \\ U has no member past " + ul->get_str(), l);
    w.v.push_back(*vl);
    cursor = vl;
  }

  BigInt top = one_sided ? w.u.back() : w.v.back();
  w.mode = top <= kExactBlockLimit ? "exact" : "chain";
  std::optional<BlockPartition> part;
  if (w.mode == "exact") part.emplace(top.get_si() + 1);
  for (long l = 0; l < levels; ++l) {
    w.bound.push_back(PosValue::exact(rpow(w.Delta, 2 * l)));
    if (part) {
      w.m.push_back(part->a(w.u[l].get_si() + 1) - 1);
      w.ratio_u.emplace_back(weight_ratio_at_scale(u, v, s, *part, w.m.back(), policy, cfg.prec));
      if (!one_sided) {
        w.n.push_back(part->a(w.v[l].get_si() + 1) - 1);
        w.ratio_v.emplace_back(weight_ratio_at_scale(v, u, s, *part, w.n.back(), policy, cfg.prec));
      }
    } else {
      // a_(u_l + 1) has no usable size here; record the block indices only.
      w.m.push_back(BigInt(-1));
      w.ratio_u.emplace_back();
      if (!one_sided) {
        w.n.push_back(BigInt(-1));
        w.ratio_v.emplace_back();
      }
    }
  }
  return w;
}

}  // namespace

IncompWitness incomparability_witness(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s, long levels,
                                      WindowPolicy policy, const NumCfg& cfg) {
  return build_witness(u, v, s, levels, false, policy, cfg);
}

IncompWitness liminf_chain_witness(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s, long levels,
                                   WindowPolicy policy, const NumCfg& cfg) {
  return build_witness(u, v, s, levels, true, policy, cfg);
}

WitnessVerdict verify_incomp_witness(const IncompWitness& w, const SubsetSpec& u, const SubsetSpec& v,
                                     const ScaleSystem& s, WindowPolicy policy, const NumCfg& cfg) {
  auto fail = [](long l, std::string why) { return WitnessVerdict{false, l, std::move(why)}; };
  auto L = static_cast<size_t>(w.levels);
  size_t other = w.one_sided ? 0 : L;
  if (w.levels < 1 || w.u.size() != L || w.m.size() != L || w.ratio_u.size() != L || w.bound.size() != L ||
      w.v.size() != other || w.n.size() != other || w.ratio_v.size() != other) {
    throw CheckError("SchemaMismatch", "witness arrays disagree with levels");
  }
  if (w.delta != s.delta_inf() || w.Delta != s.delta_sup()) return fail(-1, "delta/Delta differ from the scale system");
  if (w.p != minimal_p(w.delta, w.Delta, cfg.cap_c)) return fail(-1, "p is not minimal with Delta^p <= delta");
  if (w.u[0] < w.p + 1) return fail(0, "u_0 < p + 1");
  for (size_t l = 0; l < L; ++l) {
    long ll = static_cast<long>(l);
    if (w.one_sided) {
      if (l + 1 < L && w.u[l + 1] < w.u[l] + 2) return fail(ll, "u_(l+1) < u_l + 2");
    } else {
      if (!(w.u[l] < w.v[l]) || (l + 1 < L && !(w.v[l] < w.u[l + 1]))) return fail(ll, "not interleaved");
      if (!v.member(w.v[l], policy) || u.member(w.v[l], policy)) return fail(ll, "v_l not in V \\ U");
    }
    if (!u.member(w.u[l], policy) || v.member(w.u[l], policy)) return fail(ll, "u_l not in U \\ V");
    if (!w.bound[l].identical(PosValue::exact(rpow(w.Delta, 2 * ll)))) return fail(ll, "bound is not Delta^(2l)");
  }
  if (w.mode == "chain") {
    // ratio <= Delta^(u_l a) / delta^a <= (Delta^p / delta)^a Delta^(2l) <= Delta^(2l) with a = a_(u_l) >= 1,
    // using u_l >= p + 1 + 2l; the checks above are all it needs.
    return {};
  }
  if (w.mode != "exact") throw CheckError("SchemaMismatch", "unknown witness mode " + w.mode);
  BlockPartition part((w.one_sided ? w.u.back() : w.v.back()).get_si() + 1);
  auto check = [&](const std::optional<PosValue>& stored, const SubsetSpec& a, const SubsetSpec& b,
                   const BigInt& blk, const BigInt& m, long l) -> std::optional<WitnessVerdict> {
    if (m != part.a(blk.get_si() + 1) - 1) return fail(l, "m_l does not close block u_l");
    if (!stored) return fail(l, "missing ratio");
    PosValue fresh = weight_ratio_at_scale(a, b, s, part, m, policy, cfg.prec);
    if (pv_lt(*stored, fresh, cfg).is_true() || pv_lt(fresh, *stored, cfg).is_true()) {
      return fail(l, "stored ratio differs from recomputation");
    }
    auto le = pv_le(fresh, w.bound[static_cast<size_t>(l)], cfg);
    if (!le.is_true()) return fail(l, le.is_unknown() ? "ratio bound undecided" : "ratio exceeds Delta^(2l)");
    return std::nullopt;
  };
  for (size_t l = 0; l < L; ++l) {
    long ll = static_cast<long>(l);
    if (auto f = check(w.ratio_u[l], u, v, w.u[l], w.m[l], ll)) return *f;
    if (!w.one_sided) {
      if (auto f = check(w.ratio_v[l], v, u, w.v[l], w.n[l], ll)) return *f;
    }
  }
  return {};
}

std::string pair_kind_str(PairKind k) {
  switch (k) {
    case PairKind::AlmostEqual:
      return "AlmostEqual";
    case PairKind::LeftReduces:
      return "LeftReduces";
    case PairKind::RightReduces:
      return "RightReduces";
    case PairKind::Incomparable:
      return "Incomparable";
  }
  return "?";
}

PairVerdict classify_pair(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s, const Rational& alpha,
                          const DyadicFunction& phi_env, long depth, const ClassifyOptions& opt, const NumCfg& cfg) {
  if (!u.is_periodic() || !v.is_periodic()) throw CheckError("InvalidInput", "classify_pair needs periodic sets");
  if (phi_env.depth() < depth) throw CheckError("InvalidDepth", "envelope shallower than depth");
  bool uv = almost_subset(u, v).yes;
  bool vu = almost_subset(v, u).yes;
  PairVerdict out;

  if (!uv && !vu) {
    out.kind = PairKind::Incomparable;
    out.uv = incomparability_witness(u, v, s, opt.levels, WindowPolicy::Strict, cfg);
    out.vu = incomparability_witness(v, u, s, opt.levels, WindowPolicy::Strict, cfg);
    out.verified = verify_incomp_witness(*out.uv, u, v, s, WindowPolicy::Strict, cfg).pass &&
                   verify_incomp_witness(*out.vu, v, u, s, WindowPolicy::Strict, cfg).pass;
    return out;
  }

  WeightSeq wu = weight_seq(u, s, depth, WindowPolicy::Strict, cfg.prec);
  WeightSeq wv = weight_seq(v, s, depth, WindowPolicy::Strict, cfg.prec);
  if (uv && vu) {
    out.kind = PairKind::AlmostEqual;
    auto mu = fired_ms(wu), mv = fired_ms(wv);
    std::vector<long> sym;
    std::set_symmetric_difference(mu.begin(), mu.end(), mv.begin(), mv.end(), std::back_inserter(sym));
    out.differing_fires = static_cast<long>(sym.size());
    auto r = equiv_witness(from_weight(wu, depth), from_weight(wv, depth), 0, depth, cfg);
    if (!std::holds_alternative<EquivCert>(r)) throw CheckError("Unknown", "finite difference without an equivalence");
    out.equiv = std::get<EquivCert>(r);
    out.verified = true;
    return out;
  }

  out.kind = uv ? PairKind::RightReduces : PairKind::LeftReduces;
  const SubsetSpec& lower = uv ? u : v;
  const SubsetSpec& upper = uv ? v : u;
  const WeightSeq& wl = uv ? wu : wv;
  const WeightSeq& wh = uv ? wv : wu;
  SubsetSpec cap = periodic_intersection(lower, upper);
  WeightSeq wc = weight_seq(cap, s, depth, WindowPolicy::Strict, cfg.prec);

  auto eq = equiv_witness(from_weight(wl, depth), from_weight(wc, depth), 0, depth, cfg);
  if (!std::holds_alternative<EquivCert>(eq)) throw CheckError("Unknown", "finite difference without an equivalence");
  DyadicFunction phi = phi_env.truncated(depth);
  MuCert mc = build_mu_cert(wc, wh, s, phi, alpha, depth, opt.mu, cfg);
  MuVerdict mv = verify_mu_cert(mc, wc, wh, s, phi, cfg);

  // Converse on the grid: u_upper / u_cap over the fires of upper \ cap is at most Delta^(j+1).
  auto mc_fires = fired_ms(wc);
  std::vector<long> idx;
  std::vector<PosValue> bound;
  Rational Delta = s.delta_sup();
  for (const auto& f : wh.fires()) {
    if (std::binary_search(mc_fires.begin(), mc_fires.end(), f.m)) continue;
    idx.push_back(f.n);
    bound.push_back(PosValue::exact(rpow(Delta, static_cast<long>(idx.size()))));
  }
  A2Result a2 = a2_liminf_witness(from_weight(wh, depth), from_weight(wc, depth), idx, bound, cfg);
  IncompWitness conv = liminf_chain_witness(upper, cap, s, opt.levels, WindowPolicy::Strict, cfg);
  bool conv_ok = verify_incomp_witness(conv, upper, cap, s, WindowPolicy::Strict, cfg).pass;

  long a1d = std::min(depth, opt.a1_depth);
  RelationSpec rel(alpha, phi_env.truncated(a1d), weight_seq(cap, s, a1d, WindowPolicy::Strict, cfg.prec), cfg);
  A1Cert a1 = check_A1(rel, a1d, std::nullopt, cfg);

  // The grid data may be empty when no fire of upper \\ lower lies below depth; the chain covers it.
  out.verified = mv.pass && conv_ok && a2.outcome != A2Result::Outcome::BoundViolated;
  out.reduction = ReductionBundle{lower,         upper,          cap,          std::get<EquivCert>(eq),
                                  std::move(mc), std::move(mv),  std::move(conv), std::move(idx),
                                  std::move(bound), std::move(a2), std::move(a1)};
  return out;
}

AntichainResult antichain(const std::vector<std::string>& branch_codes, const ScaleSystem& s, long depth, long levels,
                          const NumCfg& cfg) {
  if (branch_codes.size() < 2) throw CheckError("InvalidInput", "antichain needs at least 2 branch codes");
  AntichainResult res;
  res.sets = branch_family(branch_codes, depth);
  size_t k = res.sets.size();
  res.verdicts.assign(k, std::vector<std::optional<PairVerdict>>(k));
  std::vector<std::pair<size_t, size_t>> jobs;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) jobs.emplace_back(i, j);
  }
  std::vector<std::optional<PairVerdict>> slot(jobs.size());
  std::vector<std::exception_ptr> errs(jobs.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t t; (t = next.fetch_add(1)) < jobs.size();) {
      try {
        auto [i, j] = jobs[t];
        const auto policy = WindowPolicy::OutsideIsEmpty;
        PairVerdict pv;
        pv.kind = PairKind::Incomparable;
        pv.within_window = true;
        pv.uv = incomparability_witness(res.sets[i], res.sets[j], s, levels, policy, cfg);
        pv.vu = incomparability_witness(res.sets[j], res.sets[i], s, levels, policy, cfg);
        pv.verified = verify_incomp_witness(*pv.uv, res.sets[i], res.sets[j], s, policy, cfg).pass &&
                      verify_incomp_witness(*pv.vu, res.sets[j], res.sets[i], s, policy, cfg).pass;
        slot[t] = std::move(pv);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    }
  };
  size_t nthreads = std::clamp<size_t>(std::thread::hardware_concurrency(), 1, std::max<size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (size_t t = 0; t < jobs.size(); ++t) {
    if (errs[t]) std::rethrow_exception(errs[t]);
    auto [i, j] = jobs[t];
    if (slot[t]->verified) ++res.incomparable;
    res.verdicts[i][j] = std::move(slot[t]);
  }
  res.pairs = static_cast<long>(jobs.size());
  return res;
}

ScaleSystem eta_scale_system(const EtaSpec& eta) {
  auto j0 = eta.j0();
  if (!j0) throw CheckError("DegenerateEta", "eta is zero");
  KSpec k;
  k.kind = KSpec::Kind::Tower;
  k.param = *j0;
  DeltaSpec d;
  d.kind = DeltaSpec::Kind::Eta;
  d.eta = eta;
  return ScaleSystem(k, d);
}

EtaScalesReport eta_scales(const EtaSpec& eta, long m_max, const NumCfg& cfg) {
  auto j0 = eta.j0();
  if (!j0) throw CheckError("DegenerateEta", "eta is zero");
  if (m_max < 1) throw CheckError("InvalidInput", "m_max must be >= 1");
  EtaScalesReport r;
  r.j0 = *j0;
  Rational e = eta.at(*j0);
  r.limit = pv_exp2_rat(-e, cfg.prec);
  for (long m = 1; m <= m_max; ++m) {
    PosValue d = eta_delta(eta, BigInt(m), cfg.prec);
    r.inf = m == 1 ? d : pv_min(r.inf, d, cfg.prec);
    r.sup = m == 1 ? d : pv_max(r.sup, d, cfg.prec);
    Interval iv = d.log2(cfg.prec);
    Rational a = abs(iv.lo.to_rational() + e), b = abs(iv.hi.to_rational() + e);
    Rational dist = std::max<Rational>(a, b);
    r.distance_log2_hi.push_back(dist == 0 ? LONG_MIN : ceil_log2(dist));
    r.delta.push_back(std::move(d));
  }
  r.bounds_ok = pv_le(r.inf, r.sup, cfg).is_true() && pv_lt(r.sup, PosValue(), cfg).is_true();
  r.trending = r.distance_log2_hi.back() <= r.distance_log2_hi.front();
  return r;
}

SandwichReport sandwich_build(const EtaSpec& eta, const EtaSpec& eta_prime, const SubsetSpec& u, const Rational& alpha,
                              long depth, const NumCfg& cfg) {
  auto j0 = lex_less_index(eta, eta_prime);
  if (!j0) throw CheckError("NotLexLess", eta.str() + " is not lexicographically below " + eta_prime.str());
  Rational gap = eta_prime.at(*j0) - eta.at(*j0);
  Rational margin(1, 1024);
  long j = 1;
  Rational delta;
  for (;; ++j) {
    if (j > cfg.cap_c) throw CheckError("Unknown", "no delta = 1 - 2^-j clears the margin within the cap");
    delta = 1 - Rational(1) / PosValue::pow2(BigInt(j)).exact_value();
    Interval iv = log2_enclosure(Rational(1 / delta), cfg.prec);
    if (iv.hi.to_rational() + margin <= gap) break;
  }

  KSpec k;
  k.kind = KSpec::Kind::Tower;
  k.param = *j0;
  DeltaSpec d;
  d.kind = DeltaSpec::Kind::Const;
  d.c = delta;
  ScaleSystem scale(k, d);
  WeightSeq w = weight_seq(u, scale, depth, WindowPolicy::Strict, cfg.prec);
  BuiltinContext ctx{&scale};
  DyadicFunction env = builtin_function("inv_l:" + eta.str(), depth, ctx, cfg.prec);
  RelationSpec rel(alpha, env, w, cfg);
  R2Report r2 = check_R1_R2(rel, depth, delta, cfg);
  A1Cert a1 = check_A1(rel, depth, std::nullopt, cfg);

  SandwichReport rep{*j0, j, delta, scale, rel, r2, a1, {}, true};
  if (is_omega(u)) {
    for (long m = 0; m <= 20; ++m) {
      TowerNat km = tower_k(*j0, BigInt(m));
      auto s1 = tower_s(*j0 + 1, km, cfg.prec).as_rational();
      bool ok = s1 && *s1 == m + 1;
      auto kv = km.exact();
      if (kv && *kv <= depth) {
        auto uv = w.at(kv->get_si()).as_rational();
        ok = ok && uv && *uv == rpow(delta, m + 1);
      }
      rep.identity_ok = rep.identity_ok && ok;
      rep.identity_checked.push_back(m);
    }
  }
  return rep;
}

SmoothOmegaReport smooth_omega_envelope(const ScaleSystem& s, long depth, const NumCfg& cfg) {
  const long prec = cfg.prec;
  WeightSeq w = weight_seq(omega_set(), s, depth, WindowPolicy::Strict, prec);
  DyadicFunction phi = from_weight(w, depth);

  // Knots (x, F(x), delta applied on the way to the next knot).
  struct Knot {
    long x;
    PosValue f;
  };
  std::vector<Knot> knots{{0, PosValue()}};
  std::vector<long> fires;
  for (const auto& f : w.fires()) {
    knots.push_back({f.n, f.value});
    fires.push_back(f.n);
  }
  long next_m = static_cast<long>(w.fires().size());
  if (!s.size() || next_m < *s.size()) {
    auto kx = s.k(BigInt(next_m)).exact();
    if (kx && kx->fits_slong_p()) knots.push_back({kx->get_si(), pv_mul(knots.back().f, s.delta(BigInt(next_m), prec), prec)});
  }

  std::vector<NonNeg> samples;
  samples.reserve(static_cast<size_t>(depth) + 1);
  size_t seg = 0;
  for (long n = 0; n <= depth; ++n) {
    while (seg + 1 < knots.size() && knots[seg + 1].x <= n) ++seg;
    if (seg + 1 >= knots.size() || knots[seg].x == n) {
      samples.emplace_back(knots[seg].f);
      continue;
    }
    const Knot &a = knots[seg], &b = knots[seg + 1];
    Rational t(n - a.x, b.x - a.x);
    t.canonicalize();
    // F(n) = F(a) (1 - t) + F(b) t
    samples.emplace_back(pv_add(pv_mul(a.f, PosValue::exact(1 - t), prec), pv_mul(b.f, PosValue::exact(t), prec), prec));
  }
  DyadicFunction psi(std::move(samples));

  SmoothOmegaReport rep{psi, phi, fires, {}, -1, {}};
  for (size_t i = 0; i < fires.size(); ++i) {
    long km = fires[i];
    PosValue dn = s.delta(BigInt(static_cast<long>(i) + 1), prec);
    SubResult gap = pv_sub(pv_inv(dn), PosValue(), prec);
    if (gap.sign != SubSign::Positive) throw CheckError("Unknown", "1/delta - 1 not certified positive", km);
    PosValue b = pv_div(*gap.value, PosValue::exact(km), prec);
    rep.ratio_bound.push_back(b);
    long end = i + 1 < fires.size() ? fires[i + 1] : depth;
    PosValue one_b = pv_add(PosValue(), b, prec);
    for (long n = km; n < end && rep.first_ratio_fail < 0; ++n) {
      const PosValue &x = psi.at(n).value(), &y = psi.at(n + 1).value();
      if (!pv_le(x, pv_mul(y, one_b, prec), cfg).is_true()) rep.first_ratio_fail = n;
    }
  }

  std::vector<long> xseq{0};
  for (long f : fires) {
    if (f != xseq.back()) xseq.push_back(f);
  }
  if (xseq.back() != depth) xseq.push_back(depth);
  rep.bridge = step_bridge_check(phi, psi, xseq, s.delta_inf(), Rational(1), cfg);
  return rep;
}

}  // namespace pofin
