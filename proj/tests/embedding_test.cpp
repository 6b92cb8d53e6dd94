#include <gtest/gtest.h>

#include <random>

#include "pofin/embedding.hpp"

using namespace pofin;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const CheckError& e) {
    return e.code();
  }
  return "none";
}

SubsetSpec set(const char* s) { return SubsetSpec::parse(s); }

const ScaleSystem& half() {
  static const ScaleSystem s = ScaleSystem::pow2(q(1, 2));
  return s;
}

PairVerdict classify(const SubsetSpec& u, const SubsetSpec& v, long depth, const ScaleSystem& s = half()) {
  return classify_pair(u, v, s, 1, builtin_function("const:1", depth), depth);
}

// Pairs whose blocks of U \ V start past kExactBlockLimit, so witnesses go through the chain.
std::string late(const char* period) { return "periodic:" + std::string(50, '0') + "/" + period; }

}  // namespace

TEST(Classify, EvensIntoOmega) {
  PairVerdict v = classify(set("periodic:/10"), set("periodic:/1"), 1024);
  EXPECT_EQ(v.kind, PairKind::RightReduces);
  ASSERT_TRUE(v.reduction);
  EXPECT_TRUE(v.verified);
  EXPECT_TRUE(v.reduction->mu_verdict.pass);
  const IncompWitness& c = v.reduction->converse;
  EXPECT_TRUE(c.one_sided);
  EXPECT_TRUE(verify_incomp_witness(c, set("periodic:/1"), set("periodic:/10"), half()).pass);
  EXPECT_EQ(v.reduction->converse_grid.outcome, A2Result::Outcome::Verified);

  PairVerdict r = classify(set("periodic:/1"), set("periodic:/10"), 1024);
  EXPECT_EQ(r.kind, PairKind::LeftReduces);
  EXPECT_TRUE(r.verified);
}

TEST(Classify, AlmostEqual) {
  PairVerdict v = classify(set("periodic:/10"), SubsetSpec::periodic("111111", "10"), 1024);
  EXPECT_EQ(v.kind, PairKind::AlmostEqual);
  ASSERT_TRUE(v.equiv);
  // only block 1 (m = 1, 2) of the extra blocks has fires below depth
  EXPECT_EQ(v.differing_fires, 2);
  EXPECT_EQ(v.equiv->exponent, 2);
  EXPECT_TRUE(v.verified);
}

TEST(Classify, EvensOdds) {
  PairVerdict v = classify(set("periodic:/10"), set("periodic:/01"), 256);
  EXPECT_EQ(v.kind, PairKind::Incomparable);
  ASSERT_TRUE(v.uv && v.vu);
  EXPECT_TRUE(v.verified);
}

TEST(Classify, NeedsPeriodicSets) {
  EXPECT_EQ(error_code([] { classify(set("window:1010"), set("periodic:/1"), 64); }), "InvalidInput");
}

TEST(Classify, SoundOnRandomPairs) {
  std::mt19937_64 rng(3);
  auto uni = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  auto bits = [&](long n) {
    std::string s;
    for (long i = 0; i < n; ++i) s += uni(0, 1) ? '1' : '0';
    return s;
  };
  for (int t = 0; t < 50; ++t) {
    SubsetSpec u = SubsetSpec::periodic(bits(uni(0, 3)), bits(uni(1, 4)));
    SubsetSpec v = SubsetSpec::periodic(bits(uni(0, 3)), bits(uni(1, 4)));
    bool uv = almost_subset(u, v).yes, vu = almost_subset(v, u).yes;
    PairKind want = uv && vu ? PairKind::AlmostEqual
                    : uv     ? PairKind::RightReduces
                    : vu     ? PairKind::LeftReduces
                             : PairKind::Incomparable;
    PairVerdict got = classify(u, v, 64);
    EXPECT_EQ(pair_kind_str(got.kind), pair_kind_str(want)) << u.str() << " " << v.str();
    EXPECT_TRUE(got.verified) << u.str() << " " << v.str();
    EXPECT_EQ(diff_infinite(u, v), !uv);
  }
}

TEST(Witness, EvensOddsLayout) {
  IncompWitness w = incomparability_witness(set("periodic:/10"), set("periodic:/01"), half(), 4);
  EXPECT_EQ(w.p, 1);
  EXPECT_EQ(w.mode, "exact");
  for (long l = 0; l < 4; ++l) {
    EXPECT_EQ(w.u[l], 2 * l + 2);
    EXPECT_EQ(w.v[l], 2 * l + 3);
  }
  EXPECT_TRUE(verify_incomp_witness(w, set("periodic:/10"), set("periodic:/01"), half()).pass);
}

TEST(Witness, DecaysStrictlyAndMeetsBounds) {
  struct P {
    const char *u, *v;
    Rational delta;
  };
  for (const P& p : {P{"periodic:/10", "periodic:/01", q(1, 2)}, P{"periodic:/100", "periodic:/010", q(1, 3)},
                     P{"periodic:1/0110", "periodic:0/1001", q(2, 3)}}) {
    ScaleSystem s = ScaleSystem::pow2(p.delta);
    SubsetSpec u = set(p.u), v = set(p.v);
    IncompWitness w = incomparability_witness(u, v, s, 6);
    ASSERT_EQ(w.mode, "exact") << p.u;
    ASSERT_TRUE(verify_incomp_witness(w, u, v, s).pass) << p.u;
    for (auto* ratios : {&w.ratio_u, &w.ratio_v}) {
      for (long l = 0; l < 6; ++l) {
        const PosValue& r = *(*ratios)[l];
        EXPECT_TRUE(pv_le(r, w.bound[l]).is_true()) << p.u << " l=" << l;
        if (l > 0) {
          EXPECT_TRUE(pv_lt(r, *(*ratios)[l - 1]).is_true()) << p.u << " l=" << l;
        }
      }
    }
  }
}

TEST(Witness, SingleLevelAndExhaustion) {
  IncompWitness w = incomparability_witness(set("periodic:/10"), set("periodic:/01"), half(), 1);
  EXPECT_EQ(w.bound[0].as_rational(), 1);
  EXPECT_EQ(error_code([] { incomparability_witness(set("periodic:/10"), set("periodic:/10"), half(), 4); }),
            "InterleavingExhausted");
}

TEST(Witness, Tampering) {
  SubsetSpec u = set("periodic:/10"), v = set("periodic:/01");
  IncompWitness w = incomparability_witness(u, v, half(), 4);
  IncompWitness t = w;
  t.u[0] = 0;
  EXPECT_FALSE(verify_incomp_witness(t, u, v, half()).pass);
  t = w;
  t.v[1] = t.v[1] + 2;
  EXPECT_FALSE(verify_incomp_witness(t, u, v, half()).pass);
  t = w;
  t.bound[2] = PosValue::exact(1);
  EXPECT_FALSE(verify_incomp_witness(t, u, v, half()).pass);
  t = w;
  t.p = 2;
  EXPECT_FALSE(verify_incomp_witness(t, u, v, half()).pass);
  t = w;
  t.ratio_v.pop_back();
  EXPECT_EQ(error_code([&] { verify_incomp_witness(t, u, v, half()); }), "SchemaMismatch");
}

TEST(Witness, ChainModePastExactBlocks) {
  SubsetSpec u = set(late("10").c_str()), v = set(late("01").c_str());
  IncompWitness w = incomparability_witness(u, v, half(), 4);
  EXPECT_EQ(w.mode, "chain");
  EXPECT_GE(w.u[0], kExactBlockLimit);
  EXPECT_TRUE(verify_incomp_witness(w, u, v, half()).pass);
  IncompWitness t = w;
  t.u[1] = t.v[1];  // a member of V
  EXPECT_FALSE(verify_incomp_witness(t, u, v, half()).pass);
}

TEST(Witness, OneSided) {
  SubsetSpec om = set("periodic:/1"), ev = set("periodic:/10");
  IncompWitness w = liminf_chain_witness(om, ev, half(), 5);
  EXPECT_TRUE(w.one_sided);
  EXPECT_TRUE(w.v.empty());
  for (long l = 1; l < 5; ++l) EXPECT_GE(w.u[l], w.u[l - 1] + 2);
  EXPECT_TRUE(verify_incomp_witness(w, om, ev, half()).pass);
  // The reverse ratio u_ev / u_om grows, so the same indices cannot witness it.
  EXPECT_EQ(error_code([&] { liminf_chain_witness(ev, om, half(), 5); }), "InterleavingExhausted");

  IncompWitness t = w;
  t.u[2] = t.u[1] + 1;
  EXPECT_FALSE(verify_incomp_witness(t, om, ev, half()).pass);
  t = w;
  t.ratio_u[3] = pv_mul(*t.ratio_u[3], PosValue::exact(2));
  EXPECT_FALSE(verify_incomp_witness(t, om, ev, half()).pass);

  IncompWitness c = liminf_chain_witness(set(late("1").c_str()), set(late("10").c_str()), half(), 4);
  EXPECT_EQ(c.mode, "chain");
  EXPECT_TRUE(verify_incomp_witness(c, set(late("1").c_str()), set(late("10").c_str()), half()).pass);
}

TEST(Antichain, Sizes) {
  AntichainResult two = antichain({"0", "1"}, half(), 32);
  EXPECT_EQ(two.pairs, 1);
  EXPECT_EQ(two.incomparable, 1);
  ASSERT_TRUE(two.verdicts[0][1]);
  EXPECT_TRUE(two.verdicts[0][1]->within_window);
  EXPECT_EQ(error_code([] { antichain({"0"}, half(), 32); }), "InvalidInput");
  EXPECT_EQ(error_code([] { antichain({"0", "0"}, half(), 32); }), "DuplicateBranch");
}

TEST(Antichain, EightBranchesDeterministic) {
  std::vector<std::string> codes{"000", "001", "010", "011", "100", "101", "110", "111"};
  AntichainResult a = antichain(codes, half(), 64), b = antichain(codes, half(), 64);
  EXPECT_EQ(a.incomparable, 28);
  EXPECT_EQ(a.pairs, 28);
  for (size_t i = 0; i < codes.size(); ++i) {
    for (size_t j = i + 1; j < codes.size(); ++j) {
      ASSERT_TRUE(a.verdicts[i][j] && b.verdicts[i][j]);
      EXPECT_EQ(a.verdicts[i][j]->uv->u, b.verdicts[i][j]->uv->u);
      EXPECT_EQ(a.verdicts[i][j]->vu->u, b.verdicts[i][j]->vu->u);
    }
  }
}

TEST(Towers, Values) {
  EXPECT_EQ(tower_s(1, tower_p(0)).as_rational(), 1);  // s_1(1/4) with p_1 = 4 ... x = 1/2^p_0
  EXPECT_EQ(tower_t(0, TowerNat::of(1)).as_rational(), 2);
  EXPECT_EQ(tower_p(3).exact(), BigInt(65536));
  EXPECT_EQ(tower_k(1, BigInt(2)).exact(), BigInt(256));
  for (long n = 1; n <= 3; ++n) EXPECT_EQ(tower_s(n, tower_p(n - 1)).as_rational(), 1) << n;
  EXPECT_EQ(tower_cmp(tower_p(5), tower_p(4)), 1);
  EXPECT_EQ(parse_tower_kind("k"), TowerKind::K);
}

TEST(Eta, HalfIsConstant) {
  EtaScalesReport r = eta_scales(EtaSpec::parse("1/2"), 20);
  EXPECT_EQ(r.j0, 0);
  ASSERT_EQ(r.delta.size(), 20u);
  PosValue want = pv_exp2_rat(q(-1, 2));
  for (const auto& d : r.delta) EXPECT_TRUE(d.is_point() && d.identical(want)) << d.str();
  EXPECT_TRUE(r.bounds_ok);
  EXPECT_TRUE(r.limit.identical(want));
  for (long x : r.distance_log2_hi) EXPECT_EQ(x, LONG_MIN);
}

TEST(Eta, SecondLevelScale) {
  ScaleSystem s = eta_scale_system(EtaSpec::parse("0,1/2"));
  EXPECT_EQ(s.k_spec().kind, KSpec::Kind::Tower);
  EXPECT_EQ(s.k_spec().param, 1);
  EXPECT_EQ(s.k(BigInt(0)).exact(), BigInt(4));
  EXPECT_EQ(s.k(BigInt(1)).exact(), BigInt(16));
  EXPECT_EQ(s.k(BigInt(2)).exact(), BigInt(256));
  EtaScalesReport r = eta_scales(EtaSpec::parse("0,1/2"), 8);
  EXPECT_EQ(r.j0, 1);
  EXPECT_TRUE(r.bounds_ok);
  EXPECT_TRUE(r.trending);
  EXPECT_EQ(error_code([] { eta_scales(EtaSpec::parse("0"), 8); }), "DegenerateEta");
}

TEST(Sandwich, Examples) {
  SandwichReport r = sandwich_build(EtaSpec::parse("0"), EtaSpec::parse("1/2"), set("periodic:/1"), 1, 256);
  EXPECT_EQ(r.j0, 0);
  EXPECT_EQ(r.delta, q(3, 4));
  EXPECT_TRUE(r.r2.pass);
  EXPECT_TRUE(r.identity_ok);
  EXPECT_FALSE(r.identity_checked.empty());
  EXPECT_EQ(error_code([] { sandwich_build(EtaSpec::parse("1/2"), EtaSpec::parse("1/2"), set("periodic:/1"), 1, 64); }),
            "NotLexLess");
  EXPECT_EQ(error_code([] { sandwich_build(EtaSpec::parse("1/2"), EtaSpec::parse("0,3/4"), set("periodic:/1"), 1, 64); }),
            "NotLexLess");
}

TEST(Sandwich, ChainsCompose) {
  struct Triple {
    const char *a, *b, *c;
  };
  for (const Triple& t : {Triple{"0", "1/4", "1/2"}, Triple{"0", "1/3", "2/3"}, Triple{"1/8", "3/8", "7/8"}}) {
    EtaSpec a = EtaSpec::parse(t.a), b = EtaSpec::parse(t.b), c = EtaSpec::parse(t.c);
    SandwichReport ab = sandwich_build(a, b, set("periodic:/1"), 1, 64);
    SandwichReport bc = sandwich_build(b, c, set("periodic:/1"), 1, 64);
    SandwichReport ac = sandwich_build(a, c, set("periodic:/1"), 1, 64);
    ASSERT_EQ(ab.j0, 0);
    ASSERT_EQ(bc.j0, 0);
    ASSERT_EQ(ac.j0, 0);
    EXPECT_TRUE(ab.r2.pass && bc.r2.pass && ac.r2.pass);
    // log2(1/(d_ab d_bc)) < gap_ab + gap_bc = gap_ac, so the product still clears the outer threshold.
    Rational gap = c.at(0) - a.at(0);
    Interval need = log2_enclosure(1 / (ab.delta * bc.delta), 64);
    EXPECT_LT(need.hi.to_rational(), gap) << t.a << " " << t.c;
    EXPECT_LE(ac.delta, std::min(ab.delta, bc.delta)) << t.a << " " << t.c;
  }
}

TEST(SmoothOmega, RatioBoundsAndBridge) {
  SmoothOmegaReport r = smooth_omega_envelope(half(), 1024);
  EXPECT_EQ(r.first_ratio_fail, -1);
  ASSERT_EQ(r.fires.size(), r.ratio_bound.size());
  for (size_t i = 0; i < r.fires.size(); ++i) {
    long m = r.fires[i];
    // k_m = 2^(m+1) and 1/delta - 1 = 1
    EXPECT_EQ(r.ratio_bound[i].as_rational(), q(1, m)) << m;
    if (i > 0) {
      EXPECT_LT(*r.ratio_bound[i].as_rational(), *r.ratio_bound[i - 1].as_rational());
    }
  }
  // phi_omega and psi_omega differ by at most one delta factor between fires
  EXPECT_LE(r.bridge.direct_exponent, 1);
  EXPECT_GE(r.bridge.cert.exponent, r.bridge.direct_exponent);
}

TEST(SmoothOmega, ShallowDepth) {
  SmoothOmegaReport r = smooth_omega_envelope(ScaleSystem(KSpec::parse("pow2shift:4"), DeltaSpec::parse("1/2")), 8);
  EXPECT_TRUE(r.fires.empty());
  EXPECT_EQ(r.first_ratio_fail, -1);
  EXPECT_EQ(r.psi.depth(), 8);
}
