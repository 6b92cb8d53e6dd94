#include <gtest/gtest.h>

#include <random>

#include "pofin/dyadic_function.hpp"
#include "pofin/relation_checks.hpp"

using namespace pofin;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

DyadicFunction from_rationals(long depth, const std::function<Rational(long)>& f) {
  std::vector<NonNeg> s;
  for (long n = 0; n <= depth; ++n) s.push_back(NonNeg::from_rational(f(n)));
  return DyadicFunction(std::move(s));
}

template <class T, class V>
T as(const V& v) {
  EXPECT_TRUE(std::holds_alternative<T>(v));
  return std::get<T>(v);
}

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const CheckError& e) {
    return e.code();
  }
  return "none";
}

std::mt19937_64 rng(2);
long uni(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

}  // namespace

TEST(DyadicFunction, DepthFloor) {
  EXPECT_EQ(error_code([] { builtin_function("const:1", 7); }), "InvalidDepth");
  EXPECT_EQ(error_code([] { builtin_function("wobble:1", 16); }), "ParseError");
  DyadicFunction f = builtin_function("idpow:1", 16);
  EXPECT_EQ(f.depth(), 16);
  EXPECT_EQ(f.at(5).value().as_rational(), q(1, 32));
  EXPECT_EQ(f.truncated(9).depth(), 9);
}

TEST(EssIncr, Examples) {
  EXPECT_EQ(as<EssIncrWitness>(ess_incr_witness(builtin_function("idpow:1", 32))).exponent, 0);
  DyadicFunction alt = from_rationals(32, [](long n) { return Rational(n % 2 ? 2 : 1); });
  EXPECT_EQ(as<EssIncrWitness>(ess_incr_witness(alt)).exponent, 1);
  NumCfg cfg;
  cfg.cap_c = 16;
  const auto& v = as<EssIncrViolation>(ess_incr_witness(builtin_function("pow2:1", 32), cfg));
  EXPECT_LE(v.m, v.n);
}

TEST(EssIncr, MajorantSandwich) {
  for (int t = 0; t < 30; ++t) {
    std::vector<long> vals;
    for (long n = 0; n <= 40; ++n) vals.push_back(uni(1, 9));
    DyadicFunction f = from_rationals(40, [&](long n) { return q(vals[n], 1 + n / 8); });
    const auto& w = as<EssIncrWitness>(ess_incr_witness(f));
    Rational C = EquivCert{w.exponent, 0, 0}.C();
    for (long n = 0; n <= 40; ++n) {
      Rational g = *w.majorant[n].value().as_rational(), fn = *f.at(n).value().as_rational();
      EXPECT_LE(fn, g);
      EXPECT_LE(g, C * fn);
      if (n > 0) {
        EXPECT_LE(g, *w.majorant[n - 1].value().as_rational());
      }
    }
  }
}

TEST(Equiv, Examples) {
  DyadicFunction f = builtin_function("idpow:1", 64);
  DyadicFunction g = from_rationals(64, [](long n) -> Rational { return 3 / PosValue::pow2(BigInt(n)).exact_value(); });
  EXPECT_EQ(as<EquivCert>(equiv_witness(f, g, 0, 64)).exponent, 2);

  NumCfg cfg;
  cfg.cap_c = 4;
  const auto& d = as<EquivDivergence>(equiv_witness(builtin_function("const:1", 64), builtin_function("inv_t:0", 64), 0, 64, cfg));
  ASSERT_FALSE(d.escapes.empty());
  for (size_t i = 1; i < d.escapes.size(); ++i) EXPECT_GT(d.escapes[i].second, d.escapes[i - 1].second);

  DyadicFunction z = from_rationals(16, [](long n) { return Rational(n == 16 ? 0 : 1); });
  EXPECT_EQ(error_code([&] { equiv_witness(z, builtin_function("const:1", 16), 0, 16); }), "MixedZero");
}

TEST(Equiv, AlmostEqualWeightsDifferByFires) {
  ScaleSystem s = ScaleSystem::pow2(q(1, 2));
  const long depth = 1 << 10;
  SubsetSpec ev = SubsetSpec::parse("periodic:/10");
  DyadicFunction fe = from_weight(weight_seq(ev, s, depth), depth);
  // Blocks 0..3 hold m in [0, 41); toggling block l changes |I_l| fires below depth.
  struct Case {
    const char* set;
    long d;
  };
  // evens without block 0 (m = 0); evens with block 1 (m = 1, 2); evens with blocks 1, 3, 5, where
  // block 3 starts at m = 10 and k_10 = 2^11 is past depth.
  for (Case c : {Case{"periodic:0/01", 1}, Case{"periodic:11/10", 2}, Case{"periodic:111111/10", 2}}) {
    DyadicFunction fo = from_weight(weight_seq(SubsetSpec::parse(c.set), s, depth), depth);
    EXPECT_EQ(as<EquivCert>(equiv_witness(fe, fo, 0, depth)).exponent, c.d) << c.set;
  }
}

TEST(Equiv, SymmetricAndSubmultiplicative) {
  for (int t = 0; t < 40; ++t) {
    std::vector<DyadicFunction> fs;
    for (int i = 0; i < 3; ++i) {
      std::vector<long> vals;
      for (long n = 0; n <= 24; ++n) vals.push_back(uni(1, 40));
      fs.push_back(from_rationals(24, [vals](long n) { return Rational(vals[n]); }));
    }
    long fg = as<EquivCert>(equiv_witness(fs[0], fs[1], 0, 24)).exponent;
    long gf = as<EquivCert>(equiv_witness(fs[1], fs[0], 0, 24)).exponent;
    long gh = as<EquivCert>(equiv_witness(fs[1], fs[2], 0, 24)).exponent;
    long fh = as<EquivCert>(equiv_witness(fs[0], fs[2], 0, 24)).exponent;
    EXPECT_EQ(fg, gf);
    EXPECT_LE(fh, fg + gh);
  }
}

TEST(Equiv, CertificateRecheck) {
  DyadicFunction f = builtin_function("idpow:1", 32);
  DyadicFunction g = from_rationals(32, [](long n) -> Rational { return 3 / PosValue::pow2(BigInt(n)).exact_value(); });
  EquivCert c = as<EquivCert>(equiv_witness(f, g, 0, 32));
  EXPECT_TRUE(check_equiv_cert(c, f, g).verdict.is_true());
  EquivCert weak = c;
  weak.exponent = 1;
  EquivCheck bad = check_equiv_cert(weak, f, g);
  EXPECT_TRUE(bad.verdict.is_false());
  EXPECT_EQ(bad.index, 0);
  EquivCert wide = c;
  wide.n_hi = 33;
  EXPECT_TRUE(check_equiv_cert(wide, f, g).verdict.is_false());
}

TEST(StepBridge, IdenticalFunctions) {
  DyadicFunction f = builtin_function("inv_t:0", 32);
  std::vector<long> all;
  for (long n = 0; n <= 32; ++n) all.push_back(n);
  BridgeReport r = step_bridge_check(f, f, all, q(1, 2), 1);
  EXPECT_EQ(r.direct_exponent, 0);
  EXPECT_GE(r.assembled, 1);
  EXPECT_GE(r.cert.exponent, r.direct_exponent);
}

TEST(StepBridge, StepAgainstInterpolant) {
  ScaleSystem s = ScaleSystem::pow2(q(1, 2));
  const long depth = 256;
  WeightSeq w = weight_seq(SubsetSpec::parse("periodic:/1"), s, depth);
  DyadicFunction step = from_weight(w, depth);
  // geometric interpolation of the fire values, sampled on the grid
  std::vector<long> xs{0};
  for (const auto& f : w.fires()) xs.push_back(f.n);
  if (xs.back() != depth) xs.push_back(depth);
  DyadicFunction interp = from_rationals(depth, [&](long n) -> Rational {
    long m = -1;
    for (const auto& f : w.fires()) {
      if (f.n <= n) m = f.m;
    }
    // halfway value between fires, so the two differ by at most 1/delta
    Rational cur = PosValue::pow2(BigInt(-(m + 1))).exact_value();
    bool at_fire = std::any_of(w.fires().begin(), w.fires().end(), [&](const Fire& f) { return f.n == n; });
    return at_fire || n == 0 ? cur : cur * q(3, 4);
  });
  BridgeReport r = step_bridge_check(step, interp, xs, q(1, 2), 2);
  EXPECT_GE(r.cert.exponent, r.direct_exponent);
  EXPECT_LE(r.direct_exponent, 1);

  DyadicFunction bumped = from_rationals(depth, [&](long n) -> Rational {
    Rational v = *interp.at(n).value().as_rational();
    return n == 100 ? v * 100 : v;
  });
  EXPECT_EQ(error_code([&] { step_bridge_check(step, bumped, xs, q(1, 2), 2); }), "HypothesisFailed");
}

TEST(SquareInvariance, Examples) {
  SquareReport one = square_invariance_check(builtin_function("const:1", 32), 1);
  EXPECT_EQ(one.cert.exponent, 0);
  SquareReport inv = square_invariance_check(builtin_function("inv_t:0", 64), q(1, 2));
  EXPECT_EQ(inv.cert.exponent, 1);
  EXPECT_LE(inv.cert.exponent, inv.proof_exponent);
  EXPECT_EQ(error_code([] { square_invariance_check(builtin_function("idpow:1", 32), q(1, 2)); }), "HypothesisFailed");
}

TEST(Relation, R2ConstantsForPowers) {
  for (long a = 1; a <= 3; ++a) {
    R2Report r = check_R1_R2(RelationSpec(a, builtin_function("const:1", 16)), 16);
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.r1);
    EXPECT_EQ(r.exponent, a - 1);
  }
}

TEST(Relation, R2ForOmegaWeightWithinProofBound) {
  ScaleSystem s = ScaleSystem::pow2(q(1, 2));
  const long depth = 64;
  RelationSpec r(1, builtin_function("const:1", depth), weight_seq(SubsetSpec::parse("periodic:/1"), s, depth));
  R2Report rep = check_R1_R2(r, depth, q(1, 2));
  ASSERT_TRUE(rep.pass);
  ASSERT_TRUE(rep.proof_exponent);
  EXPECT_LE(rep.exponent, *rep.proof_exponent);
}

TEST(Relation, A1Examples) {
  A1Cert flat = check_A1(RelationSpec(1, builtin_function("const:1", 32)), 32, Rational(1));
  EXPECT_GT(flat.epsilon, 0);
  EXPECT_LT(flat.epsilon, q(1, 2));

  ScaleSystem s = ScaleSystem::pow2(q(1, 2));
  RelationSpec w(1, builtin_function("const:1", 256), weight_seq(SubsetSpec::parse("periodic:/1"), s, 256));
  A1Cert c = check_A1(w, 256);
  EXPECT_GT(c.epsilon, 0);
  EXPECT_LE(c.epsilon_psi, c.epsilon);

  EXPECT_EQ(error_code([] { check_A1(RelationSpec(1, builtin_function("idpow:1", 32)), 32, q(1, 2)); }),
            "HypothesisFailed");
}

TEST(Relation, A2Witnesses) {
  ScaleSystem s = ScaleSystem::pow2(q(1, 2));
  const long depth = 256;
  DyadicFunction uw = from_weight(weight_seq(SubsetSpec::parse("periodic:/1"), s, depth), depth);
  DyadicFunction one = builtin_function("const:1", depth);
  std::vector<long> idx;
  std::vector<PosValue> bound;
  for (long m = 0; (2L << m) <= depth; ++m) {
    idx.push_back(2L << m);
    bound.push_back(PosValue::pow2(BigInt(-(m + 1))));
  }
  EXPECT_EQ(a2_liminf_witness(uw, one, idx, bound).outcome, A2Result::Outcome::Verified);
  EXPECT_EQ(a2_liminf_witness(one, uw, idx, bound).outcome, A2Result::Outcome::NoWitness);
  EXPECT_EQ(a2_liminf_witness(one, one, idx, bound).outcome, A2Result::Outcome::NoWitness);

  std::vector<PosValue> tight = bound;
  for (size_t l = 3; l < tight.size(); ++l) tight[l] = PosValue::pow2(BigInt(-static_cast<long>(l) - 2));
  A2Result v = a2_liminf_witness(uw, one, idx, tight);
  EXPECT_EQ(v.outcome, A2Result::Outcome::BoundViolated);
  EXPECT_EQ(v.l, 3);

  std::vector<PosValue> flat(bound.size(), PosValue::exact(1, 2));
  EXPECT_EQ(a2_liminf_witness(uw, one, idx, flat).outcome, A2Result::Outcome::InvalidBound);
}
