#include <gtest/gtest.h>
#include <mpfr.h>

#include <random>

#include "pofin/numeric.hpp"

using namespace pofin;

namespace {

// Independent oracle: log2(q) rounded outward at a much higher precision,
// then compared against the enclosure endpoints exactly.
class Log2Oracle {
 public:
  explicit Log2Oracle(const Rational& q) {
    mpfr_inits2(kBits, lo_, hi_, tmp_, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_q(tmp_, q.get_mpq_t(), MPFR_RNDD);
    mpfr_log2(lo_, tmp_, MPFR_RNDD);
    mpfr_set_q(tmp_, q.get_mpq_t(), MPFR_RNDU);
    mpfr_log2(hi_, tmp_, MPFR_RNDU);
  }
  ~Log2Oracle() { mpfr_clears(lo_, hi_, tmp_, static_cast<mpfr_ptr>(nullptr)); }

  // lo <= log2 q <= hi is implied by lo <= oracle_lo and oracle_hi <= hi.
  bool enclosed_by(const BigDyadic& lo, const BigDyadic& hi) {
    return cmp(lo, lo_) <= 0 && cmp(hi, hi_) >= 0;
  }

 private:
  static constexpr mpfr_prec_t kBits = 4096;
  int cmp(const BigDyadic& d, mpfr_srcptr x) {
    Rational r = d.to_rational();
    return -mpfr_cmp_q(x, r.get_mpq_t());
  }
  mpfr_t lo_, hi_, tmp_;
};

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

std::mt19937_64& rng() {
  static std::mt19937_64 g(0);
  return g;
}
long uni(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng()); }
Rational rnd_q() { return q(uni(1, 1 << 20), uni(1, 1 << 20)); }

PosValue as_log(const Rational& x, long prec) {
  Interval iv = log2_enclosure(x, prec);
  return PosValue::log2_interval(iv.lo, iv.hi);
}

}  // namespace

TEST(BigDyadic, CanonicalMantissaIsOdd) {
  BigDyadic d(BigInt(12), BigInt(3));
  EXPECT_EQ(d.mantissa(), 3);
  EXPECT_EQ(d.exponent(), 5);
  EXPECT_TRUE(BigDyadic(BigInt(0), BigInt(7)).is_zero());
  EXPECT_EQ(BigDyadic(BigInt(0), BigInt(7)).exponent(), 0);
}

TEST(BigDyadic, ArithmeticMatchesRationals) {
  for (int t = 0; t < 500; ++t) {
    BigDyadic a(BigInt(uni(-5000, 5000)), BigInt(uni(-80, 80)));
    BigDyadic b(BigInt(uni(-5000, 5000)), BigInt(uni(-80, 80)));
    EXPECT_EQ((a + b).to_rational(), a.to_rational() + b.to_rational());
    EXPECT_EQ((a - b).to_rational(), a.to_rational() - b.to_rational());
    EXPECT_EQ((a * b).to_rational(), a.to_rational() * b.to_rational());
    EXPECT_EQ(a < b, a.to_rational() < b.to_rational());
  }
}

TEST(BigDyadic, DirectedRoundingBracketsTheRational) {
  for (int t = 0; t < 300; ++t) {
    Rational x = rnd_q() - rnd_q();
    long prec = uni(1, 200);
    BigDyadic dn = BigDyadic::from_rational(x, prec, Rounding::Down);
    BigDyadic up = BigDyadic::from_rational(x, prec, Rounding::Up);
    EXPECT_LE(dn.to_rational(), x);
    EXPECT_GE(up.to_rational(), x);
    EXPECT_LE((up - dn).to_rational(), BigDyadic::pow2(BigInt(-prec)).to_rational());
  }
}

TEST(BigDyadic, ParseRoundTrip) {
  BigDyadic d(BigInt(-77), BigInt(-300));
  EXPECT_EQ(BigDyadic::parse(d.str()), d);
  EXPECT_THROW(BigDyadic::parse("3*2^"), CheckError);
}

TEST(Log2Enclosure, ContainsHighPrecisionOracle) {
  for (int t = 0; t < 300; ++t) {
    Rational x = rnd_q();
    long prec = uni(8, 400);
    Interval iv = log2_enclosure(x, prec);
    Log2Oracle o(x);
    EXPECT_TRUE(o.enclosed_by(iv.lo, iv.hi)) << x.get_str() << " at " << prec;
    EXPECT_LE(iv.width().to_rational(), BigDyadic::pow2(BigInt(1 - prec)).to_rational());
  }
}

TEST(Log2Enclosure, PowersOfTwoArePoints) {
  Interval iv = log2_enclosure(q(1, 1024), 64);
  EXPECT_TRUE(iv.is_point());
  EXPECT_EQ(iv.lo, BigDyadic::from_long(-10));
}

TEST(Log2Enclosure, DoublingPrecisionNeverWidens) {
  for (int t = 0; t < 100; ++t) {
    Rational x = rnd_q();
    long prec = uni(8, 200);
    Interval a = log2_enclosure(x, prec), b = log2_enclosure(x, 2 * prec);
    EXPECT_LE(a.lo, b.lo);
    EXPECT_GE(a.hi, b.hi);
  }
}

TEST(PosValue, ExactTimesExactStaysExact) {
  PosValue p = pv_mul(PosValue::exact(3, 4), PosValue::exact(4, 3));
  ASSERT_TRUE(p.is_exact());
  EXPECT_EQ(p.exact_value(), 1);
}

TEST(PosValue, LogPointsMultiply) {
  PosValue a = PosValue::log2_point(BigDyadic::from_long(-2));
  PosValue b = PosValue::log2_point(BigDyadic::from_long(-3));
  PosValue c = pv_mul(a, b);
  ASSERT_TRUE(c.is_point());
  EXPECT_EQ(c.as_rational(), q(1, 32));
}

TEST(PosValue, RepeatedHalvingStaysZeroWidth) {
  PosValue p;
  PosValue half = PosValue::exact(1, 2);
  for (int i = 0; i < 65536; ++i) p = pv_mul(p, half);
  ASSERT_TRUE(p.is_point());
  Interval iv = p.log2();
  EXPECT_EQ(iv.lo, BigDyadic::from_long(-65536));
}

TEST(PosValue, PowersOfTwoGoToLogForm) {
  PosValue big = PosValue::pow2(BigInt(1) << 80);
  EXPECT_FALSE(big.is_exact());
  EXPECT_TRUE(big.is_point());
  EXPECT_TRUE(PosValue::pow2(BigInt(-20)).is_exact());
}

TEST(PosValue, AddExactAndDominated) {
  PosValue s = pv_add(PosValue::exact(1, 3), PosValue::exact(1, 6));
  ASSERT_TRUE(s.is_exact());
  EXPECT_EQ(s.exact_value(), q(1, 2));

  PosValue tiny = PosValue::pow2(BigInt(-1000000));
  PosValue d = pv_add(PosValue(), tiny, 64);
  Interval iv = d.log2(64);
  EXPECT_EQ(iv.lo, BigDyadic());
  EXPECT_GT(iv.hi, BigDyadic());
  EXPECT_LE(iv.hi.to_rational(), BigDyadic::pow2(BigInt(-62)).to_rational());
}

TEST(PosValue, TelescopingSumIsExact) {
  // 4^-n + sum_{1<=i<=n} 2^-(i+1) 4^(i-n) = 2^-n
  for (long n = 1; n <= 64; ++n) {
    PosValue acc = PosValue::pow2(BigInt(-2 * n));
    for (long i = 1; i <= n; ++i) acc = pv_add(acc, PosValue::pow2(BigInt(-(i + 1) + 2 * (i - n))));
    ASSERT_TRUE(acc.is_exact()) << n;
    EXPECT_EQ(acc.exact_value(), PosValue::pow2(BigInt(-n)).exact_value()) << n;
  }
}

TEST(PosValue, EnclosureOfRandomExpressionTrees) {
  for (int t = 0; t < 200; ++t) {
    Rational truth = rnd_q();
    PosValue v = uni(0, 1) ? PosValue::exact(truth) : as_log(truth, uni(64, 256));
    for (int d = 0; d < 12; ++d) {
      Rational r = rnd_q();
      PosValue w = uni(0, 1) ? PosValue::exact(r) : as_log(r, uni(64, 256));
      switch (uni(0, 3)) {
        case 0: v = pv_mul(v, w); truth *= r; break;
        case 1: v = pv_div(v, w); truth /= r; break;
        case 2: v = pv_add(v, w); truth += r; break;
        case 3: v = pv_max(v, w); truth = std::max(truth, r); break;
      }
    }
    if (v.is_exact()) {
      EXPECT_EQ(v.exact_value(), truth);
      continue;
    }
    Log2Oracle o(truth);
    EXPECT_TRUE(o.enclosed_by(v.log_iv().lo, v.log_iv().hi)) << "trial " << t;
  }
}

TEST(PosValue, Sub) {
  EXPECT_EQ(pv_sub(PosValue::exact(3, 4), PosValue::exact(1, 4)).value->exact_value(), q(1, 2));
  EXPECT_EQ(pv_sub(PosValue::exact(1, 4), PosValue::exact(1, 4)).sign, SubSign::Zero);
  EXPECT_EQ(pv_sub(PosValue::exact(1, 8), PosValue::exact(1, 4)).sign, SubSign::Negative);
  PosValue r2 = pv_pow_rat(PosValue::exact(2), q(1, 2));
  EXPECT_EQ(pv_sub(r2, PosValue::exact(7, 5)).sign, SubSign::Positive);
  EXPECT_EQ(pv_sub(PosValue::exact(17, 12), r2).sign, SubSign::Positive);
}

TEST(PosValue, RationalPowers) {
  EXPECT_EQ(pv_pow_rat(PosValue::exact(1, 4), q(1, 2)).as_rational(), q(1, 2));
  PosValue r2 = pv_pow_rat(PosValue::exact(2), q(1, 2));
  ASSERT_TRUE(r2.is_point());
  EXPECT_EQ(r2.log2().lo.to_rational(), q(1, 2));
  PosValue r3 = pv_pow_rat(PosValue::exact(3), q(1, 2), 64);
  Interval iv = r3.log2(64);
  EXPECT_LE(iv.width().to_rational(), BigDyadic::pow2(BigInt(-62)).to_rational());
  mpfr_t x;
  mpfr_init2(x, 1024);
  mpfr_set_ui(x, 3, MPFR_RNDN);
  mpfr_log2(x, x, MPFR_RNDN);
  mpfr_div_ui(x, x, 2, MPFR_RNDN);
  EXPECT_LT(mpfr_cmp_q(x, iv.hi.to_rational().get_mpq_t()), 0);
  EXPECT_GT(mpfr_cmp_q(x, iv.lo.to_rational().get_mpq_t()), 0);
  mpfr_clear(x);
}

TEST(PosValue, HugeExponentsLeaveExactForm) {
  // |k| times the operand size overflows a long; the result must fall back to log form
  BigInt k = BigInt(1) << 62;
  PosValue a = pv_pow_int(PosValue::exact(3), -k);
  EXPECT_FALSE(a.is_exact());
  Interval la = a.log2();
  EXPECT_LT(la.hi.to_rational(), Rational(-k));
  BigInt k2 = BigInt(1) << 62;
  PosValue b = pv_pow_rat(PosValue::exact(9), Rational(k2));
  EXPECT_FALSE(b.is_exact());
  EXPECT_GT(b.log2().lo.to_rational(), Rational(3 * k2));
}

TEST(Compare, SpecExamples) {
  EXPECT_TRUE(pv_cmp_scaled(PosValue::exact(1), 2, PosValue::exact(1)).is_true());
  EXPECT_TRUE(pv_cmp_scaled(PosValue::exact(3), 2, PosValue::exact(1)).is_false());
  BigDyadic t(BigInt(1), BigInt(-3)), s(BigInt(1), BigInt(-4));
  PosValue a = PosValue::log2_interval(-t, t), b = PosValue::log2_interval(-s, s);
  Verdict3 v = pv_cmp_scaled(a, 1, b);
  EXPECT_TRUE(v.is_unknown());
  EXPECT_FALSE(v.precision_exhausted);  // stored enclosures cannot be refined
}

TEST(Compare, EscalatesPrecisionForExactOperands) {
  Rational a = 1 + PosValue::pow2(BigInt(-300)).exact_value();
  PosValue one = PosValue::log2_point(BigDyadic());
  EXPECT_TRUE(pv_cmp_scaled(PosValue::exact(a), 1, one).is_false());
  NumCfg capped;
  capped.prec_cap = 256;
  Verdict3 v = pv_cmp_scaled(PosValue::exact(a), 1, one, capped);
  EXPECT_TRUE(v.is_unknown());
  EXPECT_TRUE(v.precision_exhausted);
}

TEST(Compare, NeverContradictsExactOracle) {
  long decided = 0;
  for (int t = 0; t < 10000; ++t) {
    Rational a = rnd_q(), b = rnd_q(), c = rnd_q();
    if (c < 1) c = 1 / c;
    if (uni(0, 3) == 0) a = c * b;
    PosValue pa = uni(0, 1) ? PosValue::exact(a) : as_log(a, uni(64, 300));
    PosValue pb = uni(0, 1) ? PosValue::exact(b) : as_log(b, uni(64, 300));
    Verdict3 v = pv_cmp_scaled(pa, c, pb);
    if (v.is_unknown()) continue;
    ++decided;
    ASSERT_EQ(v.is_true(), a <= c * b) << a.get_str() << " <= " << c.get_str() << " * " << b.get_str();
  }
  EXPECT_GT(decided, 5000);
}

TEST(Compare, MinPow2ExponentIsTight) {
  for (int t = 0; t < 300; ++t) {
    Rational a = rnd_q(), b = rnd_q();
    long j = min_pow2_exponent(PosValue::exact(a), PosValue::exact(b));
    Rational c = PosValue::pow2(BigInt(j)).exact_value();
    EXPECT_LE(a, c * b);
    EXPECT_GT(a, c / 2 * b);
  }
}

TEST(Compare, NonNegZero) {
  EXPECT_TRUE(nn_le(NonNeg::zero(), PosValue::exact(1, 9)).is_true());
  EXPECT_TRUE(nn_le(PosValue::exact(1, 9), NonNeg::zero()).is_false());
  EXPECT_TRUE(nn_mul(NonNeg::zero(), PosValue::exact(5)).is_zero());
  EXPECT_EQ(nn_add(NonNeg::zero(), PosValue::exact(5)).value().exact_value(), 5);
}

TEST(Text, Pow2AndRationals) {
  EXPECT_EQ(pow2_str(-3), "2^-3");
  EXPECT_EQ(parse_pow2_str("2^17"), 17);
  EXPECT_EQ(parse_rational("6/4"), q(3, 2));
  EXPECT_EQ(rational_str(q(3)), "3/1");
  try {
    parse_rational("1/0");
    FAIL() << "accepted 1/0";
  } catch (const CheckError& e) {
    EXPECT_EQ(e.code(), "ParseError");
  }
}

TEST(Config, PrecisionCapFromEnvironment) {
  setenv("POFIN_PREC_CAP", "4096", 1);
  EXPECT_EQ(NumCfg::from_env().prec_cap, 4096);
  unsetenv("POFIN_PREC_CAP");
  EXPECT_EQ(NumCfg::from_env().prec_cap, kDefaultPrecCap);
}
