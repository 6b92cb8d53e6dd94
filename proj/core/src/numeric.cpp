#include "pofin/numeric.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace pofin {

namespace {

constexpr unsigned long kMaxShift = 1UL << 26;
// Rationals 2^e with |e| above this stay in log form.
constexpr long kExactPow2Limit = 1L << 14;
// Exact powers whose bit size would exceed this go to log form.
constexpr long kExactPowBits = 1L << 16;

long bitlen(const BigInt& x) {
  if (x == 0) return 0;
  return static_cast<long>(mpz_sizeinbase(x.get_mpz_t(), 2));
}

bool is_pow2(const BigInt& x) {
  return x > 0 && static_cast<long>(mpz_scan1(x.get_mpz_t(), 0)) == bitlen(x) - 1;
}

long to_long(const BigInt& x, const char* what) {
  if (!x.fits_slong_p()) throw std::overflow_error(std::string("value out of range: ") + what);
  return x.get_si();
}

BigInt shl(const BigInt& x, unsigned long k) {
  BigInt r;
  mpz_mul_2exp(r.get_mpz_t(), x.get_mpz_t(), k);
  return r;
}

void ensure_mpfr_range() {
  static const bool once = [] {
    mpfr_set_emax(mpfr_get_emax_max());
    mpfr_set_emin(mpfr_get_emin_min());
    return true;
  }();
  (void)once;
}

class Mpfr {
 public:
  explicit Mpfr(long prec) {
    ensure_mpfr_range();
    mpfr_init2(x_, static_cast<mpfr_prec_t>(std::max(prec, 32L)));
  }
  ~Mpfr() { mpfr_clear(x_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return x_; }

 private:
  mpfr_t x_;
};

BigDyadic from_mpfr(mpfr_srcptr x) {
  if (mpfr_zero_p(x)) return {};
  if (!mpfr_number_p(x)) throw std::domain_error("non-finite intermediate");
  BigInt m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
  return BigDyadic(m, BigInt(static_cast<long>(e)));
}

void set_mpfr(mpfr_ptr out, const BigDyadic& d, mpfr_rnd_t rnd) {
  mpfr_set_z(out, d.mantissa().get_mpz_t(), rnd);
  mpfr_mul_2si(out, out, to_long(d.exponent(), "dyadic exponent"), rnd);
}

// Lower / upper bounds of log2(1 + 2^-t), t >= 0 dyadic.
BigDyadic log1p2_lower(const BigDyadic& t, long prec) {
  if (t > BigDyadic::from_long(prec + 4)) return {};
  Mpfr T(prec + 64), e(prec + 64);
  set_mpfr(T.get(), t, MPFR_RNDU);
  mpfr_neg(T.get(), T.get(), MPFR_RNDD);
  mpfr_exp2(e.get(), T.get(), MPFR_RNDD);
  mpfr_add_ui(e.get(), e.get(), 1, MPFR_RNDD);
  mpfr_log2(e.get(), e.get(), MPFR_RNDD);
  return from_mpfr(e.get()).round(prec, Rounding::Down);
}

BigDyadic log1p2_upper(const BigDyadic& t, long prec) {
  if (t > BigDyadic::from_long(prec)) return BigDyadic::pow2(BigInt(1 - prec));
  Mpfr T(prec + 64), e(prec + 64);
  set_mpfr(T.get(), t, MPFR_RNDD);
  mpfr_neg(T.get(), T.get(), MPFR_RNDU);
  mpfr_exp2(e.get(), T.get(), MPFR_RNDU);
  mpfr_add_ui(e.get(), e.get(), 1, MPFR_RNDU);
  mpfr_log2(e.get(), e.get(), MPFR_RNDU);
  return from_mpfr(e.get()).round(prec, Rounding::Up);
}

// Bounds of log2(1 - 2^-t), t > 0 dyadic; nullopt when 1 - 2^-t cannot be
// separated from zero at this precision.
std::optional<BigDyadic> log1m2_lower(const BigDyadic& t, long prec) {
  Mpfr T(prec + 64), e(prec + 64);
  if (t > BigDyadic::from_long(prec + 4)) return BigDyadic::pow2(BigInt(1 - prec)) * BigDyadic::from_long(-1);
  set_mpfr(T.get(), t, MPFR_RNDD);
  mpfr_neg(T.get(), T.get(), MPFR_RNDU);
  mpfr_exp2(e.get(), T.get(), MPFR_RNDU);
  mpfr_ui_sub(e.get(), 1, e.get(), MPFR_RNDD);
  if (mpfr_sgn(e.get()) <= 0) return std::nullopt;
  mpfr_log2(e.get(), e.get(), MPFR_RNDD);
  return from_mpfr(e.get()).round(prec, Rounding::Down);
}

BigDyadic log1m2_upper(const BigDyadic& t, long prec) {
  if (t > BigDyadic::from_long(prec)) return {};
  Mpfr T(prec + 64), e(prec + 64);
  set_mpfr(T.get(), t, MPFR_RNDU);
  mpfr_neg(T.get(), T.get(), MPFR_RNDD);
  mpfr_exp2(e.get(), T.get(), MPFR_RNDD);
  mpfr_ui_sub(e.get(), 1, e.get(), MPFR_RNDU);
  mpfr_log2(e.get(), e.get(), MPFR_RNDU);
  return from_mpfr(e.get()).round(prec, Rounding::Up);
}

BigDyadic scale_rounded(const BigDyadic& x, const Rational& q, long prec, Rounding r) {
  if (is_pow2(q.get_den())) {
    BigDyadic qd = *BigDyadic::from_rational_exact(q);
    return (x * qd).round(prec, r);
  }
  return BigDyadic::from_rational(x.to_rational() * q, prec, r);
}

// Multiplies a log interval by q; keeps a point exact when the product is dyadic.
Interval scale_interval(const Interval& iv, const Rational& q, long prec) {
  if (iv.is_point() && is_pow2(q.get_den())) {
    BigDyadic p = iv.lo * *BigDyadic::from_rational_exact(q);
    return {p, p};
  }
  if (q >= 0) return {scale_rounded(iv.lo, q, prec, Rounding::Down), scale_rounded(iv.hi, q, prec, Rounding::Up)};
  return {scale_rounded(iv.hi, q, prec, Rounding::Down), scale_rounded(iv.lo, q, prec, Rounding::Up)};
}

PosValue normalize_point(const Interval& iv) {
  if (iv.is_point() && iv.lo.is_integer() && abs(iv.lo.floor()) <= kExactPow2Limit) {
    return PosValue::pow2(iv.lo.floor());
  }
  return PosValue::log2_interval(iv.lo, iv.hi);
}

std::optional<long> pow2_exponent(const Rational& q) {
  if (is_pow2(q.get_num()) && is_pow2(q.get_den())) return bitlen(q.get_num()) - bitlen(q.get_den());
  return std::nullopt;
}

}  // namespace

CheckError::CheckError(std::string code, std::string detail, std::optional<long> index)
    : std::runtime_error(code + (detail.empty() ? "" : ": " + detail) +
                         (index ? " at " + std::to_string(*index) : "")),
      code_(std::move(code)),
      index_(index) {}

NumCfg NumCfg::from_env() {
  NumCfg c;
  if (const char* s = std::getenv("POFIN_PREC_CAP")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && v >= 64) c.prec_cap = v;
  }
  return c;
}

// ---------------------------------------------------------------- BigDyadic

BigDyadic::BigDyadic(BigInt mantissa, BigInt exponent) : m_(std::move(mantissa)), e_(std::move(exponent)) {
  normalize();
}

void BigDyadic::normalize() {
  if (m_ == 0) {
    e_ = 0;
    return;
  }
  unsigned long tz = mpz_scan1(m_.get_mpz_t(), 0);
  if (tz > 0) {
    mpz_tdiv_q_2exp(m_.get_mpz_t(), m_.get_mpz_t(), tz);
    e_ += tz;
  }
}

BigDyadic BigDyadic::from_long(long v) { return BigDyadic(BigInt(v), BigInt(0)); }
BigDyadic BigDyadic::from_int(const BigInt& v) { return BigDyadic(v, BigInt(0)); }
BigDyadic BigDyadic::pow2(const BigInt& e) { return BigDyadic(BigInt(1), e); }

std::optional<BigDyadic> BigDyadic::from_rational_exact(const Rational& q) {
  if (!is_pow2(q.get_den())) return std::nullopt;
  return BigDyadic(q.get_num(), BigInt(-(bitlen(q.get_den()) - 1)));
}

BigDyadic BigDyadic::from_rational(const Rational& q, long prec, Rounding r) {
  if (auto d = from_rational_exact(q)) return d->round(prec, r);
  BigInt scaled = shl(q.get_num(), static_cast<unsigned long>(prec));
  BigInt out;
  if (r == Rounding::Down) {
    mpz_fdiv_q(out.get_mpz_t(), scaled.get_mpz_t(), q.get_den().get_mpz_t());
  } else {
    mpz_cdiv_q(out.get_mpz_t(), scaled.get_mpz_t(), q.get_den().get_mpz_t());
  }
  return BigDyadic(out, BigInt(-prec));
}

BigInt BigDyadic::top_bit() const {
  if (m_ == 0) throw std::domain_error("top_bit of zero");
  return BigInt(bitlen(m_) - 1) + e_;
}

Rational BigDyadic::to_rational() const {
  if (m_ == 0) return Rational(0);
  if (abs(e_) > BigInt(static_cast<long>(kMaxShift))) throw std::overflow_error("dyadic exponent too large for a rational");
  long e = e_.get_si();
  if (e >= 0) return Rational(shl(m_, static_cast<unsigned long>(e)));
  Rational q(m_, shl(BigInt(1), static_cast<unsigned long>(-e)));
  q.canonicalize();
  return q;
}

BigInt BigDyadic::floor() const {
  if (e_ >= 0) return shl(m_, static_cast<unsigned long>(to_long(e_, "floor")));
  BigInt r;
  BigInt sh = -e_;
  if (sh > BigInt(bitlen(m_) + 1)) return m_ < 0 ? BigInt(-1) : BigInt(0);
  mpz_fdiv_q_2exp(r.get_mpz_t(), m_.get_mpz_t(), sh.get_ui());
  return r;
}

BigInt BigDyadic::ceil() const {
  if (e_ >= 0) return shl(m_, static_cast<unsigned long>(to_long(e_, "ceil")));
  BigInt r;
  BigInt sh = -e_;
  if (sh > BigInt(bitlen(m_) + 1)) return m_ > 0 ? BigInt(1) : BigInt(0);
  mpz_cdiv_q_2exp(r.get_mpz_t(), m_.get_mpz_t(), sh.get_ui());
  return r;
}

BigDyadic BigDyadic::round(long prec, Rounding r) const {
  BigInt g(-prec);
  if (m_ == 0 || e_ >= g) return *this;
  BigInt shift = g - e_;
  if (shift > BigInt(bitlen(m_) + 2)) {
    // |x| < 2^(g-2): the result is 0 or one grid step.
    bool up = (r == Rounding::Up);
    if (m_ > 0) return up ? pow2(g) : BigDyadic();
    return up ? BigDyadic() : BigDyadic(BigInt(-1), g);
  }
  BigInt q;
  if (r == Rounding::Down) {
    mpz_fdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), shift.get_ui());
  } else {
    mpz_cdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), shift.get_ui());
  }
  return BigDyadic(q, g);
}

BigDyadic BigDyadic::mul_2exp(const BigInt& k) const {
  if (m_ == 0) return *this;
  return BigDyadic(m_, e_ + k);
}

double BigDyadic::to_double() const {
  if (m_ == 0) return 0.0;
  signed long ex = 0;
  double d = mpz_get_d_2exp(&ex, m_.get_mpz_t());
  BigInt total = e_ + ex;
  if (total > 2000) return m_ > 0 ? HUGE_VAL : -HUGE_VAL;
  if (total < -2000) return 0.0;
  return std::ldexp(d, static_cast<int>(total.get_si()));
}

std::string BigDyadic::str() const { return m_.get_str() + "*2^" + e_.get_str(); }

BigDyadic BigDyadic::parse(std::string_view s) {
  auto fail = [&] { throw CheckError("ParseError", "bad dyadic '" + std::string(s) + "'"); };
  std::string str(s);
  auto pos = str.find("*2^");
  BigInt m, e(0);
  try {
    if (pos == std::string::npos) {
      if (m.set_str(str, 10) != 0) fail();
    } else {
      if (m.set_str(str.substr(0, pos), 10) != 0) fail();
      if (e.set_str(str.substr(pos + 3), 10) != 0) fail();
    }
  } catch (const std::invalid_argument&) {
    fail();
  }
  return BigDyadic(m, e);
}

BigDyadic BigDyadic::operator-() const { return BigDyadic(-m_, e_); }

BigDyadic operator+(const BigDyadic& a, const BigDyadic& b) {
  if (a.m_ == 0) return b;
  if (b.m_ == 0) return a;
  BigInt d = a.e_ - b.e_;
  if (abs(d) > BigInt(static_cast<long>(kMaxShift))) throw std::overflow_error("exact dyadic sum too wide");
  if (d >= 0) return BigDyadic(shl(a.m_, d.get_ui()) + b.m_, b.e_);
  BigInt nd = -d;
  return BigDyadic(a.m_ + shl(b.m_, nd.get_ui()), a.e_);
}

BigDyadic operator-(const BigDyadic& a, const BigDyadic& b) { return a + (-b); }

BigDyadic operator*(const BigDyadic& a, const BigDyadic& b) { return BigDyadic(a.m_ * b.m_, a.e_ + b.e_); }

std::strong_ordering operator<=>(const BigDyadic& a, const BigDyadic& b) {
  int sa = a.sign(), sb = b.sign();
  if (sa != sb) return sa <=> sb;
  if (sa == 0) return std::strong_ordering::equal;
  BigInt ta = a.top_bit(), tb = b.top_bit();
  std::strong_ordering mag = std::strong_ordering::equal;
  if (ta != tb) {
    mag = (ta < tb) ? std::strong_ordering::less : std::strong_ordering::greater;
  } else {
    BigInt ma = abs(a.m_), mb = abs(b.m_);
    if (a.e_ > b.e_) {
      ma = shl(ma, BigInt(a.e_ - b.e_).get_ui());
    } else if (b.e_ > a.e_) {
      mb = shl(mb, BigInt(b.e_ - a.e_).get_ui());
    }
    int c = cmp(ma, mb);
    mag = c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  if (sa > 0) return mag;
  if (mag == std::strong_ordering::less) return std::strong_ordering::greater;
  if (mag == std::strong_ordering::greater) return std::strong_ordering::less;
  return mag;
}

BigDyadic add_rounded(const BigDyadic& a, const BigDyadic& b, long prec, Rounding r) {
  if (a.is_zero()) return b.round(prec, r);
  if (b.is_zero()) return a.round(prec, r);
  if (abs(a.exponent() - b.exponent()) <= BigInt(static_cast<long>(kMaxShift))) return (a + b).round(prec, r);
  const BigDyadic& big = a.top_bit() >= b.top_bit() ? a : b;
  const BigDyadic& small = a.top_bit() >= b.top_bit() ? b : a;
  BigInt g(-prec);
  if (small.top_bit() >= g - 2) throw std::overflow_error("dyadic sum beyond representable range");
  BigDyadic proxy;
  if (r == Rounding::Down && small.sign() < 0) proxy = BigDyadic(BigInt(-1), g - 2);
  if (r == Rounding::Up && small.sign() > 0) proxy = BigDyadic::pow2(g - 2);
  return (big + proxy).round(prec, r);
}

// ----------------------------------------------------------------- log2

Interval log2_enclosure(const Rational& q, long prec) {
  if (q <= 0) throw std::domain_error("log2 of non-positive value");
  const BigInt& num = q.get_num();
  const BigInt& den = q.get_den();
  if (auto e = pow2_exponent(q)) {
    BigDyadic p = BigDyadic::from_long(*e);
    return {p, p};
  }
  long k = bitlen(num) - bitlen(den);
  Mpfr n(prec + 64), d(prec + 64), r(prec + 64);
  Interval out;
  mpfr_set_z(n.get(), num.get_mpz_t(), MPFR_RNDD);
  mpfr_set_z(d.get(), den.get_mpz_t(), MPFR_RNDU);
  mpfr_div(r.get(), n.get(), d.get(), MPFR_RNDD);
  mpfr_mul_2si(r.get(), r.get(), -k, MPFR_RNDD);
  mpfr_log2(r.get(), r.get(), MPFR_RNDD);
  out.lo = add_rounded(from_mpfr(r.get()), BigDyadic::from_long(k), prec, Rounding::Down);
  mpfr_set_z(n.get(), num.get_mpz_t(), MPFR_RNDU);
  mpfr_set_z(d.get(), den.get_mpz_t(), MPFR_RNDD);
  mpfr_div(r.get(), n.get(), d.get(), MPFR_RNDU);
  mpfr_mul_2si(r.get(), r.get(), -k, MPFR_RNDU);
  mpfr_log2(r.get(), r.get(), MPFR_RNDU);
  out.hi = add_rounded(from_mpfr(r.get()), BigDyadic::from_long(k), prec, Rounding::Up);
  return out;
}

Interval log2_enclosure(const BigDyadic& x, long prec) {
  if (x.sign() <= 0) throw std::domain_error("log2 of non-positive dyadic");
  Interval m = log2_enclosure(Rational(x.mantissa()), prec);
  BigDyadic e = BigDyadic::from_int(x.exponent());
  if (m.is_point()) return {m.lo + e, m.lo + e};
  return {add_rounded(m.lo, e, prec, Rounding::Down), add_rounded(m.hi, e, prec, Rounding::Up)};
}

// ----------------------------------------------------------------- PosValue

PosValue::PosValue() : rep_(Rational(1)) {}

PosValue PosValue::exact(Rational q) {
  q.canonicalize();
  if (q <= 0) throw std::invalid_argument("PosValue must be positive: " + q.get_str());
  PosValue v;
  v.rep_ = std::move(q);
  return v;
}

PosValue PosValue::exact(long num, long den) { return exact(Rational(num, den)); }

PosValue PosValue::log2_interval(BigDyadic lo, BigDyadic hi) {
  if (lo > hi) throw std::invalid_argument("LogIv requires lo <= hi");
  PosValue v;
  v.rep_ = LogIv{std::move(lo), std::move(hi)};
  return v;
}

PosValue PosValue::pow2(const BigInt& e) {
  if (abs(e) <= kExactPow2Limit) {
    long k = e.get_si();
    if (k >= 0) return exact(Rational(shl(BigInt(1), static_cast<unsigned long>(k))));
    return exact(Rational(BigInt(1), shl(BigInt(1), static_cast<unsigned long>(-k))));
  }
  return log2_point(BigDyadic::from_int(e));
}

Interval PosValue::log2(long prec) const {
  if (is_exact()) return log2_enclosure(exact_value(), prec);
  const auto& iv = log_iv();
  return {iv.lo, iv.hi};
}

bool PosValue::is_point() const { return is_exact() || log_iv().lo == log_iv().hi; }

std::optional<Rational> PosValue::as_rational() const {
  if (is_exact()) return exact_value();
  const auto& iv = log_iv();
  if (iv.lo == iv.hi && iv.lo.is_integer() && abs(iv.lo.floor()) <= kExactPow2Limit) {
    return pow2(iv.lo.floor()).exact_value();
  }
  return std::nullopt;
}

namespace {
Rational exp2_bound(const BigDyadic& t, long prec, Rounding r) {
  if (t.is_integer()) {
    BigInt e = t.floor();
    if (abs(e) > kMaxShift) throw std::overflow_error("exp2 bound out of range");
    return PosValue::pow2(e).exact_value();
  }
  Mpfr x(prec + 64);
  set_mpfr(x.get(), t, r == Rounding::Down ? MPFR_RNDD : MPFR_RNDU);
  mpfr_exp2(x.get(), x.get(), r == Rounding::Down ? MPFR_RNDD : MPFR_RNDU);
  return from_mpfr(x.get()).to_rational();
}
}  // namespace

Rational PosValue::lower_rational(long prec) const {
  if (is_exact()) return exact_value();
  return exp2_bound(log_iv().lo, prec, Rounding::Down);
}

Rational PosValue::upper_rational(long prec) const {
  if (is_exact()) return exact_value();
  return exp2_bound(log_iv().hi, prec, Rounding::Up);
}

double PosValue::log2_approx() const {
  Interval iv = log2(64);
  return 0.5 * (iv.lo.to_double() + iv.hi.to_double());
}

std::string PosValue::str() const {
  if (is_exact()) return exact_value().get_str();
  return "2^[" + log_iv().lo.str() + "," + log_iv().hi.str() + "]";
}

NonNeg NonNeg::from_rational(const Rational& q) {
  if (q < 0) throw std::invalid_argument("negative value");
  if (q == 0) return {};
  return PosValue::exact(q);
}

const PosValue& NonNeg::value() const {
  if (!v_) throw std::logic_error("value() on zero");
  return *v_;
}

bool NonNeg::identical(const NonNeg& o) const {
  if (is_zero() || o.is_zero()) return is_zero() == o.is_zero();
  return v_->identical(*o.v_);
}

std::string NonNeg::str() const { return v_ ? v_->str() : "0"; }

// -------------------------------------------------------------- arithmetic

PosValue pv_mul(const PosValue& a, const PosValue& b, long prec) {
  if (a.is_exact() && b.is_exact()) return PosValue::exact(a.exact_value() * b.exact_value());
  Interval la = a.log2(prec), lb = b.log2(prec);
  if (la.is_point() && lb.is_point()) return PosValue::log2_point(la.lo + lb.lo);
  return PosValue::log2_interval(add_rounded(la.lo, lb.lo, prec, Rounding::Down),
                                 add_rounded(la.hi, lb.hi, prec, Rounding::Up));
}

PosValue pv_inv(const PosValue& a) {
  if (a.is_exact()) return PosValue::exact(1 / a.exact_value());
  return PosValue::log2_interval(-a.log_iv().hi, -a.log_iv().lo);
}

PosValue pv_div(const PosValue& a, const PosValue& b, long prec) { return pv_mul(a, pv_inv(b), prec); }

PosValue pv_add(const PosValue& a, const PosValue& b, long prec) {
  if (a.is_exact() && b.is_exact()) {
    const Rational& x = a.exact_value();
    const Rational& y = b.exact_value();
    long kx = bitlen(x.get_num()) - bitlen(x.get_den());
    long ky = bitlen(y.get_num()) - bitlen(y.get_den());
    if (std::abs(kx - ky) <= prec + 2) return PosValue::exact(x + y);
  }
  Interval la = a.log2(prec), lb = b.log2(prec);
  BigDyadic dlo = la.lo - lb.lo, dhi = la.hi - lb.hi;
  if (dlo.sign() < 0) dlo = -dlo;
  if (dhi.sign() < 0) dhi = -dhi;
  BigDyadic lo = add_rounded(std::max(la.lo, lb.lo), log1p2_lower(dlo, prec), prec, Rounding::Down);
  BigDyadic hi = add_rounded(std::max(la.hi, lb.hi), log1p2_upper(dhi, prec), prec, Rounding::Up);
  return PosValue::log2_interval(lo, hi);
}

SubResult pv_sub(const PosValue& a, const PosValue& b, long prec) {
  if (a.is_exact() && b.is_exact()) {
    Rational d = a.exact_value() - b.exact_value();
    if (d > 0) return {SubSign::Positive, PosValue::exact(d)};
    if (d == 0) return {SubSign::Zero, std::nullopt};
    return {SubSign::Negative, std::nullopt};
  }
  Interval la = a.log2(prec), lb = b.log2(prec);
  if (la.is_point() && lb.is_point() && la.lo == lb.lo) return {SubSign::Zero, std::nullopt};
  if (lb.lo > la.hi) return {SubSign::Negative, std::nullopt};
  if (!(la.lo > lb.hi)) return {SubSign::Unknown, std::nullopt};
  BigDyadic tmin = la.lo - lb.hi;
  BigDyadic tmax = la.hi - lb.lo;
  auto lo_adj = log1m2_lower(tmin, prec);
  if (!lo_adj) return {SubSign::Unknown, std::nullopt};
  BigDyadic hi_adj = log1m2_upper(tmax, prec);
  return {SubSign::Positive, PosValue::log2_interval(add_rounded(la.lo, *lo_adj, prec, Rounding::Down),
                                                     add_rounded(la.hi, hi_adj, prec, Rounding::Up))};
}

PosValue pv_pow_rat(const PosValue& a, const Rational& q_in, long prec) {
  Rational q = q_in;
  q.canonicalize();
  if (q == 0) return PosValue();
  if (q == 1) return a;
  if (a.is_exact()) {
    const Rational& x = a.exact_value();
    if (auto e = pow2_exponent(x)) {
      Rational eq = q * (*e);
      if (eq.get_den() == 1) return PosValue::pow2(eq.get_num());
      if (auto d = BigDyadic::from_rational_exact(eq)) return PosValue::log2_point(*d);
      return PosValue::log2_interval(BigDyadic::from_rational(eq, prec, Rounding::Down),
                                     BigDyadic::from_rational(eq, prec, Rounding::Up));
    }
    const BigInt& p = q.get_num();
    const BigInt& s = q.get_den();
    if (s.fits_ulong_p() && s.get_ui() <= 64 && p.fits_slong_p()) {
      BigInt rn, rd;
      bool exact_num = mpz_root(rn.get_mpz_t(), x.get_num().get_mpz_t(), s.get_ui()) != 0;
      bool exact_den = mpz_root(rd.get_mpz_t(), x.get_den().get_mpz_t(), s.get_ui()) != 0;
      long pe = p.get_si();
      if (exact_num && exact_den && std::abs(pe) <= kExactPowBits / (bitlen(rn) + bitlen(rd))) {
        BigInt n2, d2;
        mpz_pow_ui(n2.get_mpz_t(), rn.get_mpz_t(), static_cast<unsigned long>(std::abs(pe)));
        mpz_pow_ui(d2.get_mpz_t(), rd.get_mpz_t(), static_cast<unsigned long>(std::abs(pe)));
        return PosValue::exact(pe > 0 ? Rational(n2, d2) : Rational(d2, n2));
      }
    }
    Interval la = log2_enclosure(x, prec + bitlen(q.get_num()) + 4);
    Interval r = scale_interval(la, q, prec);
    return PosValue::log2_interval(r.lo, r.hi);
  }
  Interval la = a.log2(prec);
  return normalize_point(scale_interval(la, q, prec));
}

PosValue pv_pow_int(const PosValue& a, const BigInt& k, long prec) {
  if (k == 0) return PosValue();
  if (a.is_exact()) {
    const Rational& x = a.exact_value();
    if (auto e = pow2_exponent(x)) return PosValue::pow2(k * (*e));
    if (k.fits_slong_p() &&
        std::abs(k.get_si()) <= kExactPowBits / (bitlen(x.get_num()) + bitlen(x.get_den()))) {
      long kk = k.get_si();
      BigInt n2, d2;
      mpz_pow_ui(n2.get_mpz_t(), x.get_num().get_mpz_t(), static_cast<unsigned long>(std::abs(kk)));
      mpz_pow_ui(d2.get_mpz_t(), x.get_den().get_mpz_t(), static_cast<unsigned long>(std::abs(kk)));
      return PosValue::exact(kk > 0 ? Rational(n2, d2) : Rational(d2, n2));
    }
  }
  long extra = bitlen(k) + 4;
  Interval la = a.log2(prec + extra);
  BigDyadic kd = BigDyadic::from_int(k);
  BigDyadic x = la.lo * kd, y = la.hi * kd;
  if (k < 0) std::swap(x, y);
  if (la.is_point()) return normalize_point({x, y});
  return PosValue::log2_interval(x.round(prec, Rounding::Down), y.round(prec, Rounding::Up));
}

PosValue pv_pow_iv(const PosValue& a, const Interval& e, long prec) {
  Interval la = a.log2(prec + 16);
  BigDyadic c[4] = {la.lo * e.lo, la.lo * e.hi, la.hi * e.lo, la.hi * e.hi};
  BigDyadic lo = *std::min_element(c, c + 4), hi = *std::max_element(c, c + 4);
  if (lo == hi) return normalize_point({lo, hi});
  return PosValue::log2_interval(lo.round(prec, Rounding::Down), hi.round(prec, Rounding::Up));
}

PosValue pv_exp2(const BigDyadic& t) { return normalize_point({t, t}); }

PosValue pv_exp2_rat(const Rational& q, long prec) {
  if (auto d = BigDyadic::from_rational_exact(q)) return pv_exp2(*d);
  return PosValue::log2_interval(BigDyadic::from_rational(q, prec, Rounding::Down),
                                 BigDyadic::from_rational(q, prec, Rounding::Up));
}

PosValue pv_exp2_iv(const Interval& iv, long) { return normalize_point(iv); }

PosValue pv_from_interval(const Interval& iv, long prec) {
  if (iv.lo.sign() <= 0) throw std::domain_error("pv_from_interval needs a positive lower end");
  if (iv.is_point()) return PosValue::exact(iv.lo.to_rational());
  return PosValue::log2_interval(log2_enclosure(iv.lo, prec).lo, log2_enclosure(iv.hi, prec).hi);
}

PosValue pv_max(const PosValue& a, const PosValue& b, long prec) {
  NumCfg cfg;
  cfg.prec = prec;
  cfg.prec_cap = prec;
  Verdict3 v = pv_le(a, b, cfg);
  if (v.is_true()) return b;
  if (v.is_false()) return a;
  Interval la = a.log2(prec), lb = b.log2(prec);
  return PosValue::log2_interval(std::max(la.lo, lb.lo), std::max(la.hi, lb.hi));
}

PosValue pv_min(const PosValue& a, const PosValue& b, long prec) {
  NumCfg cfg;
  cfg.prec = prec;
  cfg.prec_cap = prec;
  Verdict3 v = pv_le(a, b, cfg);
  if (v.is_true()) return a;
  if (v.is_false()) return b;
  Interval la = a.log2(prec), lb = b.log2(prec);
  return PosValue::log2_interval(std::min(la.lo, lb.lo), std::min(la.hi, lb.hi));
}

NonNeg nn_add(const NonNeg& a, const NonNeg& b, long prec) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return pv_add(a.value(), b.value(), prec);
}

NonNeg nn_mul(const NonNeg& a, const NonNeg& b, long prec) {
  if (a.is_zero() || b.is_zero()) return {};
  return pv_mul(a.value(), b.value(), prec);
}

// ------------------------------------------------------------- comparisons

Verdict3 pv_cmp_scaled(const PosValue& a, const Rational& C, const PosValue& b, const NumCfg& cfg) {
  if (C <= 0) throw std::invalid_argument("pv_cmp_scaled needs C > 0");
  if (a.is_exact() && b.is_exact()) {
    return {a.exact_value() <= C * b.exact_value() ? Cert::True : Cert::False, false};
  }
  bool refinable = (a.is_exact() && !pow2_exponent(a.exact_value())) ||
                   (b.is_exact() && !pow2_exponent(b.exact_value())) || !pow2_exponent(C);
  for (long prec = cfg.prec;; prec *= 2) {
    Interval la = a.log2(prec), lb = b.log2(prec), lc = log2_enclosure(C, prec);
    if (la.hi <= lc.lo + lb.lo) return {Cert::True, false};
    if (la.lo > lc.hi + lb.hi) return {Cert::False, false};
    if (!refinable) return {Cert::Unknown, false};
    if (prec * 2 > cfg.prec_cap) return {Cert::Unknown, true};
  }
}

Verdict3 pv_le(const PosValue& a, const PosValue& b, const NumCfg& cfg) { return pv_cmp_scaled(a, Rational(1), b, cfg); }

Verdict3 pv_lt(const PosValue& a, const PosValue& b, const NumCfg& cfg) {
  if (a.is_exact() && b.is_exact()) return {a.exact_value() < b.exact_value() ? Cert::True : Cert::False, false};
  Verdict3 ge = pv_le(b, a, cfg);
  if (ge.is_true()) return {Cert::False, false};
  for (long prec = cfg.prec;; prec *= 2) {
    Interval la = a.log2(prec), lb = b.log2(prec);
    if (la.hi < lb.lo) return {Cert::True, false};
    if (prec * 2 > cfg.prec_cap) return {Cert::Unknown, true};
  }
}

Verdict3 nn_le(const NonNeg& a, const NonNeg& b, const NumCfg& cfg) {
  if (a.is_zero()) return {Cert::True, false};
  if (b.is_zero()) return {Cert::False, false};
  return pv_le(a.value(), b.value(), cfg);
}

long min_pow2_exponent(const PosValue& a, const PosValue& b, const NumCfg& cfg) {
  if (a.is_exact() && b.is_exact()) {
    Rational r = a.exact_value() / b.exact_value();
    long t = bitlen(r.get_num()) - bitlen(r.get_den());
    BigInt lhs = r.get_num(), rhs = r.get_den();
    if (t >= 0) {
      rhs = shl(rhs, static_cast<unsigned long>(t));
    } else {
      lhs = shl(lhs, static_cast<unsigned long>(-t));
    }
    return lhs <= rhs ? t : t + 1;
  }
  Interval la = a.log2(cfg.prec), lb = b.log2(cfg.prec);
  return to_long((la.hi - lb.lo).ceil(), "constant exponent");
}

std::string pow2_str(long j) { return "2^" + std::to_string(j); }

long parse_pow2_str(std::string_view s) {
  if (s.size() < 3 || s.substr(0, 2) != "2^") throw CheckError("ParseError", "expected 2^j, got '" + std::string(s) + "'");
  try {
    size_t used = 0;
    long v = std::stol(std::string(s.substr(2)), &used);
    if (used != s.size() - 2) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw CheckError("ParseError", "expected 2^j, got '" + std::string(s) + "'");
  }
}

Rational parse_rational(std::string_view s) {
  auto fail = [&] { throw CheckError("ParseError", "bad rational '" + std::string(s) + "'"); };
  std::string str(s);
  if (str.empty()) fail();
  Rational q;
  auto dot = str.find('.');
  if (dot != std::string::npos) {
    std::string ip = str.substr(0, dot), fp = str.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (neg) ip = ip.substr(1);
    if (ip.empty()) ip = "0";
    if (fp.empty() || fp.find_first_not_of("0123456789") != std::string::npos ||
        ip.find_first_not_of("0123456789") != std::string::npos) {
      fail();
    }
    BigInt num(ip + fp), den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
    q = Rational(neg ? BigInt(-num) : num, den);
  } else {
    auto slash = str.find('/');
    std::string ns = str.substr(0, slash);
    std::string ds = slash == std::string::npos ? "1" : str.substr(slash + 1);
    auto digits = [](const std::string& t) {
      size_t st = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
      return t.size() > st && t.find_first_not_of("0123456789", st) == std::string::npos;
    };
    if (!digits(ns) || !digits(ds)) fail();
    BigInt n(ns[0] == '+' ? ns.substr(1) : ns), d(ds[0] == '+' ? ds.substr(1) : ds);
    if (d == 0) fail();
    q = Rational(n, d);
  }
  q.canonicalize();
  return q;
}

std::string rational_str(const Rational& q) { return q.get_num().get_str() + "/" + q.get_den().get_str(); }

}  // namespace pofin
