#pragma once

// Exact and directed-rounding arithmetic on positive reals.
//
// A PosValue is either an exact positive rational or an enclosure [lo, hi]
// of its base-2 logarithm with dyadic endpoints.  Log endpoints are kept on
// the absolute grid 2^-prec, so "prec" below is an absolute precision in bits.

#include <gmpxx.h>

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace pofin {

using BigInt = mpz_class;
using Rational = mpq_class;

inline constexpr long kDefaultPrec = 256;
inline constexpr long kDefaultPrecCap = 16384;
inline constexpr long kDefaultCapC = 64;

// Failures of preconditions or hypotheses carry a stable code string
// ("NegativeRadicand", "OutOfWindow", ...) plus an optional grid index.
class CheckError : public std::runtime_error {
 public:
  CheckError(std::string code, std::string detail, std::optional<long> index = std::nullopt);
  const std::string& code() const { return code_; }
  std::optional<long> index() const { return index_; }

 private:
  std::string code_;
  std::optional<long> index_;
};

struct NumCfg {
  long prec = kDefaultPrec;
  long prec_cap = kDefaultPrecCap;
  long cap_c = kDefaultCapC;

  // Reads POFIN_PREC_CAP when set.
  static NumCfg from_env();
};

enum class Rounding { Down, Up };

class BigDyadic {
 public:
  BigDyadic() = default;
  BigDyadic(BigInt mantissa, BigInt exponent);
  static BigDyadic from_long(long v);
  static BigDyadic from_int(const BigInt& v);
  static BigDyadic pow2(const BigInt& e);
  // Exact conversion when the denominator is a power of two.
  static std::optional<BigDyadic> from_rational_exact(const Rational& q);
  // Rounds q to the grid 2^-prec in the given direction.
  static BigDyadic from_rational(const Rational& q, long prec, Rounding r);

  const BigInt& mantissa() const { return m_; }
  const BigInt& exponent() const { return e_; }
  int sign() const { return sgn(m_); }
  bool is_zero() const { return m_ == 0; }
  bool is_integer() const { return m_ == 0 || e_ >= 0; }

  // floor(log2 |x|); x must be nonzero.
  BigInt top_bit() const;
  Rational to_rational() const;  // throws std::overflow_error for absurd exponents
  BigInt floor() const;
  BigInt ceil() const;
  BigDyadic round(long prec, Rounding r) const;
  BigDyadic mul_2exp(const BigInt& k) const;
  double to_double() const;

  std::string str() const;  // "m*2^e"
  static BigDyadic parse(std::string_view s);

  BigDyadic operator-() const;
  friend BigDyadic operator+(const BigDyadic& a, const BigDyadic& b);
  friend BigDyadic operator-(const BigDyadic& a, const BigDyadic& b);
  friend BigDyadic operator*(const BigDyadic& a, const BigDyadic& b);
  friend std::strong_ordering operator<=>(const BigDyadic& a, const BigDyadic& b);
  friend bool operator==(const BigDyadic& a, const BigDyadic& b) = default;

 private:
  void normalize();
  BigInt m_ = 0;
  BigInt e_ = 0;
};

// a + b rounded onto the 2^-prec grid; safe when exponents differ wildly.
BigDyadic add_rounded(const BigDyadic& a, const BigDyadic& b, long prec, Rounding r);

struct Interval {
  BigDyadic lo;
  BigDyadic hi;
  bool is_point() const { return lo == hi; }
  BigDyadic width() const { return hi - lo; }
};

// Enclosure of log2(q), q > 0, endpoints on the 2^-prec grid.
Interval log2_enclosure(const Rational& q, long prec);
// Enclosure of log2(x) for a positive dyadic x.
Interval log2_enclosure(const BigDyadic& x, long prec);

class PosValue {
 public:
  struct LogIv {
    BigDyadic lo;
    BigDyadic hi;
    bool operator==(const LogIv&) const = default;
  };

  PosValue();  // 1
  static PosValue exact(Rational q);
  static PosValue exact(long num, long den = 1);
  static PosValue log2_interval(BigDyadic lo, BigDyadic hi);
  static PosValue log2_point(BigDyadic t) { return log2_interval(t, t); }
  // 2^e, exact while the rational stays small, else a zero-width log.
  static PosValue pow2(const BigInt& e);

  bool is_exact() const { return std::holds_alternative<Rational>(rep_); }
  const Rational& exact_value() const { return std::get<Rational>(rep_); }
  const LogIv& log_iv() const { return std::get<LogIv>(rep_); }

  // log2 enclosure; for LogIv values this is the stored interval.
  Interval log2(long prec = kDefaultPrec) const;
  // True when the stored value is a single point (Exact, or zero-width LogIv).
  bool is_point() const;
  // If the value is a single exact rational (including zero-width integral
  // logs of moderate size), returns it.
  std::optional<Rational> as_rational() const;
  // Rational bounds; rational lower/upper at the given precision.
  Rational lower_rational(long prec = kDefaultPrec) const;
  Rational upper_rational(long prec = kDefaultPrec) const;
  double log2_approx() const;

  bool identical(const PosValue& o) const { return rep_ == o.rep_; }
  std::string str() const;

 private:
  std::variant<Rational, LogIv> rep_;
};

// A PosValue or zero.
class NonNeg {
 public:
  NonNeg() = default;  // zero
  NonNeg(PosValue v) : v_(std::move(v)) {}  // NOLINT(implicit)
  static NonNeg zero() { return NonNeg(); }
  static NonNeg from_rational(const Rational& q);  // q >= 0

  bool is_zero() const { return !v_.has_value(); }
  const PosValue& value() const;
  const std::optional<PosValue>& opt() const { return v_; }
  bool identical(const NonNeg& o) const;
  std::string str() const;

 private:
  std::optional<PosValue> v_;
};

enum class Cert { True, False, Unknown };

struct Verdict3 {
  Cert kind = Cert::Unknown;
  bool precision_exhausted = false;
  bool is_true() const { return kind == Cert::True; }
  bool is_false() const { return kind == Cert::False; }
  bool is_unknown() const { return kind == Cert::Unknown; }
};

PosValue pv_mul(const PosValue& a, const PosValue& b, long prec = kDefaultPrec);
PosValue pv_div(const PosValue& a, const PosValue& b, long prec = kDefaultPrec);
PosValue pv_inv(const PosValue& a);
PosValue pv_add(const PosValue& a, const PosValue& b, long prec = kDefaultPrec);
PosValue pv_pow_rat(const PosValue& a, const Rational& q, long prec = kDefaultPrec);
PosValue pv_pow_int(const PosValue& a, const BigInt& k, long prec = kDefaultPrec);
// a^e for a real exponent known to lie in [e.lo, e.hi].
PosValue pv_pow_iv(const PosValue& a, const Interval& e, long prec = kDefaultPrec);
// 2^t for a dyadic exponent.
PosValue pv_exp2(const BigDyadic& t);
// 2^q for a rational exponent.
PosValue pv_exp2_rat(const Rational& q, long prec = kDefaultPrec);
// 2^x for x enclosed in iv.
PosValue pv_exp2_iv(const Interval& iv, long prec = kDefaultPrec);
// Value whose real magnitude lies in [lo, hi], lo > 0.
PosValue pv_from_interval(const Interval& iv, long prec = kDefaultPrec);
PosValue pv_max(const PosValue& a, const PosValue& b, long prec = kDefaultPrec);
PosValue pv_min(const PosValue& a, const PosValue& b, long prec = kDefaultPrec);

NonNeg nn_add(const NonNeg& a, const NonNeg& b, long prec = kDefaultPrec);
NonNeg nn_mul(const NonNeg& a, const NonNeg& b, long prec = kDefaultPrec);

enum class SubSign { Positive, Zero, Negative, Unknown };
struct SubResult {
  SubSign sign = SubSign::Unknown;
  std::optional<PosValue> value;  // set when Positive
};
// a - b with a certified sign.
SubResult pv_sub(const PosValue& a, const PosValue& b, long prec = kDefaultPrec);

// Decides a <= C*b, escalating precision up to cfg.prec_cap.
Verdict3 pv_cmp_scaled(const PosValue& a, const Rational& C, const PosValue& b,
                       const NumCfg& cfg = {});
Verdict3 pv_le(const PosValue& a, const PosValue& b, const NumCfg& cfg = {});
Verdict3 pv_lt(const PosValue& a, const PosValue& b, const NumCfg& cfg = {});
Verdict3 nn_le(const NonNeg& a, const NonNeg& b, const NumCfg& cfg = {});

// Smallest integer j (possibly negative) such that a <= 2^j * b is certified.
// Exact operands give the exact answer; inexact ones the smallest j
// certifiable at cfg.prec.
long min_pow2_exponent(const PosValue& a, const PosValue& b, const NumCfg& cfg = {});

std::string pow2_str(long j);  // "2^j"
long parse_pow2_str(std::string_view s);

Rational parse_rational(std::string_view s);
std::string rational_str(const Rational& q);  // always "p/q"

}  // namespace pofin
