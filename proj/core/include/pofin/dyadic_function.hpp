#pragma once

// Functions on [0,1] known through their values at x = 1/2^n, n <= depth.

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pofin/numeric.hpp"
#include "pofin/scales.hpp"

namespace pofin {

// Intended off-grid extension; operations never sample off-grid.
enum class Interp { Affine, MonotoneJoin };

class DyadicFunction {
 public:
  explicit DyadicFunction(std::vector<NonNeg> samples, Interp interp = Interp::Affine);

  long depth() const { return static_cast<long>(samples_.size()) - 1; }
  const NonNeg& at(long n) const;
  const NonNeg& value_at_one() const { return samples_.front(); }
  Interp interp() const { return interp_; }
  const std::vector<NonNeg>& samples() const { return samples_; }
  DyadicFunction truncated(long depth) const;

 private:
  std::vector<NonNeg> samples_;
  Interp interp_;
};

DyadicFunction from_weight(const WeightSeq& w, long depth);
DyadicFunction dyadic_product(const DyadicFunction& a, const DyadicFunction& b, long prec = kDefaultPrec);

struct BuiltinContext {
  const ScaleSystem* scale = nullptr;
};

// "const:<q>", "idpow:<alpha>", "pow2:<r>" (2^(r n)), "inv_t:<j>" (1/t_j),
// "inv_l:<eta>", "inv_lp:<eta>", "weight:<set spec>" (needs ctx.scale).
DyadicFunction builtin_function(const std::string& name, long depth, const BuiltinContext& ctx = {},
                                long prec = kDefaultPrec);

// C = 2^exponent witnesses g/C <= f <= C g on [n_lo, n_hi].
struct EquivCert {
  long exponent = 0;
  long n_lo = 0;
  long n_hi = 0;
  Rational C() const;
};

struct EssIncrWitness {
  long exponent = 0;
  std::vector<NonNeg> majorant;  // g(1/2^n) = max_{k >= n} v(1/2^k)
};
struct EssIncrViolation {
  long m = 0;  // v(1/2^n) > 2^cap v(1/2^m) with m <= n
  long n = 0;
};
using EssIncrResult = std::variant<EssIncrWitness, EssIncrViolation>;

// Smallest power of two C with v(1/2^n) <= C v(1/2^m) for m <= n.
EssIncrResult ess_incr_witness(const DyadicFunction& v, const NumCfg& cfg = {});

struct EquivDivergence {
  // (j, first n whose two-sided ratio exceeds 2^j), j = 0, 1, ...
  std::vector<std::pair<long, long>> escapes;
};
using EquivResult = std::variant<EquivCert, EquivDivergence>;

EquivResult equiv_witness(const DyadicFunction& f, const DyadicFunction& g, long n_lo, long n_hi,
                          const NumCfg& cfg = {});

// Re-checks g/C <= f <= C g on the certificate's range; first failing n in index.
struct EquivCheck {
  Verdict3 verdict;
  long index = -1;
};
EquivCheck check_equiv_cert(const EquivCert& c, const DyadicFunction& f, const DyadicFunction& g,
                            const NumCfg& cfg = {});

struct BridgeReport {
  EquivCert cert;         // assembled constant, rounded up to a power of two
  long c1_exponent = 0;   // C_1
  Rational c2;            // max{K^2 C_1^3, K^2 C_1^2 / delta}
  Rational assembled;     // C_1^2 C_2 / delta
  long direct_exponent = 0;  // equiv_witness constant on the same grid
};

// xseq: increasing grid indices (decreasing x) starting at 0 and ending at depth.
BridgeReport step_bridge_check(const DyadicFunction& f, const DyadicFunction& g, const std::vector<long>& xseq,
                               const Rational& delta, const Rational& K, const NumCfg& cfg = {});

struct SquareReport {
  EquivCert cert;             // phi(x^2) against phi(x) on the grid
  long k_exponent = 0;        // essential-increasing constant of phi
  long proof_exponent = 0;    // ceil log2 max{K^2 psi(1)/psi(1/4), K^6/lambda^2}
};

SquareReport square_invariance_check(const DyadicFunction& phi, const Rational& lambda, const NumCfg& cfg = {});

}  // namespace pofin
