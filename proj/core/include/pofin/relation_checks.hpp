#pragma once

// Quasi-triangle constants, the separation condition (A1) and liminf
// witnesses (A2') for f(x) = x^alpha psi(x) with psi = envelope * weight.

#include <optional>
#include <string>
#include <vector>

#include "pofin/dyadic_function.hpp"
#include "pofin/scales.hpp"

namespace pofin {

class RelationSpec {
 public:
  RelationSpec(Rational alpha, DyadicFunction envelope, std::optional<WeightSeq> weight = std::nullopt,
               const NumCfg& cfg = {});

  const Rational& alpha() const { return alpha_; }
  const DyadicFunction& envelope() const { return envelope_; }
  const std::optional<WeightSeq>& weight() const { return weight_; }
  long depth() const { return psi_.depth(); }
  // envelope * weight, and its essential-increasing constant 2^k_exponent.
  const DyadicFunction& psi() const { return psi_; }
  long k_exponent() const { return k_exponent_; }
  const std::vector<NonNeg>& majorant() const { return majorant_; }
  // f(1/2^n) = 2^(-n alpha) psi(1/2^n)
  PosValue f(long n, long prec = kDefaultPrec) const;

 private:
  Rational alpha_;
  DyadicFunction envelope_;
  std::optional<WeightSeq> weight_;
  DyadicFunction psi_;
  long k_exponent_ = 0;
  std::vector<NonNeg> majorant_;
};

struct R2Report {
  bool pass = false;
  bool r1 = false;
  long exponent = 0;  // smallest passing C = 2^exponent
  long depth = 0;
  long worst_a = 0, worst_b = 0;
  std::optional<long> proof_exponent;  // ceil log2 max{g(1)/g(1/8), 4^alpha K^2/delta}
};

// Grid pairs x = 1/2^a, y = 1/2^b with 1 <= a, b <= depth.
R2Report check_R1_R2(const RelationSpec& r, long depth, std::optional<Rational> delta = std::nullopt,
                     const NumCfg& cfg = {});

struct A1Cert {
  Rational epsilon;      // applies to the increasing majorant
  Rational epsilon_psi;  // epsilon / K^3, applies to psi itself
  Rational K;
  Rational delta;
  long n_lo = 2;
  long n_hi = 0;
};

// Square-scale hypothesis psi(1/4^n) >= delta psi(1/2^n); delta is searched
// over powers of two when not given.
A1Cert check_A1(const RelationSpec& r, long depth, std::optional<Rational> delta = std::nullopt,
                const NumCfg& cfg = {});

struct A2Result {
  enum class Outcome { Verified, NoWitness, BoundViolated, InvalidBound };
  Outcome outcome = Outcome::NoWitness;
  long l = -1;
  std::vector<long> ratio_log2_hi;  // ceil log2 of each certified ratio
};

A2Result a2_liminf_witness(const DyadicFunction& num, const DyadicFunction& den, const std::vector<long>& idxseq,
                           const std::vector<PosValue>& bound, const NumCfg& cfg = {});

std::string a2_outcome_str(A2Result::Outcome o);

}  // namespace pofin
