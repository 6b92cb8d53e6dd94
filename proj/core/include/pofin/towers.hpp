#pragma once

// Iterated logarithm / exponential towers and the l_eta family.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pofin/numeric.hpp"

namespace pofin {

// A natural number exp2^height(top), i.e. 2^2^...^top with `height` twos.
// Kept collapsed to height 0 while the value has at most 4096 bits.
struct TowerNat {
  long height = 0;
  BigInt top;

  static TowerNat of(const BigInt& v) { return make(0, v); }
  static TowerNat make(long height, BigInt top);
  TowerNat exp2() const { return make(height + 1, top); }
  // log2 when it is a natural: height >= 1 or top a power of two.
  std::optional<TowerNat> log2_exact() const;
  std::optional<BigInt> exact() const;
  PosValue value() const;
  std::string str() const;
};

int tower_cmp(const TowerNat& a, const TowerNat& b);

TowerNat tower_p(long n);                  // p_0 = 2, p_n = 2^p_(n-1)
TowerNat tower_k(long i, const BigInt& m);  // k_0(m) = 2^(m+1), k_(i+1)(m) = 2^k_i(m)

// At x = 1/2^N.
PosValue tower_t(long n, const TowerNat& N, long prec = kDefaultPrec);
PosValue tower_s(long n, const TowerNat& N, long prec = kDefaultPrec);

enum class TowerKind { T, S, P, K };
TowerKind parse_tower_kind(std::string_view s);
// arg is N (x = 1/2^N) for t and s, m for k, unused for p.
PosValue tower_eval(TowerKind kind, long index, const TowerNat& arg, long prec = kDefaultPrec);

struct EtaSpec {
  std::vector<Rational> eta;

  static EtaSpec parse(std::string_view text);  // "0/1,1/2"
  std::optional<long> j0() const;
  bool is_zero() const { return !j0().has_value(); }
  Rational at(long j) const { return j < static_cast<long>(eta.size()) ? eta[j] : Rational(0); }
  std::string str() const;
};

// eta <_lex eta' after zero padding; returns the first index where eta < eta'.
std::optional<long> lex_less_index(const EtaSpec& a, const EtaSpec& b);

PosValue l_eta(const EtaSpec& eta, const TowerNat& N, long prec = kDefaultPrec);
PosValue l_eta_prime(const EtaSpec& eta, const TowerNat& N, long prec = kDefaultPrec);

// delta_m^eta with k_m = k_(j0)(m).
PosValue eta_delta(const EtaSpec& eta, const BigInt& m, long prec = kDefaultPrec);

}  // namespace pofin
