#pragma once

// Block partition a_l / I_l, scale systems (k_m, delta_m) and the weight
// sequences u_U built from them.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pofin/numeric.hpp"
#include "pofin/subsets.hpp"
#include "pofin/towers.hpp"

namespace pofin {

class BlockPartition {
 public:
  // a_0 .. a_(l_max+1), so that I_0 .. I_(l_max) are complete.
  explicit BlockPartition(long l_max);
  long l_max() const { return static_cast<long>(a_.size()) - 2; }
  const BigInt& a(long l) const { return a_.at(static_cast<size_t>(l)); }
  std::pair<BigInt, BigInt> I(long l) const { return {a(l), a(l + 1)}; }
  BigInt block_size(long l) const { return a(l + 1) - a(l); }
  // Block containing m; nullopt when m lies past I_(l_max).
  std::optional<long> block_of(const BigInt& m) const;

 private:
  std::vector<BigInt> a_;
};

BlockPartition block_partition(long l_max);

struct KSpec {
  enum class Kind { Pow2Shift, List, Tower };
  Kind kind = Kind::Pow2Shift;
  long param = 1;  // shift for Pow2Shift, j0 for Tower
  std::vector<BigInt> list;

  static KSpec parse(const std::string& text);  // "pow2shift:1", "pow2", "tower:0", "2,4,8"
  std::string str() const;
};

struct DeltaSpec {
  enum class Kind { Const, List, Eta };
  Kind kind = Kind::Const;
  Rational c = Rational(1, 2);
  std::vector<Rational> list;
  EtaSpec eta;

  static DeltaSpec parse(const std::string& text);  // "const:1/2", "1/2", "1/2,1/3", "eta:0,1/2"
  std::string str() const;
};

class ScaleSystem {
 public:
  // Validates k_0 >= 2, k_(m+1) >= 2 k_m and inf <= delta_m <= sup.  For eta
  // deltas the bounds are computed over m <= eta_m_max when not supplied.
  ScaleSystem(KSpec k, DeltaSpec delta, std::optional<Rational> delta_inf = std::nullopt,
              std::optional<Rational> delta_sup = std::nullopt, long eta_m_max = 32);
  static ScaleSystem pow2(const Rational& delta) {
    return ScaleSystem(KSpec{}, DeltaSpec{DeltaSpec::Kind::Const, delta, {}, {}});
  }

  const KSpec& k_spec() const { return k_; }
  const DeltaSpec& delta_spec() const { return delta_; }
  const Rational& delta_inf() const { return inf_; }
  const Rational& delta_sup() const { return sup_; }
  bool delta_rational() const { return delta_.kind != DeltaSpec::Kind::Eta; }
  // Number of defined scale points (nullopt = infinite).
  std::optional<long> size() const;

  TowerNat k(const BigInt& m) const;
  // Number of m with k_m <= n.
  long count_upto(const BigInt& n) const;
  PosValue delta(const BigInt& m, long prec = kDefaultPrec) const;
  // prod_{lo <= m < hi} delta_m
  PosValue delta_product(const BigInt& lo, const BigInt& hi, long prec = kDefaultPrec) const;

 private:
  KSpec k_;
  DeltaSpec delta_;
  Rational inf_, sup_;
};

struct Fire {
  long n;   // = k_m
  long m;
  PosValue value;  // u(n) after applying delta_m
};

// Sparse step sequence; u(0) = 1, changes only at fire points.
class WeightSeq {
 public:
  WeightSeq(long depth, std::vector<Fire> fires);
  long depth() const { return depth_; }
  const std::vector<Fire>& fires() const { return fires_; }
  PosValue at(long n) const;

 private:
  long depth_;
  std::vector<Fire> fires_;
};

WeightSeq weight_seq(const SubsetSpec& u, const ScaleSystem& s, const BlockPartition& p, long depth,
                     WindowPolicy policy = WindowPolicy::Strict, long prec = kDefaultPrec);
WeightSeq weight_seq(const SubsetSpec& u, const ScaleSystem& s, long depth,
                     WindowPolicy policy = WindowPolicy::Strict, long prec = kDefaultPrec);

struct WeightReport {
  bool pass = true;
  std::string property;  // "i", "ii", "iii"
  long index = -1;
  std::string detail;
};

WeightReport check_weight_props(const WeightSeq& w, const ScaleSystem& s,
                                std::optional<Rational> claimed_delta_inf = std::nullopt, const NumCfg& cfg = {});

// u_U(k_m) from block counts, valid for astronomically large m.
PosValue weight_at_scale(const SubsetSpec& u, const ScaleSystem& s, const BlockPartition& p, const BigInt& m,
                         WindowPolicy policy = WindowPolicy::Strict, long prec = kDefaultPrec);
// u_U(k_m) / u_V(k_m); a single power of delta when delta is constant.
PosValue weight_ratio_at_scale(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s,
                               const BlockPartition& p, const BigInt& m,
                               WindowPolicy policy = WindowPolicy::Strict, long prec = kDefaultPrec);

}  // namespace pofin
