#pragma once

// Pair classification for the coding U -> E_{f_U}, incomparability witnesses,
// antichains over tree branches, and the iterated-log family.

#include <optional>
#include <string>
#include <vector>

#include "pofin/dyadic_function.hpp"
#include "pofin/reduction_engine.hpp"
#include "pofin/relation_checks.hpp"
#include "pofin/scales.hpp"
#include "pofin/subsets.hpp"
#include "pofin/towers.hpp"

namespace pofin {

// Interleaved: u_l in U \ V, v_l in V \ U, u_l < v_l < u_(l+1).  One-sided:
// only u_l in U \ V with u_(l+1) >= u_l + 2, which bounds u_U / u_V alone.
struct IncompWitness {
  bool one_sided = false;
  long p = 0;  // minimal with Delta^p <= delta
  Rational delta, Delta;
  std::vector<BigInt> u, v;  // block indices, u_l in U \ V, v_l in V \ U
  std::vector<BigInt> m, n;  // m_l = a_(u_l + 1) - 1, n_l = a_(v_l + 1) - 1
  long levels = 0;
  // "exact": ratios evaluated from block counts; "chain": block indices too
  // large for a_l, certified through Delta^p <= delta and u_l >= p + 1 + 2l.
  std::string mode;
  std::vector<std::optional<PosValue>> ratio_u;  // u_U(k_m_l) / u_V(k_m_l)
  std::vector<std::optional<PosValue>> ratio_v;  // u_V(k_n_l) / u_U(k_n_l)
  std::vector<PosValue> bound;                   // Delta^(2l)
};

// Largest block index evaluated exactly; past it witnesses use the chain.
inline constexpr long kExactBlockLimit = 48;

IncompWitness incomparability_witness(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s, long levels,
                                      WindowPolicy policy = WindowPolicy::Strict, const NumCfg& cfg = {});

struct WitnessVerdict {
  bool pass = true;
  long level = -1;
  std::string reason;
};

// One-sided chain for u_U / u_V -> 0 along k_(m_l); needs U \ V infinite.
IncompWitness liminf_chain_witness(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s, long levels,
                                   WindowPolicy policy = WindowPolicy::Strict, const NumCfg& cfg = {});

WitnessVerdict verify_incomp_witness(const IncompWitness& w, const SubsetSpec& u, const SubsetSpec& v,
                                     const ScaleSystem& s, WindowPolicy policy = WindowPolicy::Strict,
                                     const NumCfg& cfg = {});

enum class PairKind { AlmostEqual, LeftReduces, RightReduces, Incomparable };
std::string pair_kind_str(PairKind k);

// lower <_B upper: MuCert for (lower ∩ upper) -> upper, the Case 1 constant
// between lower and lower ∩ upper, and the liminf witness for the converse.
struct ReductionBundle {
  SubsetSpec lower, upper, lower_cap;
  EquivCert lower_equiv;
  MuCert mu;
  MuVerdict mu_verdict;
  IncompWitness converse;  // u_upper / u_cap <= Delta^(2l) at k_(m_l)
  // The same ratio on the grid: fire points k_m <= depth with m in upper \ lower.
  std::vector<long> converse_idx;
  std::vector<PosValue> converse_bound;
  A2Result converse_grid;
  A1Cert a1;
};

struct PairVerdict {
  PairKind kind = PairKind::Incomparable;
  std::optional<EquivCert> equiv;
  long differing_fires = 0;
  std::optional<ReductionBundle> reduction;
  std::optional<IncompWitness> uv, vu;
  bool within_window = false;
  bool verified = false;
};

struct ClassifyOptions {
  long levels = 4;
  long a1_depth = 256;
  MuBuildOptions mu;
};

// Dispatches on almost_subset both ways.  RightReduces means E_U <_B E_V.
PairVerdict classify_pair(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s, const Rational& alpha,
                          const DyadicFunction& phi_env, long depth, const ClassifyOptions& opt = {},
                          const NumCfg& cfg = {});

struct AntichainResult {
  std::vector<SubsetSpec> sets;
  // verdicts[i][j] for i < j; diagonal and lower half empty.
  std::vector<std::vector<std::optional<PairVerdict>>> verdicts;
  long incomparable = 0;
  long pairs = 0;
};

AntichainResult antichain(const std::vector<std::string>& branch_codes, const ScaleSystem& s, long depth,
                          long levels = 4, const NumCfg& cfg = {});

struct EtaScalesReport {
  long j0 = 0;
  std::vector<PosValue> delta;  // delta_m for 1 <= m <= m_max
  PosValue inf, sup;
  PosValue limit;               // 2^-eta_(j0)
  std::vector<long> distance_log2_hi;  // ceil log2 |log2 delta_m - log2 limit|, or LONG_MIN when zero
  bool bounds_ok = false;       // 0 < inf <= sup < 1
  bool trending = false;        // last distance <= first
};

EtaScalesReport eta_scales(const EtaSpec& eta, long m_max, const NumCfg& cfg = {});
ScaleSystem eta_scale_system(const EtaSpec& eta);

struct SandwichReport {
  long j0 = 0;
  long j = 0;  // delta = 1 - 2^-j
  Rational delta;
  ScaleSystem scale;
  RelationSpec relation;
  R2Report r2;
  A1Cert a1;
  // Populated for U = omega: fire n, u(k_n) = delta^(n+1) and the tower
  // identity s_(j0+1)(x_n) = n + 1.
  std::vector<long> identity_checked;
  bool identity_ok = true;
};

SandwichReport sandwich_build(const EtaSpec& eta, const EtaSpec& eta_prime, const SubsetSpec& u, const Rational& alpha,
                              long depth, const NumCfg& cfg = {});

struct SmoothOmegaReport {
  DyadicFunction psi;
  DyadicFunction phi;
  std::vector<long> fires;
  std::vector<PosValue> ratio_bound;  // (1/delta_(m+1) - 1) / k_m per fire n = k_m
  long first_ratio_fail = -1;
  BridgeReport bridge;
};

SmoothOmegaReport smooth_omega_envelope(const ScaleSystem& s, long depth, const NumCfg& cfg = {});

}  // namespace pofin
