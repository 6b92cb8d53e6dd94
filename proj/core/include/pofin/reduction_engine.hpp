#pragma once

// Reduction certificates: the kappa recursion for x^alpha psi -> x^beta, and
// the mu / nu data for u_U -> u_V.

#include <optional>
#include <string>
#include <vector>

#include "pofin/dyadic_function.hpp"
#include "pofin/relation_checks.hpp"
#include "pofin/scales.hpp"

namespace pofin {

struct KappaCert {
  Rational alpha;
  Rational beta;
  long depth = 0;
  long n0 = 0;            // psi is flattened to psi(1/2^n0) on x >= 1/2^n0
  Rational epsilon;       // ratio window psi(n)/psi(n+1) in [1-eps, 1+eps] past n0
  PosValue normalizer;    // M; g = x^alpha psi_flat / M
  long c_ess_exponent = 0;
  long L_exponent = 0;
  std::optional<long> proof_L3_exponent;  // two-regime bound for (iii), when finite
  std::vector<PosValue> kappa;            // kappa(1/2^n), n <= depth
};

KappaCert solve_kappa_closed(const RelationSpec& from, const Rational& beta, long depth, const NumCfg& cfg = {});

struct Verdict {
  bool pass = true;
  std::string failure;  // "ReconstructFailed", "TailBoundFailed", ...
  long index = -1;
  std::string detail;
};

Verdict verify_kappa_cert(const KappaCert& cert, const RelationSpec& from, const NumCfg& cfg = {});

// Grid samples of g = x^alpha psi_flat / M rebuilt from the relation and the
// certificate's n0 and M.
std::vector<PosValue> kappa_target(const KappaCert& cert, const RelationSpec& from, long prec = kDefaultPrec);

struct MuRaw {
  Rational alpha;
  std::vector<NonNeg> mu;        // mu(n)
  std::vector<NonNeg> mu_alpha;  // mu(n)^alpha
  std::vector<PosValue> ratio;   // u_U(n) / u_V(n)
  long n0 = 0;                   // mu(n)^alpha <= 2^(n/2) for fired n >= n0
};

MuRaw build_mu(const WeightSeq& wU, const WeightSeq& wV, const Rational& alpha, long depth, const NumCfg& cfg = {});

struct MuGrowthReport {
  bool pass = true;
  long index = -1;
  std::string which;  // "lower", "upper"
};
// 1/Delta - 1 <= mu^alpha <= n^log2(1/delta) (1 - delta) at every nonzero n >= 1.
MuGrowthReport check_mu_growth(const MuRaw& raw, const ScaleSystem& s, const NumCfg& cfg = {});

struct BandResult {
  long n1 = 0;
  long k_exponent = 0;        // certified on bracketed grid points
  long k_proof_exponent = 0;  // C / delta^(m+1)
  long m = 0;
  long off_grid_pairs = 0;    // pairs whose bracket falls past depth
};

// Band hypothesis 2^(-eps n) <= mu(i) <= 2^(eps n) (or 1/M <= mu(i) when
// lower_M is given) for n0 <= i <= n <= depth, then the K-band for psi.
BandResult band_check(const DyadicFunction& psi, const std::vector<NonNeg>& mu, const Rational& eps, long n0,
                      const Rational& lambda, std::optional<Rational> lower_M = std::nullopt, const NumCfg& cfg = {});

struct PatchResult {
  std::vector<NonNeg> nu;
  long k3_exponent = 0;
};
PatchResult patch_nu(const std::vector<NonNeg>& mu, const Rational& alpha, long n1, const NumCfg& cfg = {});

struct MuCert {
  Rational alpha;
  long depth = 0;
  long n0 = 0;
  long n1 = 0;
  long k_exponent = 0;
  long k_tail_exponent = 0;
  long ca_exponent = 0;  // psi(n) sum nu^alpha against phi u_U
  long L_exponent = 0;
  long sum_depth = 0;
  Rational eps;     // band width used for n1
  Rational lambda;  // square-scale constant for phi * u_V
  std::vector<NonNeg> mu;
  std::vector<NonNeg> nu;
};

struct MuBuildOptions {
  Rational eps = Rational(1, 2);
  std::optional<Rational> lambda;  // square-scale constant for phi * u_V; searched when unset
  std::optional<long> force_L_exponent;
};

MuCert build_mu_cert(const WeightSeq& wU, const WeightSeq& wV, const ScaleSystem& s, const DyadicFunction& phi,
                     const Rational& alpha, long depth, const MuBuildOptions& opt = {}, const NumCfg& cfg = {});

struct InequalityStatus {
  std::string name;
  bool pass = true;
  long first_fail = -1;
  std::string detail;
  bool unknown = false;  // undecided at the precision cap rather than false
};

struct MuVerdict {
  bool pass = true;
  std::vector<InequalityStatus> checks;
  const InequalityStatus* first_failure() const;
};

MuVerdict verify_mu_cert(const MuCert& cert, const WeightSeq& wU, const WeightSeq& wV, const ScaleSystem& s,
                         const DyadicFunction& phi, const NumCfg& cfg = {});

}  // namespace pofin
