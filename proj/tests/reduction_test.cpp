#include <gtest/gtest.h>

#include "pofin/reduction_engine.hpp"

using namespace pofin;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

Rational pow2q(long e) { return PosValue::pow2(BigInt(e)).exact_value(); }

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const CheckError& e) {
    return e.code();
  }
  return "none";
}

PosValue doubled(const PosValue& x) { return pv_mul(x, PosValue::exact(2)); }

struct Case2 {
  ScaleSystem s = ScaleSystem::pow2(q(1, 2));
  long depth;
  WeightSeq wu, wv;
  DyadicFunction phi;
  Case2(const char* u, const char* v, long d)
      : depth(d),
        wu(weight_seq(SubsetSpec::parse(u), s, d)),
        wv(weight_seq(SubsetSpec::parse(v), s, d)),
        phi(builtin_function("const:1", d)) {}
};

}  // namespace

TEST(Kappa, ClosedFormForConstantEnvelope) {
  RelationSpec r(1, builtin_function("const:1", 64));
  KappaCert c = solve_kappa_closed(r, 2, 64);
  EXPECT_EQ(c.n0, 0);
  EXPECT_EQ(c.kappa[0].as_rational(), 1);
  for (long n = 1; n <= 64; ++n) {
    // kappa(1/2^n)^2 = 2^-(n+1)
    auto sq = pv_pow_int(c.kappa[n], BigInt(2)).as_rational();
    ASSERT_TRUE(sq) << n;
    EXPECT_EQ(*sq, pow2q(-(n + 1))) << n;
  }
  Verdict v = verify_kappa_cert(c, r);
  EXPECT_TRUE(v.pass) << v.failure << " at " << v.index << ": " << v.detail;
  EXPECT_EQ(c.L_exponent, 1);
}

TEST(Kappa, ReconstructionIsExact) {
  RelationSpec r(1, builtin_function("const:1", 64));
  KappaCert c = solve_kappa_closed(r, 2, 64);
  std::vector<PosValue> g = kappa_target(c, r);
  for (long n = 0; n <= 64; ++n) {
    Rational sum = 0;
    for (long i = 0; i <= n; ++i) sum += *pv_pow_int(c.kappa[i], BigInt(2)).as_rational() * pow2q(2 * (i - n));
    EXPECT_EQ(sum, pow2q(-n)) << n;
    EXPECT_EQ(g[n].as_rational(), pow2q(-n)) << n;
  }
}

TEST(Kappa, SlowEnvelope) {
  RelationSpec r(1, builtin_function("inv_t:0", 256));
  KappaCert c = solve_kappa_closed(r, 2, 256);
  EXPECT_GT(c.epsilon, 0);
  Verdict v = verify_kappa_cert(c, r);
  EXPECT_TRUE(v.pass) << v.failure << " at " << v.index << ": " << v.detail;
}

TEST(Kappa, FastEnvelopeIsRejected) {
  std::string code = error_code([] { solve_kappa_closed(RelationSpec(1, builtin_function("idpow:1", 64)), 2, 64); });
  EXPECT_TRUE(code == "NegativeRadicand" || code == "NoN0Found") << code;
  EXPECT_EQ(error_code([] { solve_kappa_closed(RelationSpec(2, builtin_function("const:1", 64)), 2, 64); }),
            "InvalidInput");
}

TEST(Kappa, Tampering) {
  RelationSpec r(1, builtin_function("const:1", 64));
  KappaCert c = solve_kappa_closed(r, 2, 64);

  KappaCert t = c;
  t.kappa[5] = doubled(t.kappa[5]);
  Verdict v = verify_kappa_cert(t, r);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.failure, "ReconstructFailed");
  EXPECT_EQ(v.index, 5);

  // sum_i kappa(1/2^i)^2 = 1 + 1/4 + 1/8 + ... = 3/2 > L g(1) with L = 1
  t = c;
  t.L_exponent = 0;
  v = verify_kappa_cert(t, r);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.failure, "TailBoundFailed");
  EXPECT_EQ(v.index, 0);

  for (long i = 0; i <= c.depth; ++i) {
    t = c;
    t.kappa[i] = doubled(t.kappa[i]);
    EXPECT_FALSE(verify_kappa_cert(t, r).pass) << i;
  }
}

TEST(Mu, EmptyIntoOmega) {
  Case2 c("periodic:/0", "periodic:/1", 256);
  MuRaw raw = build_mu(c.wu, c.wv, 1, 256);
  EXPECT_EQ(raw.mu[0].value().as_rational(), 1);
  for (long n = 1; n <= 256; ++n) {
    // 1/u_omega jumps 2^m -> 2^(m+1) at k_m = 2^(m+1)
    long m = -1;
    for (long e = 1; e <= 8; ++e) {
      if (n == (1L << e)) m = e - 1;
    }
    if (m < 0) {
      EXPECT_TRUE(raw.mu[n].is_zero()) << n;
    } else {
      EXPECT_EQ(raw.mu[n].value().as_rational(), pow2q(m)) << n;
    }
  }
  EXPECT_TRUE(check_mu_growth(raw, c.s).pass);
}

TEST(Mu, RatioDifferencesMatchExactWeights) {
  for (auto [u, v] : {std::pair{"periodic:/10", "periodic:/1"}, std::pair{"periodic:/100", "periodic:/110"},
                      std::pair{"periodic:1/0", "periodic:1/01"}}) {
    Case2 c(u, v, 512);
    MuRaw raw = build_mu(c.wu, c.wv, 1, 512);
    Rational prev = 1;
    for (long n = 1; n <= 512; ++n) {
      Rational r = *c.wu.at(n).as_rational() / *c.wv.at(n).as_rational();
      Rational d = r - prev;
      prev = r;
      if (d == 0) {
        EXPECT_TRUE(raw.mu[n].is_zero()) << u << " " << n;
      } else {
        EXPECT_EQ(raw.mu[n].value().as_rational(), d) << u << " " << n;
      }
    }
  }
}

TEST(Mu, EqualSetsAreFlat) {
  Case2 c("periodic:/10", "periodic:/10", 256);
  MuRaw raw = build_mu(c.wu, c.wv, 1, 256);
  for (long n = 1; n <= 256; ++n) EXPECT_TRUE(raw.mu[n].is_zero());
  MuCert cert = build_mu_cert(c.wu, c.wv, c.s, c.phi, 1, 256);
  EXPECT_TRUE(verify_mu_cert(cert, c.wu, c.wv, c.s, c.phi).pass);
}

TEST(Mu, WrongDirection) {
  Case2 c("periodic:/1", "periodic:/10", 256);
  EXPECT_EQ(error_code([&] { build_mu(c.wu, c.wv, 1, 256); }), "NegativeDifference");
}

TEST(Mu, BandCheck) {
  Case2 c("periodic:/0", "periodic:/1", 256);
  MuRaw raw = build_mu(c.wu, c.wv, 1, 256);
  BandResult flat = band_check(builtin_function("const:1", 256), raw.mu, q(1, 2), 2, 1);
  EXPECT_EQ(flat.k_exponent, 0);
  BandResult slow = band_check(builtin_function("inv_t:0", 256), raw.mu, q(1, 2), 2, q(1, 2));
  EXPECT_LE(slow.k_exponent, slow.k_proof_exponent);

  std::vector<NonNeg> steep;
  for (long i = 0; i <= 64; ++i) steep.push_back(PosValue::pow2(BigInt(i)));
  EXPECT_EQ(error_code([&] { band_check(builtin_function("const:1", 64), steep, q(1, 2), 1, 1); }),
            "BandHypothesisFailed");
}

TEST(Mu, PatchNu) {
  Case2 c("periodic:/0", "periodic:/1", 256);
  MuRaw raw = build_mu(c.wu, c.wv, 1, 256);
  PatchResult p = patch_nu(raw.mu, 1, 3);
  for (long n = 0; n < 3; ++n) EXPECT_EQ(p.nu[n].value().as_rational(), 1);
  for (long n = 3; n <= 256; ++n) EXPECT_TRUE(p.nu[n].identical(raw.mu[n])) << n;
  EXPECT_LE(p.k3_exponent, 2);
}

TEST(Mu, EvensIntoOmegaCertificate) {
  Case2 c("periodic:/10", "periodic:/1", 1024);
  MuCert cert = build_mu_cert(c.wu, c.wv, c.s, c.phi, 1, 1024);
  MuVerdict v = verify_mu_cert(cert, c.wu, c.wv, c.s, c.phi);
  ASSERT_TRUE(v.pass) << v.first_failure()->name;
  for (const auto& chk : v.checks) EXPECT_FALSE(chk.unknown) << chk.name;
  for (const auto& m : cert.mu) {
    if (!m.is_zero()) {
      EXPECT_TRUE(m.value().is_exact());
    }
  }
  // nu(n) <= L max_{i<n} nu(i), checked directly
  Rational L = pow2q(cert.L_exponent), run = *cert.nu[0].value().as_rational();
  for (long n = 1; n <= 1024; ++n) {
    if (cert.nu[n].is_zero()) continue;
    Rational x = *cert.nu[n].value().as_rational();
    EXPECT_LE(x, L * run) << n;
    run = std::max(run, x);
  }
}

TEST(Mu, ForcedSmallLFails) {
  Case2 c("periodic:/10", "periodic:/1", 1024);
  MuBuildOptions opt;
  opt.force_L_exponent = 0;
  MuCert cert = build_mu_cert(c.wu, c.wv, c.s, c.phi, 1, 1024, opt);
  MuVerdict v = verify_mu_cert(cert, c.wu, c.wv, c.s, c.phi);
  ASSERT_FALSE(v.pass);
  EXPECT_EQ(v.first_failure()->name, "sum_bound");
}

TEST(Mu, EverySingleEntryDoublingIsRejected) {
  Case2 c("periodic:/10", "periodic:/1", 256);
  MuCert cert = build_mu_cert(c.wu, c.wv, c.s, c.phi, 1, 256);
  long tried = 0;
  for (auto field : {&MuCert::mu, &MuCert::nu}) {
    for (size_t i = 0; i < (cert.*field).size(); ++i) {
      if ((cert.*field)[i].is_zero()) continue;
      MuCert t = cert;
      (t.*field)[i] = doubled((t.*field)[i].value());
      EXPECT_FALSE(verify_mu_cert(t, c.wu, c.wv, c.s, c.phi).pass) << i;
      ++tried;
    }
  }
  EXPECT_GE(tried, 6);
}

TEST(Mu, SchemaGuards) {
  Case2 c("periodic:/10", "periodic:/1", 256);
  MuCert cert = build_mu_cert(c.wu, c.wv, c.s, c.phi, 1, 256);
  MuCert t = cert;
  t.nu.pop_back();
  EXPECT_EQ(error_code([&] { verify_mu_cert(t, c.wu, c.wv, c.s, c.phi); }), "SchemaMismatch");
  t = cert;
  t.depth = 512;
  EXPECT_EQ(error_code([&] { verify_mu_cert(t, c.wu, c.wv, c.s, c.phi); }), "SchemaMismatch");
}
