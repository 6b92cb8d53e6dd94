#include <benchmark/benchmark.h>

#include "pofin/embedding.hpp"

using namespace pofin;

namespace {

const ScaleSystem& half() {
  static const ScaleSystem s = ScaleSystem::pow2(Rational(1, 2));
  return s;
}

void BM_PowLogPoint(benchmark::State& st) {
  PosValue x = pv_pow_rat(PosValue::exact(3), Rational(1, 2));
  for (auto _ : st) {
    PosValue y = x;
    for (int i = 0; i < 64; ++i) y = pv_mul(y, x);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_PowLogPoint);

void BM_CompareExact(benchmark::State& st) {
  PosValue a = PosValue::exact(Rational(1000001, 1000000)), b = PosValue::exact(Rational(1000000, 999999));
  for (auto _ : st) benchmark::DoNotOptimize(pv_lt(a, b));
}
BENCHMARK(BM_CompareExact);

void BM_WeightSeq(benchmark::State& st) {
  SubsetSpec u = SubsetSpec::parse("periodic:/10");
  for (auto _ : st) benchmark::DoNotOptimize(weight_seq(u, half(), st.range(0)));
}
BENCHMARK(BM_WeightSeq)->Arg(256)->Arg(1024)->Arg(4096);

void BM_KappaSolve(benchmark::State& st) {
  long depth = st.range(0);
  RelationSpec r(1, builtin_function("const:1", depth));
  for (auto _ : st) {
    KappaCert c = solve_kappa_closed(r, 2, depth);
    benchmark::DoNotOptimize(verify_kappa_cert(c, r));
  }
}
BENCHMARK(BM_KappaSolve)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MuCert(benchmark::State& st) {
  long depth = st.range(0);
  WeightSeq wu = weight_seq(SubsetSpec::parse("periodic:/10"), half(), depth);
  WeightSeq wv = weight_seq(SubsetSpec::parse("periodic:/1"), half(), depth);
  DyadicFunction phi = builtin_function("const:1", depth);
  for (auto _ : st) {
    MuCert c = build_mu_cert(wu, wv, half(), phi, 1, depth);
    benchmark::DoNotOptimize(verify_mu_cert(c, wu, wv, half(), phi));
  }
}
BENCHMARK(BM_MuCert)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Witness(benchmark::State& st) {
  SubsetSpec u = SubsetSpec::parse("periodic:/10"), v = SubsetSpec::parse("periodic:/01");
  for (auto _ : st) {
    IncompWitness w = incomparability_witness(u, v, half(), st.range(0));
    benchmark::DoNotOptimize(verify_incomp_witness(w, u, v, half()));
  }
}
BENCHMARK(BM_Witness)->Arg(4)->Arg(16);

void BM_Antichain(benchmark::State& st) {
  std::vector<std::string> codes;
  for (int i = 0; i < st.range(0); ++i) {
    std::string c;
    for (int b = 3; b >= 0; --b) c += (i >> b) & 1 ? '1' : '0';
    codes.push_back(c);
  }
  for (auto _ : st) benchmark::DoNotOptimize(antichain(codes, half(), 64));
}
BENCHMARK(BM_Antichain)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
