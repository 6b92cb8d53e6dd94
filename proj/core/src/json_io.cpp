#include "pofin/json_io.hpp"

namespace pofin {

namespace {

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw CheckError("SchemaMismatch", std::string(what) + ": " + e.what());
  } catch (const CheckError& e) {
    if (e.code() == "SchemaMismatch") throw;
    throw CheckError("SchemaMismatch", std::string(what) + ": " + e.what());
  }
}

long pow2_field(const Json& j, const char* key) { return parse_pow2_str(j.at(key).get<std::string>()); }

Json nn_array(const std::vector<NonNeg>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(to_json(x));
  return a;
}

std::vector<NonNeg> nn_vector(const Json& j) {
  std::vector<NonNeg> out;
  for (const auto& x : j) out.push_back(non_neg_from_json(x));
  return out;
}

Json big_array(const std::vector<BigInt>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(x.get_str());
  return a;
}

std::vector<BigInt> big_vector(const Json& j) {
  std::vector<BigInt> out;
  for (const auto& x : j) {
    BigInt b;
    if (b.set_str(x.get<std::string>(), 10) != 0) throw CheckError("SchemaMismatch", "bad integer");
    out.push_back(b);
  }
  return out;
}

}  // namespace

Json to_json(const Rational& q) { return rational_str(q); }

Rational rational_from_json(const Json& j) {
  return guarded("rational", [&] { return parse_rational(j.get<std::string>()); });
}

Json to_json(const PosValue& v) {
  if (v.is_exact()) return Json{{"exact", rational_str(v.exact_value())}};
  return Json{{"log2", {{"lo", v.log_iv().lo.str()}, {"hi", v.log_iv().hi.str()}}}};
}

PosValue pos_value_from_json(const Json& j) {
  return guarded("value", [&] {
    if (j.contains("exact")) {
      Rational q = parse_rational(j.at("exact").get<std::string>());
      if (q <= 0) throw CheckError("SchemaMismatch", "exact value must be positive");
      return PosValue::exact(q);
    }
    const Json& l = j.at("log2");
    BigDyadic lo = BigDyadic::parse(l.at("lo").get<std::string>());
    BigDyadic hi = BigDyadic::parse(l.at("hi").get<std::string>());
    if (hi < lo) throw CheckError("SchemaMismatch", "log2 interval reversed");
    return PosValue::log2_interval(lo, hi);
  });
}

Json to_json(const NonNeg& v) { return v.is_zero() ? Json{{"zero", true}} : to_json(v.value()); }

NonNeg non_neg_from_json(const Json& j) {
  if (j.is_object() && j.contains("zero")) return NonNeg::zero();
  return NonNeg(pos_value_from_json(j));
}

Json to_json(const ScaleSystem& s) {
  return Json{{"k", s.k_spec().str()},
              {"delta", s.delta_spec().str()},
              {"delta_inf", rational_str(s.delta_inf())},
              {"delta_sup", rational_str(s.delta_sup())}};
}

ScaleSystem scale_from_json(const Json& j) {
  return guarded("scale", [&] {
    return ScaleSystem(KSpec::parse(j.at("k").get<std::string>()), DeltaSpec::parse(j.at("delta").get<std::string>()),
                       parse_rational(j.at("delta_inf").get<std::string>()),
                       parse_rational(j.at("delta_sup").get<std::string>()));
  });
}

Json to_json(const DyadicFunction& f) {
  return Json{{"interp", f.interp() == Interp::Affine ? "affine" : "monotone_join"}, {"samples", nn_array(f.samples())}};
}

DyadicFunction dyadic_function_from_json(const Json& j) {
  return guarded("function", [&] {
    Interp in = j.at("interp").get<std::string>() == "affine" ? Interp::Affine : Interp::MonotoneJoin;
    return DyadicFunction(nn_vector(j.at("samples")), in);
  });
}

Json to_json(const EquivCert& c) { return Json{{"C", pow2_str(c.exponent)}, {"n_lo", c.n_lo}, {"n_hi", c.n_hi}}; }

EquivCert equiv_cert_from_json(const Json& j) {
  return guarded("equiv", [&] {
    return EquivCert{pow2_field(j, "C"), j.at("n_lo").get<long>(), j.at("n_hi").get<long>()};
  });
}

Json to_json(const KappaCert& c) {
  Json k = Json::array();
  for (const auto& v : c.kappa) k.push_back(to_json(v));
  Json out{{"alpha", rational_str(c.alpha)},
           {"beta", rational_str(c.beta)},
           {"depth", c.depth},
           {"n0", c.n0},
           {"epsilon", rational_str(c.epsilon)},
           {"M", to_json(c.normalizer)},
           {"C_ess", pow2_str(c.c_ess_exponent)},
           {"L", pow2_str(c.L_exponent)},
           {"kappa", k}};
  if (c.proof_L3_exponent) out["L3_proof"] = pow2_str(*c.proof_L3_exponent);
  return out;
}

KappaCert kappa_cert_from_json(const Json& j) {
  return guarded("kappa certificate", [&] {
    KappaCert c;
    c.alpha = parse_rational(j.at("alpha").get<std::string>());
    c.beta = parse_rational(j.at("beta").get<std::string>());
    c.depth = j.at("depth").get<long>();
    c.n0 = j.at("n0").get<long>();
    c.epsilon = parse_rational(j.at("epsilon").get<std::string>());
    c.normalizer = pos_value_from_json(j.at("M"));
    c.c_ess_exponent = pow2_field(j, "C_ess");
    c.L_exponent = pow2_field(j, "L");
    if (j.contains("L3_proof")) c.proof_L3_exponent = pow2_field(j, "L3_proof");
    for (const auto& v : j.at("kappa")) c.kappa.push_back(pos_value_from_json(v));
    return c;
  });
}

Json to_json(const MuCert& c) {
  return Json{{"alpha", rational_str(c.alpha)},
              {"depth", c.depth},
              {"n0", c.n0},
              {"n1", c.n1},
              {"K", pow2_str(c.k_exponent)},
              {"K_tail", pow2_str(c.k_tail_exponent)},
              {"C_A", pow2_str(c.ca_exponent)},
              {"L", pow2_str(c.L_exponent)},
              {"sum_depth", c.sum_depth},
              {"eps", rational_str(c.eps)},
              {"lambda", rational_str(c.lambda)},
              {"mu", nn_array(c.mu)},
              {"nu", nn_array(c.nu)}};
}

MuCert mu_cert_from_json(const Json& j) {
  return guarded("mu certificate", [&] {
    MuCert c;
    c.alpha = parse_rational(j.at("alpha").get<std::string>());
    c.depth = j.at("depth").get<long>();
    c.n0 = j.at("n0").get<long>();
    c.n1 = j.at("n1").get<long>();
    c.k_exponent = pow2_field(j, "K");
    c.k_tail_exponent = pow2_field(j, "K_tail");
    c.ca_exponent = pow2_field(j, "C_A");
    c.L_exponent = pow2_field(j, "L");
    c.sum_depth = j.at("sum_depth").get<long>();
    c.eps = parse_rational(j.at("eps").get<std::string>());
    c.lambda = parse_rational(j.at("lambda").get<std::string>());
    c.mu = nn_vector(j.at("mu"));
    c.nu = nn_vector(j.at("nu"));
    return c;
  });
}

Json to_json(const IncompWitness& w) {
  Json ru = Json::array(), rv = Json::array(), b = Json::array();
  for (const auto& r : w.ratio_u) ru.push_back(r ? to_json(*r) : Json(nullptr));
  for (const auto& r : w.ratio_v) rv.push_back(r ? to_json(*r) : Json(nullptr));
  for (const auto& x : w.bound) b.push_back(to_json(x));
  return Json{{"one_sided", w.one_sided},
              {"p", w.p},
              {"delta", rational_str(w.delta)},
              {"Delta", rational_str(w.Delta)},
              {"levels", w.levels},
              {"mode", w.mode},
              {"u", big_array(w.u)},
              {"v", big_array(w.v)},
              {"m", big_array(w.m)},
              {"n", big_array(w.n)},
              {"ratio_u", ru},
              {"ratio_v", rv},
              {"bound", b}};
}

IncompWitness incomp_witness_from_json(const Json& j) {
  return guarded("witness", [&] {
    IncompWitness w;
    w.one_sided = j.at("one_sided").get<bool>();
    w.p = j.at("p").get<long>();
    w.delta = parse_rational(j.at("delta").get<std::string>());
    w.Delta = parse_rational(j.at("Delta").get<std::string>());
    w.levels = j.at("levels").get<long>();
    w.mode = j.at("mode").get<std::string>();
    w.u = big_vector(j.at("u"));
    w.v = big_vector(j.at("v"));
    w.m = big_vector(j.at("m"));
    w.n = big_vector(j.at("n"));
    for (const auto& r : j.at("ratio_u")) w.ratio_u.push_back(r.is_null() ? std::nullopt : std::optional(pos_value_from_json(r)));
    for (const auto& r : j.at("ratio_v")) w.ratio_v.push_back(r.is_null() ? std::nullopt : std::optional(pos_value_from_json(r)));
    for (const auto& b : j.at("bound")) w.bound.push_back(pos_value_from_json(b));
    return w;
  });
}

Json to_json(const MuVerdict& v) {
  Json a = Json::array();
  for (const auto& c : v.checks) {
    a.push_back(Json{{"name", c.name},
                     {"status", c.pass ? "pass" : (c.unknown ? "unknown" : "fail")},
                     {"first_fail", c.first_fail},
                     {"detail", c.detail}});
  }
  return Json{{"pass", v.pass}, {"checks", a}};
}

Json to_json(const A2Result& r) {
  return Json{{"outcome", a2_outcome_str(r.outcome)}, {"l", r.l}, {"ratio_log2_hi", r.ratio_log2_hi}};
}

Json to_json(const A1Cert& c) {
  return Json{{"epsilon", rational_str(c.epsilon)},
              {"epsilon_psi", rational_str(c.epsilon_psi)},
              {"K", rational_str(c.K)},
              {"delta", rational_str(c.delta)},
              {"n_lo", c.n_lo},
              {"n_hi", c.n_hi}};
}

Json to_json(const R2Report& r) {
  Json out{{"pass", r.pass},
           {"R1", r.r1},
           {"C", pow2_str(r.exponent)},
           {"depth", r.depth},
           {"worst", {r.worst_a, r.worst_b}}};
  if (r.proof_exponent) out["C_proof"] = pow2_str(*r.proof_exponent);
  return out;
}

Json to_json(const PairVerdict& v) {
  Json out{{"kind", pair_kind_str(v.kind)}, {"verified", v.verified}, {"within_window", v.within_window}};
  if (v.equiv) {
    out["equiv"] = to_json(*v.equiv);
    out["differing_fires"] = v.differing_fires;
  }
  if (v.reduction) {
    const auto& r = *v.reduction;
    out["reduction"] = Json{{"lower", r.lower.str()},
                            {"upper", r.upper.str()},
                            {"lower_cap", r.lower_cap.str()},
                            {"lower_equiv", to_json(r.lower_equiv)},
                            {"mu", to_json(r.mu)},
                            {"mu_verdict", to_json(r.mu_verdict)},
                            {"converse_idx", r.converse_idx},
                            {"converse", to_json(r.converse)},
                            {"converse_grid", to_json(r.converse_grid)},
                            {"A1", to_json(r.a1)}};
  }
  if (v.uv) out["witness_uv"] = to_json(*v.uv);
  if (v.vu) out["witness_vu"] = to_json(*v.vu);
  return out;
}

}  // namespace pofin
