#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <climits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "pofin/embedding.hpp"
#include "pofin/json_io.hpp"

namespace pofin::cli {

namespace {

struct RunConfig {
  long depth = 1024;
  long prec = kDefaultPrec;
  long cap_c = kDefaultCapC;
  long levels = 4;
  unsigned long seed = 0;
  std::string out;
  bool csv = false;
};

struct Problem {
  std::string u, v;
  std::string k = "pow2";
  std::string delta = "1/2";
  std::string alpha = "1";
  std::string envelope = "const:1";
};

NumCfg num_cfg(const RunConfig& rc) {
  NumCfg c = NumCfg::from_env();
  c.prec = rc.prec;
  c.cap_c = rc.cap_c;
  return c;
}

ScaleSystem scale_of(const Json& in) {
  return ScaleSystem(KSpec::parse(in.at("k").get<std::string>()), DeltaSpec::parse(in.at("delta").get<std::string>()));
}

DyadicFunction envelope_of(const Json& in, const ScaleSystem& s, long depth, long prec) {
  BuiltinContext ctx{&s};
  return builtin_function(in.at("envelope").get<std::string>(), depth, ctx, prec);
}

Json inputs_of(const Problem& p) {
  Json in{{"k", p.k}, {"delta", p.delta}, {"alpha", rational_str(parse_rational(p.alpha))}, {"envelope", p.envelope}};
  if (!p.u.empty()) in["u"] = SubsetSpec::parse(p.u).str();
  if (!p.v.empty()) in["v"] = SubsetSpec::parse(p.v).str();
  return in;
}

Json status_entry(const std::string& name, const std::string& status, long index = -1) {
  Json s{{"name", name}, {"status", status}};
  if (index >= 0) s["index"] = index;
  return s;
}

std::string verdict_word(const Verdict3& v) { return v.is_true() ? "pass" : v.is_unknown() ? "unknown" : "fail"; }

Json config_json(const RunConfig& rc) { return Json{{"depth", rc.depth}, {"prec", rc.prec}, {"cap_c", rc.cap_c}}; }

Json wrap(const std::string& kind, const RunConfig& rc, const Json& inputs, const Json& cert, const Json& status) {
  Json doc{{"schema_version", kSchemaVersion},
           {"kind", kind},
           {"config", config_json(rc)},
           {"inputs", inputs},
           {"input_sha256", sha256_hex(inputs.dump())},
           {"certificate", cert},
           {"status", status}};
  doc["integrity_sha256"] = sha256_hex(doc.dump());
  return doc;
}

void emit(const std::string& text, const RunConfig& rc, std::ostream& out) {
  if (rc.out.empty()) {
    out << text;
    return;
  }
  std::filesystem::path dst(rc.out);
  std::filesystem::path tmp = dst;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckError("InvalidInput", "cannot write " + tmp.string());
    f << text;
  }
  std::filesystem::rename(tmp, dst);
}

void emit(const Json& doc, const RunConfig& rc, std::ostream& out) { emit(doc.dump(2) + "\n", rc, out); }

int worst(const Json& status) {
  int code = kPass;
  for (const auto& s : status) {
    const auto& w = s.at("status").get_ref<const std::string&>();
    if (w == "fail") return kFail;
    if (w == "unknown") code = kUnknown;
  }
  return code;
}

void print_status(const Json& status, std::ostream& err) {
  for (const auto& s : status) {
    const auto& w = s.at("status").get_ref<const std::string&>();
    if (w == "pass") continue;
    err << w << ": " << s.at("name").get<std::string>();
    if (s.contains("index")) err << " at " << s.at("index").get<long>();
    if (s.contains("detail")) err << " (" << s.at("detail").get<std::string>() << ")";
    err << "\n";
  }
}

// ---- verification shared by certify and check ----

Json verify_relation(const Json& in, const Json& cert, long depth, const NumCfg& cfg) {
  ScaleSystem s = scale_of(in);
  SubsetSpec u = SubsetSpec::parse(in.at("u").get<std::string>());
  RelationSpec rel(parse_rational(in.at("alpha").get<std::string>()), envelope_of(in, s, depth, cfg.prec),
                   weight_seq(u, s, depth, WindowPolicy::Strict, cfg.prec), cfg);
  DyadicFunction stored = dyadic_function_from_json(cert.at("psi"));
  Json st = Json::array();
  long bad = -1;
  if (stored.depth() != rel.psi().depth()) throw CheckError("SchemaMismatch", "psi length differs from depth");
  for (long n = 0; n <= depth && bad < 0; ++n) {
    if (!stored.at(n).identical(rel.psi().at(n))) bad = n;
  }
  st.push_back(status_entry("psi", bad < 0 ? "pass" : "fail", bad));
  bool k_ok = parse_pow2_str(cert.at("K").get<std::string>()) == rel.k_exponent();
  st.push_back(status_entry("K", k_ok ? "pass" : "fail"));
  return st;
}

Json verify_reduce(const Json& in, const Json& cert, const NumCfg& cfg) {
  MuCert mc = mu_cert_from_json(cert.at("mu"));
  ScaleSystem s = scale_of(in);
  WeightSeq wu = weight_seq(SubsetSpec::parse(in.at("u").get<std::string>()), s, mc.depth, WindowPolicy::Strict, cfg.prec);
  WeightSeq wv = weight_seq(SubsetSpec::parse(in.at("v").get<std::string>()), s, mc.depth, WindowPolicy::Strict, cfg.prec);
  if (parse_rational(in.at("alpha").get<std::string>()) != mc.alpha) throw CheckError("SchemaMismatch", "alpha differs");
  MuVerdict v = verify_mu_cert(mc, wu, wv, s, envelope_of(in, s, mc.depth, cfg.prec), cfg);
  Json st = Json::array();
  for (const auto& c : v.checks) {
    Json e = status_entry(c.name, c.pass ? "pass" : (c.unknown ? "unknown" : "fail"), c.first_fail);
    if (!c.detail.empty()) e["detail"] = c.detail;
    st.push_back(e);
  }
  return st;
}

Json verify_incomparable(const Json& in, const Json& cert, const NumCfg& cfg) {
  ScaleSystem s = scale_of(in);
  SubsetSpec u = SubsetSpec::parse(in.at("u").get<std::string>());
  SubsetSpec v = SubsetSpec::parse(in.at("v").get<std::string>());
  Json st = Json::array();
  for (auto [key, a, b] : {std::tuple{"witness_uv", &u, &v}, std::tuple{"witness_vu", &v, &u}}) {
    IncompWitness w = incomp_witness_from_json(cert.at(key));
    WitnessVerdict vd = verify_incomp_witness(w, *a, *b, s, WindowPolicy::Strict, cfg);
    Json e = status_entry(key, vd.pass ? "pass" : "fail", vd.level);
    if (!vd.reason.empty()) e["detail"] = vd.reason;
    st.push_back(e);
  }
  return st;
}

std::pair<DyadicFunction, DyadicFunction> weighted_pair(const Json& in, long depth, const NumCfg& cfg) {
  ScaleSystem s = scale_of(in);
  DyadicFunction env = envelope_of(in, s, depth, cfg.prec);
  auto side = [&](const char* key) {
    WeightSeq w = weight_seq(SubsetSpec::parse(in.at(key).get<std::string>()), s, depth, WindowPolicy::Strict, cfg.prec);
    return dyadic_product(env, from_weight(w, depth), cfg.prec);
  };
  return {side("u"), side("v")};
}

Json verify_equal(const Json& in, const Json& cert, const NumCfg& cfg) {
  EquivCert c = equiv_cert_from_json(cert.at("equiv"));
  auto [f, g] = weighted_pair(in, c.n_hi, cfg);
  EquivCheck r = check_equiv_cert(c, f, g, cfg);
  Json st = Json::array();
  st.push_back(status_entry("equiv", verdict_word(r.verdict), r.index));
  return st;
}

RelationSpec kappa_relation(const Json& in, long depth, const NumCfg& cfg) {
  ScaleSystem s = scale_of(in);
  std::optional<WeightSeq> w;
  if (in.contains("u")) w = weight_seq(SubsetSpec::parse(in.at("u").get<std::string>()), s, depth, WindowPolicy::Strict, cfg.prec);
  return RelationSpec(parse_rational(in.at("alpha").get<std::string>()), envelope_of(in, s, depth, cfg.prec), w, cfg);
}

Json verify_kappa(const Json& in, const Json& cert, const NumCfg& cfg) {
  KappaCert kc = kappa_cert_from_json(cert.at("kappa"));
  if (parse_rational(in.at("beta").get<std::string>()) != kc.beta) throw CheckError("SchemaMismatch", "beta differs");
  RelationSpec rel = kappa_relation(in, kc.depth, cfg);
  Verdict v = verify_kappa_cert(kc, rel, cfg);
  Json st = Json::array();
  Json e = status_entry("kappa", v.pass ? "pass" : (v.failure == "Unknown" ? "unknown" : "fail"), v.index);
  if (!v.pass) e["detail"] = v.failure + ": " + v.detail;
  st.push_back(e);
  return st;
}

Json verify_doc(const Json& doc, const NumCfg& cfg) {
  const std::string kind = doc.at("kind").get<std::string>();
  const Json& in = doc.at("inputs");
  const Json& cert = doc.at("certificate");
  if (kind == "relation") return verify_relation(in, cert, doc.at("config").at("depth").get<long>(), cfg);
  if (kind == "reduce") return verify_reduce(in, cert, cfg);
  if (kind == "incomparable") return verify_incomparable(in, cert, cfg);
  if (kind == "equal") return verify_equal(in, cert, cfg);
  if (kind == "kappa") return verify_kappa(in, cert, cfg);
  throw CheckError("SchemaMismatch", "unknown certificate kind '" + kind + "'");
}

// ---- verbs ----

int cmd_build(const Problem& p0, const std::string& eta, const RunConfig& rc, std::ostream& out, std::ostream& err) {
  Problem p = p0;
  if (p.u.empty()) p.u = "periodic:/1";
  if (!eta.empty()) {
    ScaleSystem s = eta_scale_system(EtaSpec::parse(eta));
    p.k = s.k_spec().str();
    p.delta = s.delta_spec().str();
  }
  NumCfg cfg = num_cfg(rc);
  Json in = inputs_of(p);
  ScaleSystem s = scale_of(in);
  RelationSpec rel(parse_rational(in.at("alpha").get<std::string>()), envelope_of(in, s, rc.depth, cfg.prec),
                   weight_seq(SubsetSpec::parse(p.u), s, rc.depth, WindowPolicy::Strict, cfg.prec), cfg);
  Json cert{{"psi", to_json(rel.psi())}, {"K", pow2_str(rel.k_exponent())}};
  Json st = verify_relation(in, cert, rc.depth, cfg);
  print_status(st, err);
  emit(wrap("relation", rc, in, cert, st), rc, out);
  return worst(st);
}

int cmd_certify(const std::string& mode, const Problem& p, const std::string& beta, const RunConfig& rc,
                std::ostream& out, std::ostream& err) {
  NumCfg cfg = num_cfg(rc);
  Json in = inputs_of(p);
  ScaleSystem s = scale_of(in);
  Json cert;
  Json st;
  auto need = [&](const char* key) {
    if (!in.contains(key)) throw CheckError("InvalidInput", std::string("--") + key + " is required");
    return SubsetSpec::parse(in.at(key).get<std::string>());
  };
  if (mode == "reduce") {
    SubsetSpec u = need("u"), v = need("v");
    WeightSeq wu = weight_seq(u, s, rc.depth, WindowPolicy::Strict, cfg.prec);
    WeightSeq wv = weight_seq(v, s, rc.depth, WindowPolicy::Strict, cfg.prec);
    DyadicFunction phi = envelope_of(in, s, rc.depth, cfg.prec);
    MuCert mc = build_mu_cert(wu, wv, s, phi, parse_rational(in.at("alpha").get<std::string>()), rc.depth, {}, cfg);
    cert = Json{{"mu", to_json(mc)}};
    st = verify_reduce(in, cert, cfg);
  } else if (mode == "incomparable") {
    SubsetSpec u = need("u"), v = need("v");
    cert = Json{{"witness_uv", to_json(incomparability_witness(u, v, s, rc.levels, WindowPolicy::Strict, cfg))},
                {"witness_vu", to_json(incomparability_witness(v, u, s, rc.levels, WindowPolicy::Strict, cfg))}};
    st = verify_incomparable(in, cert, cfg);
  } else if (mode == "equal") {
    SubsetSpec u = need("u"), v = need("v");
    if (!almost_subset(u, v).yes || !almost_subset(v, u).yes) {
      throw CheckError("NotAlmostEqual", "U and V differ on infinitely many positions");
    }
    auto [f, g] = weighted_pair(in, rc.depth, cfg);
    auto r = equiv_witness(f, g, 0, rc.depth, cfg);
    if (!std::holds_alternative<EquivCert>(r)) throw CheckError("EquivDivergence", "no constant within the cap");
    cert = Json{{"equiv", to_json(std::get<EquivCert>(r))}};
    st = verify_equal(in, cert, cfg);
  } else {
    if (beta.empty()) throw CheckError("InvalidInput", "--beta is required for kappa");
    in["beta"] = rational_str(parse_rational(beta));
    RelationSpec rel = kappa_relation(in, rc.depth, cfg);
    cert = Json{{"kappa", to_json(solve_kappa_closed(rel, parse_rational(beta), rc.depth, cfg))}};
    st = verify_kappa(in, cert, cfg);
  }
  print_status(st, err);
  int code = worst(st);
  if (code == kPass) emit(wrap(mode, rc, in, cert, st), rc, out);
  return code;
}

Json read_doc(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckError("InvalidInput", "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::exception& e) {
    throw CheckError("SchemaMismatch", std::string("not a certificate: ") + e.what());
  }
}

int cmd_check(const std::string& path, bool no_integrity, const RunConfig& rc, std::ostream& out, std::ostream& err) {
  Json doc = read_doc(path);
  try {
    if (!doc.is_object() || doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw CheckError("SchemaMismatch", "unsupported schema_version");
    }
    if (doc.at("input_sha256").get<std::string>() != sha256_hex(doc.at("inputs").dump())) {
      err << "fail: input hash mismatch\n";
      return kFail;
    }
    if (!no_integrity) {
      Json body = doc;
      body.erase("integrity_sha256");
      if (doc.at("integrity_sha256").get<std::string>() != sha256_hex(body.dump())) {
        err << "fail: integrity hash mismatch\n";
        return kFail;
      }
    }
    RunConfig file_rc = rc;
    file_rc.prec = doc.at("config").at("prec").get<long>();
    file_rc.cap_c = doc.at("config").at("cap_c").get<long>();
    Json st = verify_doc(doc, num_cfg(file_rc));
    print_status(st, err);
    int code = worst(st);
    out << (code == kPass ? "pass" : code == kUnknown ? "unknown" : "fail") << " " << doc.at("kind").get<std::string>()
        << "\n";
    return code;
  } catch (const Json::exception& e) {
    throw CheckError("SchemaMismatch", e.what());
  }
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void print(std::ostream& out, bool csv) const {
    auto line = [&](const std::vector<std::string>& r) {
      for (size_t i = 0; i < r.size(); ++i) {
        if (csv) {
          out << (i ? "," : "") << r[i];
        } else {
          out << (i ? "  " : "") << std::setw(14) << r[i];
        }
      }
      out << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

Table report_table(const Json& doc, const NumCfg& cfg) {
  Table t{{"n", "log2_f_u", "log2_f_v", "log2_ratio"}, {}};
  if (!doc.is_object() || !doc.contains("kind")) return t;
  const std::string kind = doc.at("kind").get<std::string>();
  const Json& in = doc.at("inputs");
  const Json& cert = doc.at("certificate");
  if (kind == "incomparable") {
    t.header = {"l", "log2_ratio", "log2_bound", "direction"};
    for (auto [key, dir_u, dir_v] : {std::tuple{"witness_uv", "u/v", "v/u"}, std::tuple{"witness_vu", "v/u", "u/v"}}) {
      IncompWitness w = incomp_witness_from_json(cert.at(key));
      auto rows = [&](const std::vector<std::optional<PosValue>>& ratios, const char* dir) {
        for (size_t l = 0; l < ratios.size() && l < w.bound.size(); ++l) {
          t.rows.push_back({std::to_string(l), ratios[l] ? num(ratios[l]->log2_approx()) : "",
                            num(w.bound[l].log2_approx()), std::string(key) + ":" + dir});
        }
      };
      rows(w.ratio_u, dir_u);
      rows(w.ratio_v, dir_v);
    }
    return t;
  }
  if (kind == "kappa") {
    t.header = {"n", "log2_kappa"};
    KappaCert kc = kappa_cert_from_json(cert.at("kappa"));
    for (size_t n = 0; n < kc.kappa.size(); ++n) t.rows.push_back({std::to_string(n), num(kc.kappa[n].log2_approx())});
    return t;
  }
  if (kind == "relation") {
    t.header = {"n", "log2_f"};
    DyadicFunction psi = dyadic_function_from_json(cert.at("psi"));
    double a = parse_rational(in.at("alpha").get<std::string>()).get_d();
    for (long n = 0; n <= psi.depth(); ++n) {
      t.rows.push_back({std::to_string(n), psi.at(n).is_zero() ? "" : num(-a * n + psi.at(n).value().log2_approx())});
    }
    return t;
  }
  long depth = kind == "reduce" ? cert.at("mu").at("depth").get<long>()
                                : cert.at("equiv").at("n_hi").get<long>();
  auto [f, g] = weighted_pair(in, depth, cfg);
  double a = parse_rational(in.at("alpha").get<std::string>()).get_d();
  for (long n = 0; n <= depth; ++n) {
    double lf = -a * n + f.at(n).value().log2_approx();
    double lg = -a * n + g.at(n).value().log2_approx();
    t.rows.push_back({std::to_string(n), num(lf), num(lg), num(lf - lg)});
  }
  return t;
}

int cmd_report(const std::string& path, const RunConfig& rc, std::ostream& out) {
  Json doc = read_doc(path);
  std::ostringstream ss;
  try {
    report_table(doc, num_cfg(rc)).print(ss, rc.csv);
  } catch (const Json::exception& e) {
    throw CheckError("SchemaMismatch", e.what());
  }
  emit(ss.str(), rc, out);
  return kPass;
}

int cmd_classify(const Problem& p, const RunConfig& rc, std::ostream& out) {
  NumCfg cfg = num_cfg(rc);
  Json in = inputs_of(p);
  ScaleSystem s = scale_of(in);
  ClassifyOptions opt;
  opt.levels = rc.levels;
  PairVerdict v = classify_pair(SubsetSpec::parse(in.at("u").get<std::string>()),
                                SubsetSpec::parse(in.at("v").get<std::string>()), s,
                                parse_rational(in.at("alpha").get<std::string>()), envelope_of(in, s, rc.depth, cfg.prec),
                                rc.depth, opt, cfg);
  emit(Json{{"inputs", in}, {"config", config_json(rc)}, {"verdict", to_json(v)}}, rc, out);
  return v.verified ? kPass : kFail;
}

int cmd_witness(const Problem& p, const RunConfig& rc, std::ostream& out) {
  NumCfg cfg = num_cfg(rc);
  Json in = inputs_of(p);
  ScaleSystem s = scale_of(in);
  SubsetSpec u = SubsetSpec::parse(in.at("u").get<std::string>()), v = SubsetSpec::parse(in.at("v").get<std::string>());
  IncompWitness w = incomparability_witness(u, v, s, rc.levels, WindowPolicy::Strict, cfg);
  WitnessVerdict vd = verify_incomp_witness(w, u, v, s, WindowPolicy::Strict, cfg);
  emit(Json{{"inputs", in}, {"witness", to_json(w)}, {"verified", vd.pass}}, rc, out);
  return vd.pass ? kPass : kFail;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(part);
  return out;
}

int cmd_antichain(const std::string& branches, const Problem& p, const RunConfig& rc, std::ostream& out) {
  NumCfg cfg = num_cfg(rc);
  ScaleSystem s = scale_of(inputs_of(p));
  AntichainResult r = antichain(split_commas(branches), s, rc.depth, rc.levels, cfg);
  Json pairs = Json::array();
  for (size_t i = 0; i < r.sets.size(); ++i) {
    for (size_t j = i + 1; j < r.sets.size(); ++j) {
      Json e = to_json(*r.verdicts[i][j]);
      e["i"] = i;
      e["j"] = j;
      pairs.push_back(e);
    }
  }
  emit(Json{{"branches", split_commas(branches)},
            {"depth", rc.depth},
            {"pairs", r.pairs},
            {"incomparable", r.incomparable},
            {"label", "within window depth"},
            {"verdicts", pairs}},
       rc, out);
  return r.incomparable == r.pairs ? kPass : kFail;
}

int cmd_eta(const std::string& eta, long m_max, const RunConfig& rc, std::ostream& out) {
  EtaScalesReport r = eta_scales(EtaSpec::parse(eta), m_max, num_cfg(rc));
  Json d = Json::array();
  for (const auto& x : r.delta) d.push_back(to_json(x));
  Json dist = Json::array();
  for (long x : r.distance_log2_hi) dist.push_back(x == LONG_MIN ? Json("0") : Json(pow2_str(x)));
  emit(Json{{"eta", eta},
            {"j0", r.j0},
            {"delta", d},
            {"inf", to_json(r.inf)},
            {"sup", to_json(r.sup)},
            {"limit", to_json(r.limit)},
            {"distance_to_limit", dist},
            {"bounds_ok", r.bounds_ok},
            {"trending", r.trending}},
       rc, out);
  return r.bounds_ok ? kPass : kFail;
}

int cmd_sandwich(const std::string& eta, const std::string& eta_prime, const Problem& p, const RunConfig& rc,
                 std::ostream& out) {
  NumCfg cfg = num_cfg(rc);
  SubsetSpec u = SubsetSpec::parse(p.u.empty() ? "periodic:/1" : p.u);
  SandwichReport r = sandwich_build(EtaSpec::parse(eta), EtaSpec::parse(eta_prime), u, parse_rational(p.alpha),
                                    rc.depth, cfg);
  emit(Json{{"eta", eta},
            {"eta_prime", eta_prime},
            {"set", u.str()},
            {"j0", r.j0},
            {"delta", rational_str(r.delta)},
            {"scale", to_json(r.scale)},
            {"R2", to_json(r.r2)},
            {"A1", to_json(r.a1)},
            {"identity_checked", r.identity_checked},
            {"identity_ok", r.identity_ok}},
       rc, out);
  return r.r2.pass && r.identity_ok ? kPass : kFail;
}

std::string random_periodic(std::mt19937_64& rng) {
  auto uni = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  std::string pre, per;
  for (long i = uni(0, 3); i > 0; --i) pre += uni(0, 1) ? '1' : '0';
  for (long i = uni(1, 4); i > 0; --i) per += uni(0, 1) ? '1' : '0';
  return "periodic:" + pre + "/" + per;
}

int cmd_sweep(long count, const Problem& p, const RunConfig& rc, std::ostream& out) {
  NumCfg cfg = num_cfg(rc);
  ScaleSystem s = scale_of(inputs_of(p));
  DyadicFunction phi = builtin_function(p.envelope, rc.depth, BuiltinContext{&s}, cfg.prec);
  std::mt19937_64 rng(rc.seed);
  ClassifyOptions opt;
  opt.levels = rc.levels;
  long agree = 0, verified = 0;
  Json rows = Json::array();
  for (long i = 0; i < count; ++i) {
    SubsetSpec u = SubsetSpec::parse(random_periodic(rng)), v = SubsetSpec::parse(random_periodic(rng));
    bool uv = almost_subset(u, v).yes, vu = almost_subset(v, u).yes;
    PairKind want = uv && vu ? PairKind::AlmostEqual
                    : uv     ? PairKind::RightReduces
                    : vu     ? PairKind::LeftReduces
                             : PairKind::Incomparable;
    PairVerdict pv = classify_pair(u, v, s, parse_rational(p.alpha), phi, rc.depth, opt, cfg);
    agree += pv.kind == want;
    verified += pv.verified;
    rows.push_back(Json{{"u", u.str()}, {"v", v.str()}, {"kind", pair_kind_str(pv.kind)}, {"verified", pv.verified}});
  }
  emit(Json{{"seed", rc.seed}, {"count", count}, {"agree", agree}, {"verified", verified}, {"pairs", rows}}, rc, out);
  return agree == count && verified == count ? kPass : kFail;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pofin: build and check certificates for weighted dyadic relations"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig rc;
  app.add_option("--depth", rc.depth, "grid depth n <= depth")->capture_default_str();
  app.add_option("--prec", rc.prec, "working precision in bits")->capture_default_str();
  app.add_option("--cap-c", rc.cap_c, "exponent cap for constant searches")->capture_default_str();
  app.add_option("--levels", rc.levels, "witness levels")->capture_default_str();
  app.add_option("--seed", rc.seed, "seed for randomized sweeps")->capture_default_str();
  app.add_option("--out", rc.out, "output file (written atomically)");
  app.add_flag("--csv", rc.csv, "CSV output for report");

  Problem p;
  auto problem_opts = [&](CLI::App* sub, bool sets) {
    if (sets) {
      sub->add_option("--u", p.u, "set U");
      sub->add_option("--v", p.v, "set V");
    }
    sub->add_option("--scale", p.k, "k_m spec: pow2, pow2shift:s, tower:j, or a list")->capture_default_str();
    sub->add_option("--delta", p.delta, "delta spec: q, const:q, list, eta:...")->capture_default_str();
    sub->add_option("--alpha", p.alpha, "exponent alpha >= 1")->capture_default_str();
    sub->add_option("--envelope", p.envelope, "envelope builtin")->capture_default_str();
  };

  std::string eta, eta_prime, beta, mode, file, branches;
  bool no_integrity = false;
  long m_max = 20, count = 50;

  auto* build = app.add_subcommand("build", "build a relation spec file");
  problem_opts(build, false);
  build->add_option("--set", p.u, "set U (default omega)");
  build->add_option("--eta", eta, "eta entries; selects tower scales");

  auto* certify = app.add_subcommand("certify", "build and verify a certificate");
  certify->add_option("mode", mode, "reduce | incomparable | equal | kappa")
      ->required()
      ->check(CLI::IsMember({"reduce", "incomparable", "equal", "kappa"}));
  problem_opts(certify, true);
  certify->add_option("--beta", beta, "target exponent for kappa");

  auto* check = app.add_subcommand("check", "re-verify a certificate file");
  check->add_option("file", file)->required();
  check->add_flag("--no-integrity", no_integrity, "skip the integrity hash and rely on re-verification only");

  auto* report = app.add_subcommand("report", "tabulate a certificate or spec");
  report->add_option("file", file)->required();

  auto* classify = app.add_subcommand("classify", "classify a pair of periodic sets");
  problem_opts(classify, true);
  auto* witness = app.add_subcommand("witness", "incomparability witness for U against V");
  problem_opts(witness, true);
  auto* anti = app.add_subcommand("antichain", "pairwise witnesses for tree branches");
  problem_opts(anti, false);
  anti->add_option("--branches", branches, "comma-separated 0/1 codes")->required();
  auto* eta_cmd = app.add_subcommand("eta", "delta_m^eta over 1 <= m <= m-max");
  eta_cmd->add_option("--eta", eta)->required();
  eta_cmd->add_option("--m-max", m_max)->capture_default_str();
  auto* sandwich = app.add_subcommand("sandwich", "iterated-log sandwich for eta <lex eta'");
  problem_opts(sandwich, false);
  sandwich->add_option("--set", p.u, "set U (default omega)");
  sandwich->add_option("--eta", eta)->required();
  sandwich->add_option("--eta-prime", eta_prime)->required();
  auto* sweep = app.add_subcommand("sweep", "classify random periodic pairs against the subset oracle");
  problem_opts(sweep, false);
  sweep->add_option("--count", count)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }
  if (rc.depth < 16 || rc.prec < 64 || rc.prec > NumCfg::from_env().prec_cap || rc.cap_c < 1 || rc.levels < 1) {
    err << "usage: need depth >= 16, 64 <= prec <= precision cap, cap-c >= 1, levels >= 1\n";
    return kUsage;
  }

  try {
    if (*build) return cmd_build(p, eta, rc, out, err);
    if (*certify) return cmd_certify(mode, p, beta, rc, out, err);
    if (*check) return cmd_check(file, no_integrity, rc, out, err);
    if (*report) return cmd_report(file, rc, out);
    if (*classify) return cmd_classify(p, rc, out);
    if (*witness) return cmd_witness(p, rc, out);
    if (*anti) return cmd_antichain(branches, p, rc, out);
    if (*eta_cmd) return cmd_eta(eta, m_max, rc, out);
    if (*sandwich) return cmd_sandwich(eta, eta_prime, p, rc, out);
    if (*sweep) return cmd_sweep(count, p, rc, out);
  } catch (const CheckError& e) {
    const std::string& c = e.code();
    err << (c == "Unknown" ? "unknown" : "fail") << ": " << e.what();
    if (e.index()) err << " (index " << *e.index() << ")";
    err << "\n";
    if (c == "Unknown") return kUnknown;
    if (c == "ParseError" || c == "InvalidInput" || c == "InvalidDepth") return kUsage;
    return kFail;
  } catch (const std::exception& e) {
    err << "fail: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}

}  // namespace pofin::cli
