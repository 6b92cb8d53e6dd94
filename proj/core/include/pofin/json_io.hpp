#pragma once

// JSON encoding of values, scale systems and certificates.  Objects use
// nlohmann::json's sorted keys, so dumps are byte-stable.
//
//   PosValue  {"exact": "p/q"} | {"log2": {"lo": "m*2^e", "hi": "m*2^e"}}
//   NonNeg    PosValue | {"zero": true}
//   constants "2^j"

#include <nlohmann/json.hpp>

#include "pofin/embedding.hpp"
#include "pofin/reduction_engine.hpp"

namespace pofin {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const Rational& q);
Rational rational_from_json(const Json& j);
Json to_json(const PosValue& v);
PosValue pos_value_from_json(const Json& j);
Json to_json(const NonNeg& v);
NonNeg non_neg_from_json(const Json& j);

Json to_json(const ScaleSystem& s);
ScaleSystem scale_from_json(const Json& j);

Json to_json(const DyadicFunction& f);
DyadicFunction dyadic_function_from_json(const Json& j);

Json to_json(const EquivCert& c);
EquivCert equiv_cert_from_json(const Json& j);

Json to_json(const KappaCert& c);
KappaCert kappa_cert_from_json(const Json& j);

Json to_json(const MuCert& c);
MuCert mu_cert_from_json(const Json& j);

Json to_json(const IncompWitness& w);
IncompWitness incomp_witness_from_json(const Json& j);

Json to_json(const MuVerdict& v);
Json to_json(const A2Result& r);
Json to_json(const A1Cert& c);
Json to_json(const R2Report& r);
Json to_json(const PairVerdict& v);

}  // namespace pofin
