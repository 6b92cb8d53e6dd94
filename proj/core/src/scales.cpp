#include "pofin/scales.hpp"

#include <algorithm>

namespace pofin {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw CheckError("ParseError", "bad " + what + " '" + s + "'");
}

BlockPartition partition_covering(const BigInt& m) {
  long l = 1;
  while (BlockPartition(l).a(l + 1) <= m) ++l;
  return BlockPartition(l);
}

bool overlaps(const PosValue& a, const PosValue& b, const NumCfg& cfg) {
  if (a.is_exact() && b.is_exact()) return a.exact_value() == b.exact_value();
  return !pv_le(a, b, cfg).is_false() && !pv_le(b, a, cfg).is_false();
}

}  // namespace

// ------------------------------------------------------------ partition

BlockPartition::BlockPartition(long l_max) {
  if (l_max < 0) throw std::invalid_argument("l_max must be >= 0");
  a_.reserve(static_cast<size_t>(l_max) + 2);
  a_.emplace_back(0);
  for (long l = 1; l <= l_max + 1; ++l) {
    const BigInt& prev = a_.back();
    a_.push_back(prev + 1 + (l - 1) * prev);
  }
}

std::optional<long> BlockPartition::block_of(const BigInt& m) const {
  if (m < 0) return std::nullopt;
  auto it = std::upper_bound(a_.begin(), a_.end(), m);
  if (it == a_.end()) return std::nullopt;
  return static_cast<long>(it - a_.begin()) - 1;
}

BlockPartition block_partition(long l_max) { return BlockPartition(l_max); }

// ------------------------------------------------------------ specs

KSpec KSpec::parse(const std::string& text) {
  KSpec k;
  if (text == "pow2") return k;
  if (text.rfind("pow2shift:", 0) == 0) {
    k.kind = Kind::Pow2Shift;
    k.param = parse_long(text.substr(10), "shift");
    return k;
  }
  if (text.rfind("tower:", 0) == 0) {
    k.kind = Kind::Tower;
    k.param = parse_long(text.substr(6), "tower index");
    if (k.param < 0) throw CheckError("ParseError", "tower index must be >= 0");
    return k;
  }
  k.kind = Kind::List;
  for (const auto& part : split(text, ',')) {
    BigInt v;
    if (part.empty() || v.set_str(part, 10) != 0) throw CheckError("ParseError", "bad k list entry '" + part + "'");
    k.list.push_back(v);
  }
  return k;
}

std::string KSpec::str() const {
  switch (kind) {
    case Kind::Pow2Shift:
      return "pow2shift:" + std::to_string(param);
    case Kind::Tower:
      return "tower:" + std::to_string(param);
    case Kind::List: {
      std::string out;
      for (size_t i = 0; i < list.size(); ++i) out += (i ? "," : "") + list[i].get_str();
      return out;
    }
  }
  return {};
}

DeltaSpec DeltaSpec::parse(const std::string& text) {
  DeltaSpec d;
  if (text.rfind("const:", 0) == 0) {
    d.c = parse_rational(text.substr(6));
    return d;
  }
  if (text.rfind("eta:", 0) == 0) {
    d.kind = Kind::Eta;
    d.eta = EtaSpec::parse(text.substr(4));
    return d;
  }
  auto parts = split(text, ',');
  if (parts.size() == 1) {
    d.c = parse_rational(parts[0]);
    return d;
  }
  d.kind = Kind::List;
  for (const auto& p : parts) d.list.push_back(parse_rational(p));
  return d;
}

std::string DeltaSpec::str() const {
  switch (kind) {
    case Kind::Const:
      return "const:" + rational_str(c);
    case Kind::Eta:
      return "eta:" + eta.str();
    case Kind::List: {
      std::string out;
      for (size_t i = 0; i < list.size(); ++i) out += (i ? "," : "") + rational_str(list[i]);
      return out;
    }
  }
  return {};
}

// ------------------------------------------------------------ scale system

ScaleSystem::ScaleSystem(KSpec k, DeltaSpec delta, std::optional<Rational> delta_inf,
                         std::optional<Rational> delta_sup, long eta_m_max)
    : k_(std::move(k)), delta_(std::move(delta)) {
  auto bad = [](const std::string& why) { throw CheckError("InvalidScale", why); };
  switch (k_.kind) {
    case KSpec::Kind::Pow2Shift:
      if (k_.param < 1) bad("k_0 = 2^shift must be >= 2");
      break;
    case KSpec::Kind::Tower:
      break;
    case KSpec::Kind::List:
      if (k_.list.empty()) bad("empty k list");
      if (k_.list[0] < 2) bad("k_0 must be >= 2");
      for (size_t i = 1; i < k_.list.size(); ++i) {
        if (k_.list[i] < 2 * k_.list[i - 1]) bad("k_(m+1) >= 2 k_m violated at m=" + std::to_string(i - 1));
      }
      break;
  }
  std::vector<Rational> ds;
  if (delta_.kind == DeltaSpec::Kind::Const) ds = {delta_.c};
  if (delta_.kind == DeltaSpec::Kind::List) {
    ds = delta_.list;
    if (k_.kind == KSpec::Kind::List && ds.size() < k_.list.size()) bad("delta list shorter than k list");
    if (k_.kind != KSpec::Kind::List) bad("a delta list needs a finite k list");
  }
  if (delta_.kind == DeltaSpec::Kind::Eta) {
    if (delta_.eta.is_zero()) throw CheckError("DegenerateEta", "eta is zero");
    // Bounds over the generated range, rounded outward to a 2^-20 grid.
    Rational lo(1), hi(0);
    for (long m = 0; m <= eta_m_max; ++m) {
      PosValue dm = this->delta(BigInt(m));
      lo = std::min(lo, dm.lower_rational());
      hi = std::max(hi, dm.upper_rational());
    }
    BigDyadic l = BigDyadic::from_rational(lo, 20, Rounding::Down), h = BigDyadic::from_rational(hi, 20, Rounding::Up);
    inf_ = delta_inf.value_or(l.to_rational());
    sup_ = delta_sup.value_or(h.to_rational());
  } else {
    for (const auto& d : ds) {
      if (d <= 0 || d >= 1) bad("delta_m must lie in (0,1)");
    }
    inf_ = delta_inf.value_or(*std::min_element(ds.begin(), ds.end()));
    sup_ = delta_sup.value_or(*std::max_element(ds.begin(), ds.end()));
    for (const auto& d : ds) {
      if (d < inf_ || d > sup_) bad("delta_m outside [delta_inf, delta_sup]");
    }
  }
  if (inf_ <= 0 || sup_ >= 1 || inf_ > sup_) bad("need 0 < delta_inf <= delta_sup < 1");
}

std::optional<long> ScaleSystem::size() const {
  if (k_.kind == KSpec::Kind::List) return static_cast<long>(k_.list.size());
  return std::nullopt;
}

TowerNat ScaleSystem::k(const BigInt& m) const {
  switch (k_.kind) {
    case KSpec::Kind::Pow2Shift:
      return TowerNat::make(1, m + k_.param);
    case KSpec::Kind::Tower:
      return tower_k(k_.param, m);
    case KSpec::Kind::List:
      if (m < 0 || m >= static_cast<long>(k_.list.size())) throw CheckError("OutOfRange", "k_m beyond explicit list");
      return TowerNat::of(k_.list[m.get_ui()]);
  }
  throw std::logic_error("unreachable");
}

long ScaleSystem::count_upto(const BigInt& n) const {
  if (k_.kind == KSpec::Kind::List) {
    return static_cast<long>(std::upper_bound(k_.list.begin(), k_.list.end(), n) - k_.list.begin());
  }
  if (k_.kind == KSpec::Kind::Pow2Shift) {
    if (n < 1) return 0;
    long lg = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2)) - 1;
    return std::max(0L, lg - k_.param + 1);
  }
  TowerNat tn = TowerNat::of(n);
  long c = 0;
  while (tower_cmp(k(BigInt(c)), tn) <= 0) ++c;
  return c;
}

PosValue ScaleSystem::delta(const BigInt& m, long prec) const {
  switch (delta_.kind) {
    case DeltaSpec::Kind::Const:
      return PosValue::exact(delta_.c);
    case DeltaSpec::Kind::List:
      if (m < 0 || m >= static_cast<long>(delta_.list.size())) throw CheckError("OutOfRange", "delta_m beyond list");
      return PosValue::exact(delta_.list[m.get_ui()]);
    case DeltaSpec::Kind::Eta:
      return eta_delta(delta_.eta, m, prec);
  }
  throw std::logic_error("unreachable");
}

PosValue ScaleSystem::delta_product(const BigInt& lo, const BigInt& hi, long prec) const {
  if (hi <= lo) return PosValue();
  switch (delta_.kind) {
    case DeltaSpec::Kind::Const:
      return pv_pow_int(PosValue::exact(delta_.c), hi - lo, prec);
    case DeltaSpec::Kind::List: {
      if (hi > static_cast<long>(delta_.list.size())) throw CheckError("OutOfRange", "delta product beyond list");
      Rational p(1);
      for (unsigned long m = lo.get_ui(); m < hi.get_ui(); ++m) p *= delta_.list[m];
      return PosValue::exact(p);
    }
    case DeltaSpec::Kind::Eta: {
      // Telescoping: prod = l'(k_(lo-1)) / l'(k_(hi-1)), with l'(k_(-1)) = 1.
      long j0 = *delta_.eta.j0();
      PosValue den = l_eta_prime(delta_.eta, tower_k(j0, hi - 1), prec);
      if (lo == 0) return pv_inv(den);
      return pv_div(l_eta_prime(delta_.eta, tower_k(j0, lo - 1), prec), den, prec);
    }
  }
  throw std::logic_error("unreachable");
}

// ------------------------------------------------------------ weights

WeightSeq::WeightSeq(long depth, std::vector<Fire> fires) : depth_(depth), fires_(std::move(fires)) {
  if (depth < 1) throw std::invalid_argument("weight depth must be >= 1");
  for (size_t i = 0; i < fires_.size(); ++i) {
    if (fires_[i].n < 1 || fires_[i].n > depth_ || (i > 0 && fires_[i].n <= fires_[i - 1].n)) {
      throw std::invalid_argument("fire points must be increasing within (0, depth]");
    }
  }
}

PosValue WeightSeq::at(long n) const {
  if (n < 0 || n > depth_) throw CheckError("OutOfRange", "weight query beyond depth", n);
  auto it = std::upper_bound(fires_.begin(), fires_.end(), n, [](long x, const Fire& f) { return x < f.n; });
  if (it == fires_.begin()) return PosValue();
  return std::prev(it)->value;
}

WeightSeq weight_seq(const SubsetSpec& u, const ScaleSystem& s, const BlockPartition& p, long depth,
                     WindowPolicy policy, long prec) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  long count = s.count_upto(BigInt(depth));
  std::vector<Fire> fires;
  PosValue cur;
  for (long m = 0; m < count; ++m) {
    auto l = p.block_of(BigInt(m));
    if (!l) throw CheckError("OutOfRange", "block partition too short", m);
    if (!u.member(*l, policy)) continue;
    cur = pv_mul(cur, s.delta(BigInt(m), prec), prec);
    fires.push_back({s.k(BigInt(m)).exact()->get_si(), m, cur});
  }
  return WeightSeq(depth, std::move(fires));
}

WeightSeq weight_seq(const SubsetSpec& u, const ScaleSystem& s, long depth, WindowPolicy policy, long prec) {
  long count = s.count_upto(BigInt(depth));
  return weight_seq(u, s, partition_covering(BigInt(count)), depth, policy, prec);
}

WeightReport check_weight_props(const WeightSeq& w, const ScaleSystem& s, std::optional<Rational> claimed_delta_inf,
                                const NumCfg& cfg) {
  const auto& fires = w.fires();
  // (i): fire points sit at scale indices and u(k_m) is the product of fired deltas.
  long count = s.count_upto(BigInt(w.depth()));
  size_t fi = 0;
  PosValue prod;
  for (long m = 0; m < count; ++m) {
    long km = s.k(BigInt(m)).exact()->get_si();
    if (fi < fires.size() && fires[fi].m == m) {
      if (fires[fi].n != km) return {false, "i", fires[fi].n, "fire point is not k_m"};
      prod = pv_mul(prod, s.delta(BigInt(m), cfg.prec), cfg.prec);
      ++fi;
    }
    if (!overlaps(w.at(km), prod, cfg)) return {false, "i", km, "u(k_m) differs from the product of fired deltas"};
  }
  if (fi != fires.size()) return {false, "i", fires[fi].n, "fire outside the scale points"};
  // (ii): nonincreasing, u(0)=1, values in (0,1], final value = full product.
  PosValue prev;
  for (const auto& f : fires) {
    if (!pv_le(f.value, prev, cfg).is_true()) return {false, "ii", f.n, "u increases"};
    prev = f.value;
  }
  if (!overlaps(w.at(w.depth()), prod, cfg)) return {false, "ii", w.depth(), "u(depth) inconsistent with fires"};
  // (iii): u(2n) >= delta u(n).
  Rational d = claimed_delta_inf.value_or(s.delta_inf());
  for (long n = 1; 2 * n <= w.depth(); ++n) {
    if (!pv_cmp_scaled(w.at(n), 1 / d, w.at(2 * n), cfg).is_true()) {
      return {false, "iii", n, "u(2n) < delta u(n)"};
    }
  }
  return {};
}

namespace {

BigInt scale_count(const SubsetSpec& u, const BlockPartition& p, const BigInt& m, long last, WindowPolicy policy) {
  BigInt count(0);
  for (long l = 0; l <= last; ++l) {
    if (!u.member(l, policy)) continue;
    count += (l < last) ? p.block_size(l) : BigInt(m - p.a(l) + 1);
  }
  return count;
}

}  // namespace

PosValue weight_at_scale(const SubsetSpec& u, const ScaleSystem& s, const BlockPartition& p, const BigInt& m,
                         WindowPolicy policy, long prec) {
  auto last = p.block_of(m);
  if (!last) throw CheckError("OutOfRange", "block partition too short for m=" + m.get_str());
  if (s.delta_spec().kind == DeltaSpec::Kind::Const) {
    return pv_pow_int(PosValue::exact(s.delta_spec().c), scale_count(u, p, m, *last, policy), prec);
  }
  PosValue out;
  for (long l = 0; l <= *last; ++l) {
    if (!u.member(l, policy)) continue;
    BigInt hi = l < *last ? p.a(l + 1) : BigInt(m + 1);
    out = pv_mul(out, s.delta_product(p.a(l), hi, prec), prec);
  }
  return out;
}

PosValue weight_ratio_at_scale(const SubsetSpec& u, const SubsetSpec& v, const ScaleSystem& s,
                               const BlockPartition& p, const BigInt& m, WindowPolicy policy, long prec) {
  auto last = p.block_of(m);
  if (!last) throw CheckError("OutOfRange", "block partition too short for m=" + m.get_str());
  if (s.delta_spec().kind == DeltaSpec::Kind::Const) {
    BigInt diff = scale_count(u, p, m, *last, policy) - scale_count(v, p, m, *last, policy);
    return pv_pow_int(PosValue::exact(s.delta_spec().c), diff, prec);
  }
  return pv_div(weight_at_scale(u, s, p, m, policy, prec), weight_at_scale(v, s, p, m, policy, prec), prec);
}

}  // namespace pofin
