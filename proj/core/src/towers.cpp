#include "pofin/towers.hpp"

namespace pofin {

namespace {

constexpr unsigned long kCollapseBits = 4096;

bool is_power_of_two(const BigInt& x) {
  return x > 0 && mpz_scan1(x.get_mpz_t(), 0) + 1 == mpz_sizeinbase(x.get_mpz_t(), 2);
}

// Either an exact tower natural or a real value >= 1.
struct Level {
  std::optional<TowerNat> nat;
  std::optional<PosValue> real;
};

PosValue level_value(const Level& l) { return l.nat ? l.nat->value() : *l.real; }

Level level_log2(const Level& l, long prec) {
  if (l.nat) {
    if (auto e = l.nat->log2_exact()) return {*e, std::nullopt};
  }
  Interval iv = level_value(l).log2(prec);
  if (iv.lo.sign() <= 0) throw std::domain_error("iterated log left the domain");
  return {std::nullopt, pv_from_interval(iv, prec)};
}

}  // namespace

TowerNat TowerNat::make(long height, BigInt top) {
  if (height < 0 || top < 0) throw std::invalid_argument("bad tower");
  while (height > 0 && top.fits_ulong_p() && top.get_ui() <= kCollapseBits) {
    BigInt v;
    mpz_ui_pow_ui(v.get_mpz_t(), 2, top.get_ui());
    top = v;
    --height;
  }
  return TowerNat{height, std::move(top)};
}

std::optional<TowerNat> TowerNat::log2_exact() const {
  if (height >= 1) return make(height - 1, top);
  if (is_power_of_two(top)) return of(BigInt(static_cast<unsigned long>(mpz_sizeinbase(top.get_mpz_t(), 2) - 1)));
  return std::nullopt;
}

std::optional<BigInt> TowerNat::exact() const {
  if (height == 0) return top;
  return std::nullopt;
}

PosValue TowerNat::value() const {
  switch (height) {
    case 0:
      return PosValue::exact(Rational(top));
    case 1:
      return PosValue::pow2(top);
    case 2:
      return PosValue::log2_point(BigDyadic::pow2(top));
    case 3:
      if (top.fits_ulong_p() && top.get_ui() <= 64) {
        BigInt e;
        mpz_ui_pow_ui(e.get_mpz_t(), 2, top.get_ui());
        return PosValue::log2_point(BigDyadic::pow2(e));
      }
      [[fallthrough]];
    default:
      throw std::overflow_error("tower too tall for a log-domain value");
  }
}

std::string TowerNat::str() const {
  if (height == 0) return top.get_str();
  return "exp2^" + std::to_string(height) + "(" + top.get_str() + ")";
}

int tower_cmp(const TowerNat& a, const TowerNat& b) {
  long ha = a.height, hb = b.height;
  long common = std::min(ha, hb);
  ha -= common;
  hb -= common;
  if (ha == 0 && hb == 0) return cmp(a.top, b.top) < 0 ? -1 : (a.top == b.top ? 0 : 1);
  // One side still has height; it is canonical only if its top is large,
  // or we unwind it against the other's plain value.
  bool a_tall = ha > 0;
  TowerNat tall = TowerNat{a_tall ? ha : hb, a_tall ? a.top : b.top};
  const BigInt& plain = a_tall ? b.top : a.top;
  BigInt v = tall.top;
  for (long h = tall.height; h > 0; --h) {
    if (!v.fits_ulong_p() || v.get_ui() > mpz_sizeinbase(plain.get_mpz_t(), 2) + 1) {
      return a_tall ? 1 : -1;
    }
    BigInt nv;
    mpz_ui_pow_ui(nv.get_mpz_t(), 2, v.get_ui());
    v = nv;
  }
  int c = cmp(v, plain);
  c = c < 0 ? -1 : (c > 0 ? 1 : 0);
  return a_tall ? c : -c;
}

TowerNat tower_p(long n) {
  if (n < 0) throw std::invalid_argument("p_n needs n >= 0");
  return TowerNat::make(n + 1, BigInt(1));
}

TowerNat tower_k(long i, const BigInt& m) {
  if (i < 0 || m < 0) throw std::invalid_argument("k_i(m) needs i, m >= 0");
  return TowerNat::make(i + 1, m + 1);
}

PosValue tower_t(long n, const TowerNat& N, long prec) {
  auto ex = N.exact();
  if (!ex) throw std::overflow_error("t_n needs an explicit exponent N");
  Level cur{TowerNat::of(*ex + 1), std::nullopt};
  for (long i = 1; i <= n; ++i) {
    Level lg = level_log2(cur, prec);
    if (lg.nat) {
      cur = {TowerNat::of(*lg.nat->exact() + 1), std::nullopt};
    } else {
      Rational lo = lg.real->lower_rational(prec) + 1, hi = lg.real->upper_rational(prec) + 1;
      Interval r{BigDyadic::from_rational(lo, prec, Rounding::Down), BigDyadic::from_rational(hi, prec, Rounding::Up)};
      cur = {std::nullopt, pv_from_interval(r, prec)};
    }
  }
  return level_value(cur);
}

PosValue tower_s(long n, const TowerNat& N, long prec) {
  if (n < 0) throw std::invalid_argument("s_n needs n >= 0");
  // Flat extension: s_n(x) = 1 for x >= 1/p_n, i.e. N <= log2 p_n.
  auto flat = [&](long i) {
    TowerNat lp = i == 0 ? TowerNat::of(BigInt(1)) : tower_p(i - 1);
    return tower_cmp(N, lp) <= 0;
  };
  if (flat(0)) return PosValue();
  Level cur{N, std::nullopt};
  for (long i = 1; i <= n; ++i) {
    if (flat(i)) return PosValue();
    cur = level_log2(cur, prec);
  }
  return level_value(cur);
}

TowerKind parse_tower_kind(std::string_view s) {
  if (s == "t") return TowerKind::T;
  if (s == "s") return TowerKind::S;
  if (s == "p") return TowerKind::P;
  if (s == "k") return TowerKind::K;
  throw CheckError("ParseError", "tower kind must be t, s, p or k");
}

PosValue tower_eval(TowerKind kind, long index, const TowerNat& arg, long prec) {
  switch (kind) {
    case TowerKind::T:
      return tower_t(index, arg, prec);
    case TowerKind::S:
      return tower_s(index, arg, prec);
    case TowerKind::P:
      return tower_p(index).value();
    case TowerKind::K: {
      auto m = arg.exact();
      if (!m) throw std::overflow_error("k_i(m) needs an explicit m");
      return tower_k(index, *m).value();
    }
  }
  throw std::logic_error("unreachable");
}

EtaSpec EtaSpec::parse(std::string_view text) {
  EtaSpec e;
  std::string s(text);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    Rational q = parse_rational(s.substr(pos, comma - pos));
    if (q < 0 || q >= 1) throw CheckError("ParseError", "eta entries must lie in [0,1)");
    e.eta.push_back(q);
    pos = comma + 1;
  }
  if (e.eta.empty()) throw CheckError("ParseError", "empty eta");
  return e;
}

std::optional<long> EtaSpec::j0() const {
  for (size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] != 0) return static_cast<long>(i);
  }
  return std::nullopt;
}

std::string EtaSpec::str() const {
  std::string out;
  for (size_t i = 0; i < eta.size(); ++i) out += (i ? "," : "") + rational_str(eta[i]);
  return out;
}

std::optional<long> lex_less_index(const EtaSpec& a, const EtaSpec& b) {
  long n = static_cast<long>(std::max(a.eta.size(), b.eta.size()));
  for (long j = 0; j < n; ++j) {
    if (a.at(j) < b.at(j)) return j;
    if (a.at(j) > b.at(j)) return std::nullopt;
  }
  return std::nullopt;
}

namespace {
PosValue eta_product(const EtaSpec& eta, const TowerNat& N, long prec, bool prime) {
  PosValue out;
  for (long i = 0; i < static_cast<long>(eta.eta.size()); ++i) {
    if (eta.eta[i] == 0) continue;
    PosValue base = prime ? tower_s(i, N, prec) : tower_t(i, N, prec);
    out = pv_mul(out, pv_pow_rat(base, eta.eta[i], prec), prec);
  }
  return out;
}
}  // namespace

PosValue l_eta(const EtaSpec& eta, const TowerNat& N, long prec) { return eta_product(eta, N, prec, false); }
PosValue l_eta_prime(const EtaSpec& eta, const TowerNat& N, long prec) { return eta_product(eta, N, prec, true); }

PosValue eta_delta(const EtaSpec& eta, const BigInt& m, long prec) {
  auto j0 = eta.j0();
  if (!j0) throw CheckError("DegenerateEta", "eta is zero");
  PosValue cur = l_eta_prime(eta, tower_k(*j0, m), prec);
  if (m == 0) return pv_inv(cur);
  PosValue prev = l_eta_prime(eta, tower_k(*j0, m - 1), prec);
  return pv_div(prev, cur, prec);
}

}  // namespace pofin
