#include "pofin/subsets.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace pofin {

namespace {

bool valid_bits(std::string_view s) { return s.find_first_not_of("01") == std::string_view::npos; }

bool periodic_bit(const Periodic& p, long i) {
  long np = static_cast<long>(p.prefix.size());
  if (i < np) return p.prefix[i] == '1';
  return p.period[(i - np) % static_cast<long>(p.period.size())] == '1';
}

struct Aligned {
  long start;
  long len;
};

Aligned align(const Periodic& a, const Periodic& b) {
  long start = static_cast<long>(std::max(a.prefix.size(), b.prefix.size()));
  long len = std::lcm(static_cast<long>(a.period.size()), static_cast<long>(b.period.size()));
  return {start, len};
}

const Periodic& need_periodic(const SubsetSpec& s, const char* op) {
  if (!s.is_periodic()) throw CheckError("NotPeriodic", std::string(op) + " needs periodic sets");
  return s.as_periodic();
}

}  // namespace

SubsetSpec SubsetSpec::periodic(std::string prefix, std::string period) {
  if (period.empty()) throw CheckError("ParseError", "empty period");
  if (!valid_bits(prefix) || !valid_bits(period)) throw CheckError("ParseError", "bits must be 0/1");
  SubsetSpec s;
  s.rep_ = Periodic{std::move(prefix), std::move(period)};
  return s;
}

SubsetSpec SubsetSpec::window_bits(const std::string& bits) {
  if (!valid_bits(bits)) throw CheckError("ParseError", "bits must be 0/1");
  std::vector<BigInt> members;
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') members.emplace_back(static_cast<unsigned long>(i));
  }
  return window_sparse(std::move(members), BigInt(static_cast<unsigned long>(bits.size())));
}

SubsetSpec SubsetSpec::window_sparse(std::vector<BigInt> members, BigInt horizon) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (!members.empty() && (members.front() < 0 || members.back() >= horizon)) {
    throw CheckError("OutOfWindow", "window member beyond horizon");
  }
  SubsetSpec s;
  s.rep_ = Window{std::move(members), std::move(horizon)};
  return s;
}

SubsetSpec SubsetSpec::parse(std::string_view text) {
  auto fail = [&](const std::string& why, size_t pos) -> SubsetSpec {
    throw CheckError("ParseError", why + " in set spec '" + std::string(text) + "' at position " + std::to_string(pos));
  };
  if (text.rfind("periodic:", 0) == 0) {
    std::string_view body = text.substr(9);
    auto slash = body.find('/');
    if (slash == std::string_view::npos) return fail("missing '/'", text.size());
    std::string prefix(body.substr(0, slash)), period(body.substr(slash + 1));
    if (period.empty()) return fail("empty period", text.size());
    if (auto bad = prefix.find_first_not_of("01"); bad != std::string::npos) return fail("bad bit", 9 + bad);
    if (auto bad = period.find_first_not_of("01"); bad != std::string::npos) return fail("bad bit", 10 + slash + bad);
    return periodic(prefix, period);
  }
  if (text.rfind("window:", 0) == 0) {
    std::string bits(text.substr(7));
    if (auto bad = bits.find_first_not_of("01"); bad != std::string::npos) return fail("bad bit", 7 + bad);
    return window_bits(bits);
  }
  if (text.rfind("window-sparse:", 0) == 0) {
    std::string body(text.substr(14));
    auto colon = body.find(':');
    if (colon == std::string::npos) return fail("missing ':'", text.size());
    BigInt horizon;
    if (horizon.set_str(body.substr(0, colon), 10) != 0) return fail("bad horizon", 14);
    std::vector<BigInt> members;
    std::string rest = body.substr(colon + 1);
    size_t pos = 0;
    while (pos < rest.size()) {
      size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      BigInt m;
      if (m.set_str(rest.substr(pos, comma - pos), 10) != 0) return fail("bad member", 15 + colon + pos);
      members.push_back(m);
      pos = comma + 1;
    }
    return window_sparse(std::move(members), horizon);
  }
  return fail("unknown set kind", 0);
}

bool SubsetSpec::member(const BigInt& i, WindowPolicy policy) const {
  if (i < 0) throw std::invalid_argument("negative index");
  if (is_periodic()) {
    const Periodic& p = as_periodic();
    long np = static_cast<long>(p.prefix.size());
    if (i < np) return p.prefix[i.get_si()] == '1';
    BigInt r = (i - np) % static_cast<unsigned long>(p.period.size());
    return p.period[r.get_ui()] == '1';
  }
  const Window& w = as_window();
  if (i >= w.horizon) {
    if (policy == WindowPolicy::OutsideIsEmpty) return false;
    throw CheckError("OutOfWindow", "index " + i.get_str() + " beyond horizon " + w.horizon.get_str());
  }
  return std::binary_search(w.members.begin(), w.members.end(), i);
}

std::string SubsetSpec::str() const {
  if (is_periodic()) return "periodic:" + as_periodic().prefix + "/" + as_periodic().period;
  const Window& w = as_window();
  if (w.horizon <= 4096) {
    std::string bits(w.horizon.get_ui(), '0');
    for (const auto& m : w.members) bits[m.get_ui()] = '1';
    return "window:" + bits;
  }
  std::string out = "window-sparse:" + w.horizon.get_str() + ":";
  for (size_t i = 0; i < w.members.size(); ++i) out += (i ? "," : "") + w.members[i].get_str();
  return out;
}

AlmostSubsetResult almost_subset(const SubsetSpec& u, const SubsetSpec& v) {
  const Periodic& a = need_periodic(u, "almost_subset");
  const Periodic& b = need_periodic(v, "almost_subset");
  Aligned al = align(a, b);
  for (long i = al.start; i < al.start + al.len; ++i) {
    if (periodic_bit(a, i) && !periodic_bit(b, i)) return {false, i};
  }
  return {true, std::nullopt};
}

bool diff_infinite(const SubsetSpec& u, const SubsetSpec& v) { return !almost_subset(u, v).yes; }

SubsetSpec periodic_intersection(const SubsetSpec& u, const SubsetSpec& v) {
  const Periodic& a = need_periodic(u, "intersection");
  const Periodic& b = need_periodic(v, "intersection");
  Aligned al = align(a, b);
  std::string prefix, period;
  for (long i = 0; i < al.start; ++i) prefix += (periodic_bit(a, i) && periodic_bit(b, i)) ? '1' : '0';
  for (long i = al.start; i < al.start + al.len; ++i) period += (periodic_bit(a, i) && periodic_bit(b, i)) ? '1' : '0';
  return SubsetSpec::periodic(prefix, period);
}

bool almost_subset_upto(const SubsetSpec& u, const SubsetSpec& v, const BigInt& from) {
  if (u.is_periodic() && v.is_periodic()) return almost_subset(u, v).yes;
  if (u.is_periodic()) throw CheckError("NotWindow", "almost_subset_upto needs a window on the left");
  for (const auto& m : u.as_window().members) {
    if (m >= from && !v.member(m, WindowPolicy::OutsideIsEmpty)) return false;
  }
  return true;
}

BigInt node_code(std::string_view bits) {
  if (!valid_bits(bits)) throw CheckError("ParseError", "branch code must be 0/1");
  BigInt value(0);
  for (char c : bits) value = 2 * value + (c == '1' ? 1 : 0);
  BigInt p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, bits.size());
  return p - 1 + value;
}

std::vector<SubsetSpec> branch_family(const std::vector<std::string>& branch_codes, long depth) {
  std::set<std::string> seen;
  for (const auto& c : branch_codes) {
    if (c.empty()) throw CheckError("ParseError", "branch codes need length >= 1");
    if (!valid_bits(c)) throw CheckError("ParseError", "branch code must be 0/1");
    if (static_cast<long>(c.size()) > depth) throw CheckError("ParseError", "branch code longer than depth");
    if (!seen.insert(c).second) throw CheckError("DuplicateBranch", c);
  }
  BigInt horizon;
  mpz_ui_pow_ui(horizon.get_mpz_t(), 2, static_cast<unsigned long>(depth + 1));
  horizon -= 1;
  std::vector<SubsetSpec> out;
  for (const auto& c : branch_codes) {
    std::string xi = c + std::string(static_cast<size_t>(depth) - c.size(), '0');
    std::vector<BigInt> members;
    for (long len = 0; len <= depth; ++len) members.push_back(node_code(std::string_view(xi).substr(0, len)));
    out.push_back(SubsetSpec::window_sparse(std::move(members), horizon));
  }
  return out;
}

}  // namespace pofin
