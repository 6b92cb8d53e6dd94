#pragma once

// Finite descriptions of subsets of the naturals.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pofin/numeric.hpp"

namespace pofin {

// Bit i is prefix[i] for i < |prefix|, else period[(i - |prefix|) mod |period|].
// Bits are '0'/'1' characters.
struct Periodic {
  std::string prefix;
  std::string period;
};

// Membership known only below the horizon.  Members are stored sparsely
// because branch node codes reach 2^(depth+1).
struct Window {
  std::vector<BigInt> members;  // sorted, all < horizon
  BigInt horizon;
};

enum class WindowPolicy {
  Strict,          // queries past the horizon raise OutOfWindow
  OutsideIsEmpty,  // everything past the horizon is declared out
};

class SubsetSpec {
 public:
  static SubsetSpec periodic(std::string prefix, std::string period);
  static SubsetSpec window_bits(const std::string& bits);
  static SubsetSpec window_sparse(std::vector<BigInt> members, BigInt horizon);
  // "periodic:<prefix>/<period>", "window:<bits>", "window-sparse:<horizon>:<m1>,<m2>,..."
  static SubsetSpec parse(std::string_view text);

  bool is_periodic() const { return std::holds_alternative<Periodic>(rep_); }
  const Periodic& as_periodic() const { return std::get<Periodic>(rep_); }
  const Window& as_window() const { return std::get<Window>(rep_); }

  bool member(const BigInt& i, WindowPolicy policy = WindowPolicy::Strict) const;
  bool member(long i, WindowPolicy policy = WindowPolicy::Strict) const { return member(BigInt(i), policy); }

  std::string str() const;

 private:
  std::variant<Periodic, Window> rep_;
};

struct AlmostSubsetResult {
  bool yes = false;
  std::optional<long> witness;  // a periodic position in U but not in V
};

AlmostSubsetResult almost_subset(const SubsetSpec& u, const SubsetSpec& v);
// |U \ V| infinite.
bool diff_infinite(const SubsetSpec& u, const SubsetSpec& v);
// Periodic U ∩ V.
SubsetSpec periodic_intersection(const SubsetSpec& u, const SubsetSpec& v);
// Bounded answer for windows: U \ V ∩ [from, horizon) empty.
bool almost_subset_upto(const SubsetSpec& u, const SubsetSpec& v, const BigInt& from);

// code(xi) = 2^|xi| - 1 + value(xi).
BigInt node_code(std::string_view bits);
std::vector<SubsetSpec> branch_family(const std::vector<std::string>& branch_codes, long depth);

}  // namespace pofin
