#pragma once

#include <map>
#include <string>
#include <string_view>

#include "inflogic/formula.hpp"

namespace inflogic {

/// A nonnegative rational or infinity. Arithmetic saturates at infinity,
/// except that 0 * infinity = 0.
struct LipschitzBound {
  bool infinite = false;
  Rational value;

  static LipschitzBound finite(Rational v) { return {false, v}; }
  static LipschitzBound unbounded() { return {true, Rational(0)}; }

  friend bool operator==(const LipschitzBound&, const LipschitzBound&) = default;
};

LipschitzBound operator+(const LipschitzBound& a, const LipschitzBound& b);
LipschitzBound max(const LipschitzBound& a, const LipschitzBound& b);
LipschitzBound operator*(const Rational& c, const LipschitzBound& b);
std::string to_string(const LipschitzBound& b);  // "p/q" or "inf"

/// Per-variable bounds: changing x alone by distance delta changes the value
/// by at most bound(x) * delta. Free variables the value cannot depend on
/// syntactically get 0.
struct LipschitzReport {
  std::map<std::string, LipschitzBound> bounds;

  LipschitzBound at(const std::string& var) const;
  bool all_finite() const;
};

enum class FragmentClass { kFO, kLC, kLCRho, kLFull };

std::string_view to_string(FragmentClass c);

/// Free meta-indices are treated as ranging over all naturals.
LipschitzReport lipschitz_bounds(const Signature& sig, const Formula& f);

/// FO: no infinite index family, no free meta-index and no rho. LC: every
/// infinite family has finite bounds and there is no rho. LCRho: the same
/// with rho allowed. LFull otherwise. Free meta-indices count as an
/// enclosing infinite family.
FragmentClass classify_fragment(const Signature& sig, const Formula& f);

}  // namespace inflogic
