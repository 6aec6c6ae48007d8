#pragma once

#include "inflogic/structure.hpp"

namespace inflogic::bench {

// n points on a cycle with distance min(|i-j|, n-|i-j|) / n and a unary
// predicate taking `levels` distinct values around the cycle. levels = 1
// keeps the full dihedral symmetry.
inline FiniteStructure cycle(std::size_t n, std::size_t levels) {
  Signature sig;
  sig.predicates = {{"P", 1, Rational(static_cast<std::int64_t>(n))}};
  std::vector<std::string> points;
  for (std::size_t i = 0; i < n; ++i) points.push_back("p" + std::to_string(i));
  FiniteStructure m(sig, points);
  const auto nn = static_cast<std::int64_t>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto gap = static_cast<std::int64_t>(j - i);
      m.set_distance(i, j, Rational(std::min(gap, nn - gap), nn));
    }
    auto level = static_cast<std::int64_t>(i % levels);
    m.set_predicate("P", Tuple{i}, Rational(level, static_cast<std::int64_t>(levels)));
  }
  return m;
}

}  // namespace inflogic::bench
