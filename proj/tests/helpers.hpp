#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <vector>

#include "carpet/topology.hpp"

namespace carpet::testing {

inline constexpr std::array<IdentType, 4> kAllTypes = {IdentType::Torus, IdentType::Projective, IdentType::KleinH,
                                                       IdentType::KleinV};

/// Every sequence of length n over the four types.
inline std::vector<IdentSequence> all_sequences(int n) {
  std::vector<IdentSequence> out;
  std::size_t total = 1;
  for (int k = 0; k < n; ++k) total *= 4;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<IdentType> e;
    std::size_t c = code;
    for (int k = 0; k < n; ++k, c /= 4) e.push_back(kAllTypes[c % 4]);
    out.emplace_back(e);
  }
  return out;
}

/// Undirected edge multiset: count of slots from a to b, keyed (a, b).
inline std::map<std::pair<std::int32_t, std::int32_t>, int> slot_counts(const CarpetGraph& g) {
  std::map<std::pair<std::int32_t, std::int32_t>, int> out;
  for (std::size_t c = 0; c < g.cell_count(); ++c)
    for (auto nb : g.slots(c))
      if (nb != kMissing) ++out[{static_cast<std::int32_t>(c), nb}];
  return out;
}

using CellMap = std::function<std::pair<std::int64_t, std::int64_t>(std::int64_t, std::int64_t, std::int64_t)>;

/// The eight symmetries of the square acting on (i, j) in a side-s grid.
inline std::vector<CellMap> dihedral_maps() {
  return {
      [](auto i, auto j, auto) { return std::pair{i, j}; },
      [](auto i, auto j, auto s) { return std::pair{s - 1 - i, j}; },
      [](auto i, auto j, auto s) { return std::pair{i, s - 1 - j}; },
      [](auto i, auto j, auto s) { return std::pair{s - 1 - i, s - 1 - j}; },
      [](auto i, auto j, auto) { return std::pair{j, i}; },
      [](auto i, auto j, auto s) { return std::pair{s - 1 - j, i}; },
      [](auto i, auto j, auto s) { return std::pair{j, s - 1 - i}; },
      [](auto i, auto j, auto s) { return std::pair{s - 1 - j, s - 1 - i}; },
  };
}

/// Cell permutation induced by a lattice map.
inline std::vector<std::size_t> induced_permutation(const CarpetGraph& g, const CellMap& f) {
  std::vector<std::size_t> p(g.cell_count());
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    auto [i, j] = f(g.cell(c).i, g.cell(c).j, g.side());
    p[c] = g.index_of(i, j).value();
  }
  return p;
}

inline bool is_automorphism(const CarpetGraph& g, const std::vector<std::size_t>& p) {
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    std::vector<std::int64_t> a, b;
    for (auto nb : g.slots(c)) a.push_back(nb == kMissing ? -1 : static_cast<std::int64_t>(p[static_cast<std::size_t>(nb)]));
    for (auto nb : g.slots(p[c])) b.push_back(nb);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
  }
  return true;
}

}  // namespace carpet::testing
