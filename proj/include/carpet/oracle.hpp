#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "carpet/topology.hpp"

namespace carpet {

/// Cell of the infinite blowup, in coordinates relative to the level-0 seed cell.
struct ExtAddr {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const ExtAddr&, const ExtAddr&) = default;
};

struct ExtAddrHash {
  std::size_t operator()(const ExtAddr& a) const noexcept {
    auto h = static_cast<std::uint64_t>(a.x) * 0x9E3779B97F4A7C15ULL;
    return static_cast<std::size_t>(h ^ (static_cast<std::uint64_t>(a.y) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2)));
  }
};

/// Position of the level-k carpet inside the level-(k+1) carpet, block units.
struct BlockPos {
  int bx = 0;
  int by = 0;
};

/// Arithmetic neighbor function for the infinite blowup. The level-M window is
/// the unglued level-M carpet containing the seed cell; windows are nested by
/// the embedding positions, so coordinates never change as the window grows.
/// All members are const after construction; concurrent use is safe.
class BlowupOracle {
 public:
  /// by_size[k] is the identification of vacant squares of side 3^k; the last
  /// entry repeats for all larger squares. Empty embedding means alternating
  /// opposite corners: (0,0) for even k, (2,2) for odd k.
  explicit BlowupOracle(std::vector<IdentType> by_size, std::vector<BlockPos> embedding = {},
                        int max_level = kMaxLevel);

  static BlowupOracle uniform(IdentType t, int max_level = kMaxLevel);
  /// Oracle whose level-m window reproduces build_unglued(m, seq).
  static BlowupOracle from_finite(const IdentSequence& seq, int m, int max_level = kMaxLevel);

  IdentType hole_type(int k) const {
    return by_size_[static_cast<std::size_t>(k) < by_size_.size() ? static_cast<std::size_t>(k) : by_size_.size() - 1];
  }
  int max_level() const { return max_level_; }
  BlockPos embedding(int k) const { return embedding_[static_cast<std::size_t>(k)]; }

  /// Window coordinates of the seed cell at level M.
  std::int64_t offset_x(int level) const { return off_x_[static_cast<std::size_t>(level)]; }
  std::int64_t offset_y(int level) const { return off_y_[static_cast<std::size_t>(level)]; }

  /// Smallest window level containing a (may exceed max_level; then nullopt).
  std::optional<int> containing_level(ExtAddr a) const;
  bool exists(ExtAddr a) const;

  CellAddr to_window(ExtAddr a, int level) const {
    return {level, a.x + off_x_[static_cast<std::size_t>(level)], a.y + off_y_[static_cast<std::size_t>(level)]};
  }
  ExtAddr from_window(const CellAddr& c) const {
    return {c.i - off_x_[static_cast<std::size_t>(c.m)], c.j - off_y_[static_cast<std::size_t>(c.m)]};
  }

  struct Step {
    ExtAddr addr;
    bool stitched = false;
    bool reversed = false;
  };
  /// Neighbor in direction d; nullopt only when it lies beyond window max_level.
  std::optional<Step> step(ExtAddr a, Direction d) const;
  std::optional<ExtAddr> neighbor(ExtAddr a, Direction d) const {
    auto s = step(a, d);
    return s ? std::optional<ExtAddr>(s->addr) : std::nullopt;
  }
  std::array<std::optional<ExtAddr>, 4> neighbors(ExtAddr a) const;

 private:
  std::vector<IdentType> by_size_;
  std::vector<BlockPos> embedding_;
  std::vector<std::int64_t> off_x_, off_y_;
  int max_level_;
};

}  // namespace carpet
