#include "carpet/metric.hpp"

#include <algorithm>
#include <iterator>
#include <memory>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>

namespace carpet {

std::vector<int> bfs_distances(const CarpetGraph& g, std::size_t source, int limit) {
  std::vector<int> dist(g.cell_count(), kUnreached);
  if (source >= g.cell_count()) throw ConfigError("BFS source out of range");
  std::vector<std::size_t> frontier{source}, next;
  dist[source] = 0;
  for (int d = 0; !frontier.empty() && (limit < 0 || d < limit); ++d) {
    next.clear();
    for (auto c : frontier) {
      for (auto s : g.slots(c)) {
        if (s == kMissing || dist[static_cast<std::size_t>(s)] != kUnreached) continue;
        dist[static_cast<std::size_t>(s)] = d + 1;
        next.push_back(static_cast<std::size_t>(s));
      }
    }
    frontier.swap(next);
  }
  return dist;
}

std::vector<int> distance_to_boundary(const CarpetGraph& g) {
  std::vector<int> dist(g.cell_count(), kUnreached);
  std::queue<std::size_t> q;
  for (std::size_t k = 0; k < g.cell_count(); ++k) {
    if (g.is_boundary(k)) {
      dist[k] = 0;
      q.push(k);
    }
  }
  while (!q.empty()) {
    auto c = q.front();
    q.pop();
    for (auto s : g.slots(c)) {
      if (s == kMissing || dist[static_cast<std::size_t>(s)] != kUnreached) continue;
      dist[static_cast<std::size_t>(s)] = dist[c] + 1;
      q.push(static_cast<std::size_t>(s));
    }
  }
  return dist;
}

int eccentricity(const CarpetGraph& g, std::size_t cell) {
  auto dist = bfs_distances(g, cell);
  if (std::find(dist.begin(), dist.end(), kUnreached) != dist.end()) {
    throw NumericError("eccentricity: graph is disconnected");
  }
  return *std::max_element(dist.begin(), dist.end());
}

std::int64_t crossing_length(int m) {
  if (m < 0 || m > 60) throw ConfigError("crossing_length: level out of range");
  return (std::int64_t{1} << (m + 2)) - 6;
}

std::int64_t projective_reach(int m) {
  if (m < 0 || m > 60) throw ConfigError("projective_reach: level out of range");
  std::int64_t R = 0;
  for (int k = 0; k < m; ++k) R = std::max(2 * R + 3, 2 * R + (std::int64_t{1} << k) + 1);
  return R;
}

GrowthSequences growth_sequences(int m_max) {
  if (m_max < 2) throw ConfigError("growth_sequences needs m_max >= 2");
  GrowthSequences out;
  for (int m = 2; m <= m_max; ++m) out.r.push_back(crossing_length(m));
  for (int m = 0; m <= m_max; ++m) out.R.push_back(projective_reach(m));
  return out;
}

int recommended_window_level(int r, bool projective) {
  for (int M = 1; M <= kMaxLevel; ++M) {
    const auto reach = projective ? projective_reach(M) : crossing_length(M);
    if (reach >= 2 * static_cast<std::int64_t>(r)) return M;
  }
  throw ConfigError("radius too large for any supported window");
}

namespace {

/// Visited set over window coordinates, allocated in 128x128 pages on demand.
class PagedBitset {
 public:
  bool test_and_set(std::int64_t i, std::int64_t j) {
    const auto key = (static_cast<std::uint64_t>(i >> 7) << 32) | static_cast<std::uint64_t>(j >> 7);
    auto& page = pages_[key];
    if (!page) page = std::make_unique<Page>();
    const auto bit = static_cast<std::size_t>(((j & 127) << 7) | (i & 127));
    auto& word = (*page)[bit >> 6];
    const std::uint64_t mask = std::uint64_t{1} << (bit & 63);
    const bool was = (word & mask) != 0;
    word |= mask;
    return was;
  }

 private:
  using Page = std::array<std::uint64_t, 128 * 128 / 64>;
  std::unordered_map<std::uint64_t, std::unique_ptr<Page>> pages_;
};

bool in_window(const BlowupOracle& o, ExtAddr a, int level) {
  const auto w = o.to_window(a, level);
  const auto side = pow3(level);
  return w.i >= 0 && w.j >= 0 && w.i < side && w.j < side;
}

}  // namespace

namespace {

/// Layered BFS over the window; visit(addr) is called once per cell at
/// distance < r_max. Returns the number of cells per layer.
template <class Visit>
std::vector<std::int64_t> window_bfs(const BlowupOracle& oracle, ExtAddr source, int r_max, int window_level,
                                     Visit&& visit) {
  if (r_max < 1) throw ConfigError("ball radius must be >= 1");
  if (window_level > oracle.max_level()) throw ConfigError("window beyond oracle range");
  if (!in_window(oracle, source, window_level) || !oracle.exists(source)) {
    throw ConfigError("ball source is not a cell of the window");
  }
  PagedBitset seen;
  auto mark = [&](ExtAddr a) {
    auto w = oracle.to_window(a, window_level);
    return seen.test_and_set(w.i, w.j);
  };
  mark(source);
  visit(source);
  std::vector<std::int64_t> layers{1};
  std::vector<ExtAddr> frontier{source}, next;
  for (int d = 0; d + 1 < r_max; ++d) {
    next.clear();
    for (const auto& c : frontier) {
      for (auto dir : kDirections) {
        auto nb = oracle.neighbor(c, dir);
        if (!nb || !in_window(oracle, *nb, window_level)) {
          throw WindowTooSmall("ball of radius " + std::to_string(r_max) + " leaves window level " +
                               std::to_string(window_level));
        }
        if (!mark(*nb)) {
          next.push_back(*nb);
          visit(*nb);
        }
      }
    }
    layers.push_back(static_cast<std::int64_t>(next.size()));
    frontier.swap(next);
  }
  return layers;
}

}  // namespace

BallSeries ball_series(const BlowupOracle& oracle, ExtAddr source, int r_max, int window_level) {
  BallSeries out;
  out.source = source;
  out.window_level = window_level;
  auto layers = window_bfs(oracle, source, r_max, window_level, [](ExtAddr) {});
  std::partial_sum(layers.begin(), layers.end(), std::back_inserter(out.counts));
  return out;
}

BallSeries ball_series_fitted(const BlowupOracle& oracle, ExtAddr source, int r_max, bool projective) {
  for (int level = recommended_window_level(r_max, projective);; ++level) {
    try {
      return ball_series(oracle, source, r_max, level);
    } catch (const WindowTooSmall&) {
      if (level >= kMaxLevel) throw;
    }
  }
}

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

CornerShareReport corner_share_check(const BlowupOracle& oracle, ExtAddr source, int m, int window_level) {
  if (m < 0 || window_level <= m || window_level > 7) throw ConfigError("corner_share_check: bad levels");
  const std::int64_t side = pow3(window_level);
  const std::int64_t vside = side + 1;
  auto vid = [&](std::int64_t i, std::int64_t j) { return static_cast<std::uint32_t>(j * vside + i); };
  UnionFind uf(static_cast<std::size_t>(vside * vside));

  for (std::int64_t j = 0; j < side; ++j) {
    for (std::int64_t i = 0; i < side; ++i) {
      if (!detail::classify(i, j, window_level).exists) continue;
      const ExtAddr a = oracle.from_window({window_level, i, j});
      for (auto dir : {Direction::Right, Direction::Up}) {
        auto st = oracle.step(a, dir);
        if (!st || !in_window(oracle, st->addr, window_level)) continue;
        const auto b = oracle.to_window(st->addr, window_level);
        if (dir == Direction::Up) {
          const auto tl = vid(i, j + 1), tr = vid(i + 1, j + 1);
          const auto bl = vid(b.i, b.j), br = vid(b.i + 1, b.j);
          uf.unite(tl, st->reversed ? br : bl);
          uf.unite(tr, st->reversed ? bl : br);
        } else {
          const auto br = vid(i + 1, j), tr = vid(i + 1, j + 1);
          const auto bl = vid(b.i, b.j), tl = vid(b.i, b.j + 1);
          uf.unite(br, st->reversed ? tl : bl);
          uf.unite(tr, st->reversed ? bl : tl);
        }
      }
    }
  }

  const std::int64_t S = pow3(m);
  const int block_level = window_level - m;
  const std::int64_t blocks = pow3(block_level);
  auto corners = [&](std::int64_t bx, std::int64_t by) {
    return std::array<std::uint32_t, 4>{uf.find(vid(bx * S, by * S)), uf.find(vid((bx + 1) * S, by * S)),
                                        uf.find(vid(bx * S, (by + 1) * S)),
                                        uf.find(vid((bx + 1) * S, (by + 1) * S))};
  };
  const auto w0 = oracle.to_window(source, window_level);
  const auto src_corners = corners(w0.i / S, w0.j / S);

  std::set<std::pair<std::int64_t, std::int64_t>> sharing;
  for (std::int64_t by = 0; by < blocks; ++by) {
    for (std::int64_t bx = 0; bx < blocks; ++bx) {
      if (!detail::classify(bx, by, block_level).exists) continue;
      for (auto c : corners(bx, by)) {
        if (std::find(src_corners.begin(), src_corners.end(), c) != src_corners.end()) {
          sharing.insert({bx, by});
          break;
        }
      }
    }
  }

  std::set<std::pair<std::int64_t, std::int64_t>> visited;
  window_bfs(oracle, source, 1 << m, window_level, [&](ExtAddr c) {
    const auto w = oracle.to_window(c, window_level);
    visited.insert({w.i / S, w.j / S});
  });

  CornerShareReport rep;
  rep.sharing_copies = sharing.size();
  rep.visited_copies = visited.size();
  rep.ball_inside_sharing =
      std::all_of(visited.begin(), visited.end(), [&](const auto& b) { return sharing.count(b) != 0; });
  return rep;
}

}  // namespace carpet
