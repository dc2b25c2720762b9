#include "carpet/topology.hpp"

#include <algorithm>
#include <ostream>

namespace carpet {

std::string base3(std::int64_t v, int m) {
  std::string s(static_cast<std::size_t>(m), '0');
  for (int k = m - 1; k >= 0; --k) {
    s[static_cast<std::size_t>(k)] = static_cast<char>('0' + v % 3);
    v /= 3;
  }
  return s;
}

std::string format_addr(const CellAddr& a) { return "(" + base3(a.i, a.m) + "," + base3(a.j, a.m) + ")"; }

CellAddr parse_addr(std::string_view text) {
  auto fail = [&] { throw ConfigError("malformed cell address '" + std::string(text) + "'"); };
  if (text.size() < 5 || text.front() != '(' || text.back() != ')') fail();
  auto inner = text.substr(1, text.size() - 2);
  auto comma = inner.find(',');
  if (comma == std::string_view::npos) fail();
  auto si = inner.substr(0, comma);
  auto sj = inner.substr(comma + 1);
  if (si.size() != sj.size() || si.empty()) fail();
  CellAddr a;
  a.m = static_cast<int>(si.size());
  for (std::size_t k = 0; k < si.size(); ++k) {
    if (si[k] < '0' || si[k] > '2' || sj[k] < '0' || sj[k] > '2') fail();
    a.i = a.i * 3 + (si[k] - '0');
    a.j = a.j * 3 + (sj[k] - '0');
  }
  if (!cell_exists(a.i, a.j, a.m)) throw ConfigError("address " + std::string(text) + " is a vacant square");
  return a;
}

bool cell_exists(std::int64_t i, std::int64_t j, int m) {
  if (m < 0 || m > kMaxLevel) throw ConfigError("level out of range");
  const std::int64_t side = pow3(m);
  if (i < 0 || j < 0 || i >= side || j >= side) throw ConfigError("cell index out of range");
  return detail::classify(i, j, m).exists;
}

namespace {

StepResult step_finite(std::int64_t i, std::int64_t j, Direction d, int m, const IdentSequence& seq, GraphKind kind) {
  auto r = step_in_window(i, j, d, m, [&](int k) { return seq[static_cast<std::size_t>(m - k)]; });
  if (r.kind == StepResult::Kind::Cell || kind == GraphKind::Unglued) return r;

  const std::int64_t side = pow3(m);
  const IdentType outer = seq[0];
  r.kind = StepResult::Kind::Cell;
  r.stitched = true;
  if (d == Direction::Left || d == Direction::Right) {
    r.reversed = reverses_horizontal_gluing(outer);
    r.i = d == Direction::Left ? side - 1 : 0;
    r.j = r.reversed ? side - 1 - j : j;
  } else {
    r.reversed = reverses_vertical_gluing(outer);
    r.j = d == Direction::Down ? side - 1 : 0;
    r.i = r.reversed ? side - 1 - i : i;
  }
  return r;
}

}  // namespace

std::optional<CellAddr> resolve_step(const CellAddr& addr, Direction d, const IdentSequence& seq, GraphKind kind) {
  if (static_cast<int>(seq.size()) < addr.m + 1) throw ConfigError("identification sequence shorter than m+1");
  if (!cell_exists(addr.i, addr.j, addr.m)) throw ConfigError("resolve_step from a vacant square");
  auto r = step_finite(addr.i, addr.j, d, addr.m, seq, kind);
  if (r.kind == StepResult::Kind::Exit) return std::nullopt;
  return CellAddr{addr.m, r.i, r.j};
}

CarpetGraph build_graph(int m, const IdentSequence& seq, GraphKind kind) {
  if (m < 0 || m > 8) throw ConfigError("finite carpet level must be in [0, 8]");
  if (static_cast<int>(seq.size()) < m + 1) throw ConfigError("identification sequence shorter than m+1");

  CarpetGraph g;
  g.m_ = m;
  g.side_ = pow3(m);
  g.seq_ = seq;
  g.kind_ = kind;
  const std::int64_t side = g.side_;
  g.grid_.assign(static_cast<std::size_t>(side * side), kMissing);
  for (std::int64_t j = 0; j < side; ++j) {
    for (std::int64_t i = 0; i < side; ++i) {
      if (!detail::classify(i, j, m).exists) continue;
      g.grid_[static_cast<std::size_t>(j * side + i)] = static_cast<std::int32_t>(g.cells_.size());
      g.cells_.push_back({m, i, j});
      g.boundary_.push_back(i == 0 || j == 0 || i == side - 1 || j == side - 1 ? 1 : 0);
    }
  }
  g.slots_.resize(g.cells_.size());
  for (std::size_t k = 0; k < g.cells_.size(); ++k) {
    const auto& c = g.cells_[k];
    for (auto d : kDirections) {
      auto r = step_finite(c.i, c.j, d, m, seq, kind);
      g.slots_[k][static_cast<int>(d)] =
          r.kind == StepResult::Kind::Exit ? kMissing : g.grid_[static_cast<std::size_t>(r.j * side + r.i)];
    }
  }
  return g;
}

std::size_t CarpetGraph::boundary_count() const {
  return static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), std::uint8_t{1}));
}

std::optional<std::size_t> CarpetGraph::index_of(std::int64_t i, std::int64_t j) const {
  if (i < 0 || j < 0 || i >= side_ || j >= side_) return std::nullopt;
  auto v = grid_[static_cast<std::size_t>(j * side_ + i)];
  if (v == kMissing) return std::nullopt;
  return static_cast<std::size_t>(v);
}

int CarpetGraph::degree(std::size_t k) const {
  return static_cast<int>(std::count_if(slots_[k].begin(), slots_[k].end(), [](auto s) { return s != kMissing; }));
}

void CarpetGraph::write_csv(std::ostream& os) const {
  os << "cell_index,addr_i_base3,addr_j_base3,left,right,up,down,is_boundary\n";
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto& c = cells_[k];
    os << k << ',' << base3(c.i, m_) << ',' << base3(c.j, m_);
    for (auto s : slots_[k]) os << ',' << s;
    os << ',' << (boundary_[k] ? 1 : 0) << '\n';
  }
}

}  // namespace carpet
