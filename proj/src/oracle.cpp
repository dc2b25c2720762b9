#include "carpet/oracle.hpp"

namespace carpet {

BlowupOracle::BlowupOracle(std::vector<IdentType> by_size, std::vector<BlockPos> embedding, int max_level)
    : by_size_(std::move(by_size)), embedding_(std::move(embedding)), max_level_(max_level) {
  if (by_size_.empty()) throw ConfigError("blowup oracle needs at least one identification type");
  if (max_level_ < 1 || max_level_ > kMaxLevel) throw ConfigError("oracle max level out of range");
  if (embedding_.empty()) {
    for (int k = 0; k < kMaxLevel; ++k) embedding_.push_back(k % 2 == 0 ? BlockPos{0, 0} : BlockPos{2, 2});
  }
  if (static_cast<int>(embedding_.size()) < max_level_) throw ConfigError("embedding shorter than max level");
  off_x_.assign(static_cast<std::size_t>(max_level_) + 1, 0);
  off_y_.assign(static_cast<std::size_t>(max_level_) + 1, 0);
  for (int k = 0; k < max_level_; ++k) {
    const auto p = embedding_[static_cast<std::size_t>(k)];
    if (p.bx < 0 || p.bx > 2 || p.by < 0 || p.by > 2 || (p.bx == 1 && p.by == 1)) {
      throw ConfigError("embedding position must be one of the 8 non-central blocks");
    }
    off_x_[static_cast<std::size_t>(k) + 1] = off_x_[static_cast<std::size_t>(k)] + p.bx * pow3(k);
    off_y_[static_cast<std::size_t>(k) + 1] = off_y_[static_cast<std::size_t>(k)] + p.by * pow3(k);
  }
}

BlowupOracle BlowupOracle::uniform(IdentType t, int max_level) { return BlowupOracle({t}, {}, max_level); }

BlowupOracle BlowupOracle::from_finite(const IdentSequence& seq, int m, int max_level) {
  if (static_cast<int>(seq.size()) < m + 1) throw ConfigError("identification sequence shorter than m+1");
  std::vector<IdentType> by_size;
  for (int k = 0; k < m; ++k) by_size.push_back(seq[static_cast<std::size_t>(m - k)]);
  by_size.push_back(seq[0]);
  return BlowupOracle(std::move(by_size), {}, max_level);
}

std::optional<int> BlowupOracle::containing_level(ExtAddr a) const {
  for (int level = 0; level <= max_level_; ++level) {
    const std::int64_t side = pow3(level);
    const std::int64_t i = a.x + off_x_[static_cast<std::size_t>(level)];
    const std::int64_t j = a.y + off_y_[static_cast<std::size_t>(level)];
    if (i >= 0 && j >= 0 && i < side && j < side) return level;
  }
  return std::nullopt;
}

bool BlowupOracle::exists(ExtAddr a) const {
  auto level = containing_level(a);
  if (!level) return false;
  auto w = to_window(a, *level);
  return detail::classify(w.i, w.j, *level).exists;
}

std::optional<BlowupOracle::Step> BlowupOracle::step(ExtAddr a, Direction d) const {
  const ExtAddr target{a.x + dx(d), a.y + dy(d)};
  auto level = containing_level(target);
  if (!level) return std::nullopt;
  // Source is adjacent to target and therefore lies in the same window or the
  // target is a plain lattice neighbor; either way the window step resolves it.
  const int lv = std::max(*level, containing_level(a).value_or(*level));
  const auto w = to_window(a, lv);
  auto r = step_in_window(w.i, w.j, d, lv, [this](int k) { return hole_type(k); });
  if (r.kind == StepResult::Kind::Exit) return std::nullopt;
  return Step{from_window({lv, r.i, r.j}), r.stitched, r.reversed};
}

std::array<std::optional<ExtAddr>, 4> BlowupOracle::neighbors(ExtAddr a) const {
  std::array<std::optional<ExtAddr>, 4> out;
  for (auto d : kDirections) out[static_cast<int>(d)] = neighbor(a, d);
  return out;
}

}  // namespace carpet
