#include <doctest.h>

#include <random>

#include "carpet/metric.hpp"
#include "carpet/oracle.hpp"
#include "helpers.hpp"

using namespace carpet;

TEST_CASE("oracle agrees with the finite unglued carpet inside a window") {
  for (const char* text : {"TTTT", "PPPP", "TPKhKv", "KvKhPT"}) {
    const auto seq = IdentSequence::parse(text);
    const int m = 3;
    const auto g = build_unglued(m, seq);
    const auto o = BlowupOracle::from_finite(seq, m);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      if (g.is_boundary(c)) continue;
      const auto e = o.from_window(g.cell(c));
      REQUIRE(o.exists(e));
      for (auto d : kDirections) {
        const auto nb = o.neighbor(e, d);
        REQUIRE(nb.has_value());
        const auto w = o.to_window(*nb, m);
        REQUIRE(g.index_of(w.i, w.j).value() == static_cast<std::size_t>(g.slot(c, d)));
      }
    }
  }
}

TEST_CASE("oracle: generic cells have lattice neighbors, every neighbor is at distance 1") {
  const auto o = BlowupOracle::uniform(IdentType::Torus);
  // the origin sits at (6,6) of the level-2 window, away from holes
  const ExtAddr x{2, 0};
  for (auto d : kDirections) {
    const auto nb = o.neighbor(x, d).value();
    CHECK(nb == ExtAddr{x.x + dx(d), x.y + dy(d)});
  }
  const auto series = ball_series(o, {0, 0}, 2, 4);
  CHECK(series.count(1) == 1);
  CHECK(series.count(2) == 5);
}

TEST_CASE("oracle walks across a unit hole like resolve_step") {
  const auto o = BlowupOracle::uniform(IdentType::Torus);
  // find a cell directly below a unit hole in the level-3 window
  const int m = 3;
  bool tested = false;
  for (std::int64_t i = 0; i < pow3(m) && !tested; ++i) {
    for (std::int64_t j = 1; j + 1 < pow3(m) && !tested; ++j) {
      if (!cell_exists(i, j - 1, m) || cell_exists(i, j, m) || i % 3 != 1 || j % 3 != 1) continue;
      const auto e = o.from_window({m, i, j - 1});
      const auto up = o.neighbor(e, Direction::Up).value();
      CHECK(o.to_window(up, m).i == i);
      CHECK(o.to_window(up, m).j == j + 1);
      tested = true;
    }
  }
  CHECK(tested);
}

TEST_CASE("corner eccentricities of the level-2 carpets") {
  CHECK(eccentricity(build_unglued(2, IdentSequence::uniform(IdentType::Torus, 2)), 0) == 10);
  CHECK(eccentricity(build_unglued(2, IdentSequence::uniform(IdentType::KleinH, 2)), 0) == 9);
  const auto r = growth_sequences(4).r;
  for (int m = 2; m <= 4; ++m) {
    const auto g = build_unglued(m, IdentSequence::uniform(IdentType::Torus, m));
    for (std::int64_t i : {std::int64_t{0}, pow3(m) - 1})
      for (std::int64_t j : {std::int64_t{0}, pow3(m) - 1})
        CHECK(eccentricity(g, g.index_of(i, j).value()) <= r[static_cast<std::size_t>(m - 2)]);
  }
}

TEST_CASE("growth sequences") {
  const auto gs = growth_sequences(7);
  CHECK(gs.r == std::vector<std::int64_t>{10, 26, 58, 122, 250, 506});
  // R_{m+1} = max(2 R_m + 3, 2 R_m + 2^m + 1), evaluated independently
  std::int64_t R = 0;
  std::vector<std::int64_t> expect{0};
  for (int m = 0; m < 7; ++m) {
    R = std::max(2 * R + 3, 2 * R + (std::int64_t{1} << m) + 1);
    expect.push_back(R);
  }
  CHECK(gs.R == expect);
  CHECK(gs.R[1] == 3);
  CHECK(gs.R[2] == 9);
  CHECK(gs.R[3] == 23);
  CHECK(crossing_length(4) == 58);
}

TEST_CASE("ball series against a direct BFS on the finite window") {
  const auto o = BlowupOracle::uniform(IdentType::KleinH);
  const int M = 5;
  const auto series = ball_series(o, {0, 0}, 20, M);
  const auto g = build_unglued(M, IdentSequence::uniform(IdentType::KleinH, M));
  const auto w = o.to_window({0, 0}, M);
  const auto dist = bfs_distances(g, g.index_of(w.i, w.j).value());
  for (int r = 1; r <= 20; ++r) {
    std::int64_t n = 0;
    for (int d : dist) n += (d >= 0 && d < r);
    REQUIRE(series.count(r) == n);
  }
  for (int r = 2; r <= 20; ++r) CHECK(series.count(r) >= series.count(r - 1));
}

TEST_CASE("window too small is an error") {
  const auto o = BlowupOracle::uniform(IdentType::Torus);
  CHECK_THROWS_AS(ball_series(o, {0, 0}, 60, 3), WindowTooSmall);
  const auto fitted = ball_series_fitted(o, {0, 0}, 60, false);
  CHECK(fitted.window_level >= recommended_window_level(60, false));
}

TEST_CASE("triangle sandwich between ball series of nearby cells") {
  const auto o = BlowupOracle::uniform(IdentType::Projective);
  const ExtAddr x{0, 0};
  const auto level = recommended_window_level(80, true) + 1;
  const auto bx = ball_series(o, x, 80, level);
  // y = a cell 3 steps away
  ExtAddr y = x;
  for (auto d : {Direction::Right, Direction::Right, Direction::Up}) y = o.neighbor(y, d).value();
  const auto g = build_unglued(level, IdentSequence::uniform(IdentType::Projective, level));
  const auto wx = o.to_window(x, level), wy = o.to_window(y, level);
  const int d = bfs_distances(g, g.index_of(wx.i, wx.j).value())[g.index_of(wy.i, wy.j).value()];
  REQUIRE(d >= 1);
  const auto by = ball_series(o, y, 80 - d, level);
  for (int r = d + 1; r <= 80 - d; ++r) {
    CHECK(bx.count(r - d) <= by.count(r));
    CHECK(by.count(r) <= bx.count(r + d));
  }
}

TEST_CASE("corner-reachable torus balls of radius 2 r_m + 1 hold a full copy") {
  const auto o = BlowupOracle::uniform(IdentType::Torus);
  for (int m = 1; m <= 4; ++m) {
    const int r = m == 1 ? 5 : static_cast<int>(2 * crossing_length(m) + 1);
    const auto s = ball_series_fitted(o, {0, 0}, r, false);
    CHECK(s.count(r) >= (std::int64_t{1} << (3 * m)));
  }
}

TEST_CASE("balls of radius 2^m stay in the corner-sharing copies") {
  for (auto t : {IdentType::Torus, IdentType::KleinH, IdentType::Projective}) {
    const auto o = BlowupOracle::uniform(t);
    std::mt19937_64 rng(7);
    for (int m = 1; m <= 3; ++m) {
      int done = 0;
      while (done < 6) {
        const int window = m + 3;
        const std::int64_t side = pow3(window);
        std::uniform_int_distribution<std::int64_t> u(side / 9, side - side / 9 - 1);
        const auto i = u(rng), j = u(rng);
        if (!cell_exists(i, j, window)) continue;
        const auto src = o.from_window({window, i, j});
        CornerShareReport rep;
        try {
          rep = corner_share_check(o, src, m, window);
        } catch (const WindowTooSmall&) {
          continue;
        }
        ++done;
        CHECK(rep.ball_inside_sharing);
        CHECK(rep.sharing_copies <= 45);
        CHECK(rep.visited_copies <= rep.sharing_copies);
      }
    }
  }
}

TEST_CASE("BFS commutes with graph automorphisms") {
  const auto g = build_glued(3, IdentSequence::uniform(IdentType::Projective, 3));
  const auto maps = carpet::testing::dihedral_maps();
  for (const auto& f : maps) {
    const auto p = carpet::testing::induced_permutation(g, f);
    for (std::size_t src : {std::size_t{0}, std::size_t{77}, std::size_t{300}}) {
      const auto a = bfs_distances(g, src);
      const auto b = bfs_distances(g, p[src]);
      for (std::size_t c = 0; c < g.cell_count(); ++c) REQUIRE(a[c] == b[p[c]]);
    }
  }
}
