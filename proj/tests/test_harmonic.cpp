#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "carpet/harmonic.hpp"
#include "carpet/metric.hpp"
#include "helpers.hpp"

using namespace carpet;

namespace {

// dense mean-value system written straight from the slot lists
std::vector<double> dense_extension(const CarpetGraph& g, const std::vector<double>& fixed) {
  const auto n = static_cast<Eigen::Index>(g.cell_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    if (g.is_boundary(static_cast<std::size_t>(c))) {
      a(c, c) = 1;
      b(c) = fixed[static_cast<std::size_t>(c)];
      continue;
    }
    a(c, c) = 4;
    for (auto nb : g.slots(static_cast<std::size_t>(c))) a(c, nb) -= 1;
  }
  const Eigen::VectorXd u = a.fullPivLu().solve(b);
  return {u.data(), u.data() + n};
}

CarpetGraph torus(int m) { return build_unglued(m, IdentSequence::uniform(IdentType::Torus, m)); }

}  // namespace

TEST_CASE("constants are harmonic") {
  const auto g = torus(3);
  const auto u = harmonic_extension(g, std::vector<double>(g.cell_count(), 1.0));
  for (double v : u) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("harmonic extension matches a dense solve") {
  for (auto t : carpet::testing::kAllTypes) {
    const auto g = build_unglued(2, IdentSequence::uniform(t, 2));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u01(-1, 1);
    std::vector<double> fixed(g.cell_count(), 0.0);
    for (std::size_t c = 0; c < g.cell_count(); ++c)
      if (g.is_boundary(c)) fixed[c] = u01(rng);
    const auto u = harmonic_extension(g, fixed);
    const auto v = dense_extension(g, fixed);
    for (std::size_t c = 0; c < g.cell_count(); ++c) CHECK(u[c] == doctest::Approx(v[c]).epsilon(1e-10));

    // maximum principle
    double lo = 1e9, hi = -1e9;
    for (std::size_t c = 0; c < g.cell_count(); ++c)
      if (g.is_boundary(c)) lo = std::min(lo, fixed[c]), hi = std::max(hi, fixed[c]);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      CHECK(u[c] >= lo - 1e-12);
      CHECK(u[c] <= hi + 1e-12);
    }
  }
}

TEST_CASE("Poisson kernel: probabilities that sum to one") {
  const auto g = torus(3);
  std::vector<double> total(g.cell_count(), 0.0);
  for (std::size_t y = 0; y < g.cell_count(); ++y) {
    if (!g.is_boundary(y)) continue;
    const auto p = poisson_kernel(g, y);
    for (std::size_t x = 0; x < g.cell_count(); ++x) {
      REQUIRE(p[x] >= -1e-14);
      REQUIRE(p[x] <= 1 + 1e-14);
      if (!g.is_boundary(x)) total[x] += p[x];
    }
    CHECK(p[y] == 1.0);
  }
  for (std::size_t x = 0; x < g.cell_count(); ++x)
    if (!g.is_boundary(x)) CHECK(total[x] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(poisson_kernel(g, g.index_of(2, 2).value()), ConfigError);
}

TEST_CASE("Poisson kernel decays along a straight row (level 2 torus fixture)") {
  const auto g = torus(2);
  const auto y = g.index_of(0, 2).value();
  const auto p = poisson_kernel(g, y);
  double prev = p[y];
  // monotone up to the stitch across the level-1 hole, where the value rises again
  for (std::int64_t i = 1; i <= 5; ++i) {
    const double v = p[g.index_of(i, 2).value()];
    CHECK(v < prev);
    prev = v;
  }
  CHECK(p[g.index_of(6, 2).value()] > p[g.index_of(5, 2).value()]);
  CHECK(p[g.index_of(8, 2).value()] == 0.0);
}

TEST_CASE("effective resistance: direct definition against the inverse-diagonal route") {
  for (auto t : {IdentType::Torus, IdentType::Projective, IdentType::KleinH}) {
    for (int m = 2; m <= 3; ++m) {
      const auto g = build_unglued(m, IdentSequence::uniform(t, m));
      const auto prof = resistance_profile(g);
      // dense inverse of the grounded combinatorial Laplacian
      std::vector<std::size_t> free;
      for (std::size_t c = 0; c < g.cell_count(); ++c)
        if (!g.is_boundary(c)) free.push_back(c);
      std::vector<Eigen::Index> pos(g.cell_count(), -1);
      for (std::size_t k = 0; k < free.size(); ++k) pos[free[k]] = static_cast<Eigen::Index>(k);
      const auto n = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        a(r, r) = 4;
        for (auto nb : g.slots(free[static_cast<std::size_t>(r)]))
          if (pos[static_cast<std::size_t>(nb)] >= 0) a(r, pos[static_cast<std::size_t>(nb)]) -= 1;
      }
      const Eigen::MatrixXd inv = a.inverse();
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto c = free[static_cast<std::size_t>(r)];
        CHECK(prof[c] == doctest::Approx(inv(r, r)).epsilon(1e-10));
        CHECK(effective_resistance(g, c) == doctest::Approx(inv(r, r)).epsilon(1e-10));
      }
      for (std::size_t c = 0; c < g.cell_count(); ++c)
        if (g.is_boundary(c)) CHECK(std::isnan(prof[c]));
    }
  }
}

TEST_CASE("resistance bounds and ring-preserving symmetry") {
  const auto g = torus(3);
  const auto prof = resistance_profile(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (g.is_boundary(c)) continue;
    CHECK(prof[c] >= 0.25);  // at best four unit conductors straight to ground
  }
  for (const auto& f : carpet::testing::dihedral_maps()) {
    const auto p = carpet::testing::induced_permutation(g, f);
    for (std::size_t c = 0; c < g.cell_count(); ++c)
      if (!g.is_boundary(c)) REQUIRE(prof[c] == doctest::Approx(prof[p[c]]).epsilon(1e-10));
  }
  CHECK_THROWS_AS(effective_resistance(g, 0), ConfigError);
}

TEST_CASE("resistance hill peaks inside") {
  const auto g = torus(3);
  const auto prof = resistance_profile(g);
  const auto d = distance_to_boundary(g);
  double best = 0;
  int arg = 0, dmax = 0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (g.is_boundary(c)) continue;
    dmax = std::max(dmax, d[c]);
    if (prof[c] > best) best = prof[c], arg = d[c];
  }
  const double ratio = static_cast<double>(arg) / dmax;
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 0.85);
}

TEST_CASE("iterative path above the direct-solve limit") {
  const auto g = torus(5);
  const auto sys = DirichletSystem::interior(g);
  CHECK_FALSE(sys.is_direct());
  const auto y = g.index_of(0, 101).value();
  const auto p = poisson_kernel(g, y);
  const auto x = g.index_of(1, 101).value();
  CHECK(p[x] > 0.0);
  CHECK(p[x] < 1.0);
  const auto u = harmonic_extension(g, std::vector<double>(g.cell_count(), 2.0));
  for (double v : u) REQUIRE(v == doctest::Approx(2.0).epsilon(1e-8));
}
