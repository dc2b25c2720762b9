#include <doctest.h>

#include <random>

#include "carpet/multiscale.hpp"
#include "helpers.hpp"

using namespace carpet;

namespace {

constexpr std::array<IdentType, 4> kTypes = {IdentType::Torus, IdentType::Projective, IdentType::KleinH,
                                             IdentType::KleinV};

CarpetGraph glued_graph(IdentType t, int m) { return build_glued(m, IdentSequence::uniform(t, m)); }

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double value_at(const Eigen::VectorXd& v, const std::vector<std::int32_t>& rank, std::int64_t side, std::int64_t i,
                std::int64_t j) {
  return v(rank[static_cast<std::size_t>(j * side + i)]);
}

}  // namespace

TEST_CASE("tiled eigenfunctions are exact at the next level") {
  for (auto t : kTypes) {
    for (int m = 1; m <= 3; ++m) {
      const auto g = glued_graph(t, m);
      const auto s = compute_spectrum(g, LaplacianKind::CombinatorialGlued, true);
      const auto fine = glued_graph(t, m + 1);
      double worst = 0.0;
      for (Eigen::Index k = 0; k < s.size(); ++k) {
        const auto tiled = tile_eigenfunction(s.eigenvectors.col(k), m, t);
        CHECK(tiled.target_level == m + 1);
        worst = std::max(worst, eigen_residual(fine, tiled.values, s.eigenvalues(k)));
      }
      CHECK_MESSAGE(worst <= 1e-10, to_string(t), " m=", m);
    }
  }
}

TEST_CASE("a wrong reflection pattern is caught by the residual") {
  const auto g = glued_graph(IdentType::Projective, 2);
  const auto s = compute_spectrum(g, LaplacianKind::CombinatorialGlued, true);
  const auto fine = glued_graph(IdentType::Projective, 3);
  const auto plain = tile_with_pattern(s.eigenvectors.col(1), 2, tile_pattern(IdentType::Torus));
  CHECK(eigen_residual(fine, plain.values, s.eigenvalues(1)) > 1e-3);
}

TEST_CASE("constants tile to constants and tiling composes") {
  for (auto t : kTypes) {
    const auto tiled = tile_eigenfunction(Eigen::VectorXd::Constant(8, 2.5), 1, t);
    CHECK((tiled.values.array() == 2.5).all());

    const auto g = glued_graph(t, 1);
    const auto s = compute_spectrum(g, LaplacianKind::CombinatorialGlued, true);
    const Eigen::VectorXd u = s.eigenvectors.col(3);
    const auto twice = tile_eigenfunction(tile_eigenfunction(u, 1, t).values, 2, t).values;
    CHECK(eigen_residual(glued_graph(t, 3), twice, s.eigenvalues(3)) <= 1e-10);
    CHECK((periodic_extension(u, 1, t, 3) - twice).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("coarse glued spectra sit inside the next level") {
  for (auto t : {IdentType::Torus, IdentType::Projective, IdentType::KleinH}) {
    const auto c = compute_spectrum(glued_graph(t, 2), LaplacianKind::CombinatorialGlued, false).eigenvalues;
    const auto f = compute_spectrum(glued_graph(t, 3), LaplacianKind::CombinatorialGlued, false).eigenvalues;
    // sorted sub-multiset match
    Eigen::Index j = 0;
    int matched = 0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      while (j < f.size() && f(j) < c(k) - 1e-7) ++j;
      if (j < f.size() && std::abs(f(j) - c(k)) <= 1e-7) {
        ++matched;
        ++j;
      }
    }
    CHECK(matched == 64);
  }
  const auto t2 = compute_spectrum(glued_graph(IdentType::Torus, 3), LaplacianKind::CombinatorialGlued, false);
  CHECK(counting_function(t2, 0.4410218 + 1e-6) - counting_function(t2, 0.4410218 - 1e-6) >= 1);
}

TEST_CASE("average_down") {
  CHECK((average_down(Eigen::VectorXd::Constant(64, -3.0), 2).array() == -3.0).all());
  const auto u = random_vector(512, 5);
  const auto ubar = average_down(u, 3);
  CHECK(ubar.size() == 64);
  CHECK(ubar.mean() == doctest::Approx(u.mean()).epsilon(1e-12));
  CHECK_THROWS_AS(average_down(Eigen::VectorXd::Ones(1), 0), ConfigError);

  // by hand: cell (0,0) at level 1 averages the eight level-2 cells of the lower-left block
  const auto rank = cell_rank_table(2);
  double acc = 0.0;
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 3; ++a)
      if (a != 1 || b != 1) acc += value_at(u.head(64), rank, 9, a, b);
  CHECK(average_down(u.head(64), 2)(0) == doctest::Approx(acc / 8));
}

TEST_CASE("averaging commutes with tiling") {
  for (auto t : kTypes) {
    const auto pattern = tile_pattern(t);
    for (int m = 1; m <= 3; ++m) {
      const auto u = random_vector(static_cast<Eigen::Index>(std::pow(8, m)), 17u + static_cast<unsigned>(m));
      const Eigen::VectorXd lhs = average_down(tile_with_pattern(u, m, pattern).values, m + 1);
      const Eigen::VectorXd rhs = m == 1 ? Eigen::VectorXd::Constant(8, u.mean())
                                         : tile_with_pattern(average_down(u, m), m - 1, pattern).values;
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("refinement scores") {
  const auto g = glued_graph(IdentType::Torus, 2);
  const auto s = compute_spectrum(g, LaplacianKind::CombinatorialGlued, true);

  const auto flat = refinement_score(Eigen::VectorXd::Constant(512, 1.0), g, s);
  CHECK(flat.category == RefinementCategory::Ok);
  CHECK(flat.matched_lambda == doctest::Approx(0.0).scale(1));
  CHECK(flat.residual < 1e-12);

  // averaging commutes with tiling, so a level-1 eigenfunction tiled twice
  // averages to a tiling of its own mean, which is zero
  const auto s1 = compute_spectrum(glued_graph(IdentType::Torus, 1), LaplacianKind::CombinatorialGlued, true);
  const auto u = periodic_extension(s1.eigenvectors.col(2), 1, IdentType::Torus, 3);
  CHECK(refinement_score(u, g, s).category == RefinementCategory::ZeroAverage);

  // a level-2 eigenfunction plus a tiled copy of the constant refines to the constant
  const auto v = Eigen::VectorXd(tile_eigenfunction(Eigen::VectorXd::Constant(64, 1.0), 2, IdentType::Torus).values);
  const auto sc = refinement_score(v, g, s);
  CHECK(sc.category == RefinementCategory::Ok);
  CHECK(std::abs(sc.matched_lambda) < 1e-9);

  // a function with zero block averages
  Eigen::VectorXd z = Eigen::VectorXd::Zero(512);
  const auto rank = cell_rank_table(3);
  z(rank[0]) = 1.0;   // (0, 0)
  z(rank[1]) = -1.0;  // (1, 0), same coarse cell
  CHECK(refinement_score(z, g, s).category == RefinementCategory::ZeroAverage);

  CHECK(to_string(RefinementCategory::ZeroProjection) == "zero_projection");
}

TEST_CASE("periodic extension") {
  const auto s = compute_spectrum(glued_graph(IdentType::Torus, 2), LaplacianKind::CombinatorialGlued, true);
  const Eigen::VectorXd u = s.eigenvectors.col(1);
  const auto ext = periodic_extension(u, 2, IdentType::Torus, 4);
  const auto window = build_unglued(4, IdentSequence::uniform(IdentType::Torus, 4));
  CHECK(window_eigen_residual(window, ext, s.eigenvalues(1)) <= 1e-10);

  const auto rank = cell_rank_table(4);
  const auto small = cell_rank_table(2);
  for (std::int64_t j = 0; j < 81; ++j)
    for (std::int64_t i = 0; i < 81; ++i)
      if (cell_exists(i, j, 4))
        REQUIRE(value_at(ext, rank, 81, i, j) == value_at(u, small, 9, i % 9, j % 9));

  CHECK((periodic_extension(Eigen::VectorXd::Constant(64, 1.0), 2, IdentType::KleinV, 4).array() == 1.0).all());
}

TEST_CASE("periodic extension: every block is a reflected copy") {
  for (auto t : {IdentType::Projective, IdentType::KleinH, IdentType::KleinV}) {
    const auto g = glued_graph(t, 2);
    const auto s = compute_spectrum(g, LaplacianKind::CombinatorialGlued, true);
    const Eigen::VectorXd u = s.eigenvectors.col(4);
    const auto ext = periodic_extension(u, 2, t, 4);
    CHECK(window_eigen_residual(build_unglued(4, IdentSequence::uniform(t, 4)), ext, s.eigenvalues(4)) <= 1e-10);
    const auto rank = cell_rank_table(4);
    const auto small = cell_rank_table(2);
    for (std::int64_t by = 0; by < 9; ++by) {
      for (std::int64_t bx = 0; bx < 9; ++bx) {
        if (!cell_exists(bx, by, 2)) continue;
        bool any = false;
        for (int flip = 0; flip < 4 && !any; ++flip) {
          bool same = true;
          for (std::int64_t b = 0; b < 9 && same; ++b) {
            for (std::int64_t a = 0; a < 9 && same; ++a) {
              if (!cell_exists(a, b, 2)) continue;
              const auto sa = (flip & 1) ? 8 - a : a, sb = (flip & 2) ? 8 - b : b;
              same = value_at(ext, rank, 81, 9 * bx + a, 9 * by + b) == value_at(u, small, 9, sa, sb);
            }
          }
          any = same;
        }
        CHECK(any);
      }
    }
  }
}

TEST_CASE("spectral resolution on a finite window") {
  const auto g = glued_graph(IdentType::Projective, 3);
  const auto s = compute_spectrum(g, LaplacianKind::CombinatorialGlued, true);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(s.size());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u01(-1, 1);
  for (std::size_t c = 0; c < g.cell_count(); ++c)
    if (!g.is_boundary(c) && g.cell(c).i < 14) f(static_cast<Eigen::Index>(c)) = u01(rng);

  CHECK((spectral_projection(g, s, f, 0.0, 8.0 + 1e-9) - f).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((spectral_laplacian(g, s, f) - apply_laplacian(g, f)).cwiseAbs().maxCoeff() <= 1e-10);

  const auto p1 = spectral_projection(g, s, f, 0.0, 1.5);
  const auto p2 = spectral_projection(g, s, f, 1.5, 4.0);
  const auto p12 = spectral_projection(g, s, f, 0.0, 4.0);
  CHECK((p1 + p2 - p12).cwiseAbs().maxCoeff() <= 1e-10);

  const auto m1 = projection_matrix(s, 0.0, 1.5);
  const auto m2 = projection_matrix(s, 1.5, 4.0);
  CHECK((m1 * m1 - m1).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((m1 * m2).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((m1 * f - p1).cwiseAbs().maxCoeff() <= 1e-10);

  // the computed zero eigenvalue may come out slightly negative
  const auto gt = glued_graph(IdentType::Torus, 3);
  const auto st = compute_spectrum(gt, LaplacianKind::CombinatorialGlued, true);
  Eigen::VectorXd ft = Eigen::VectorXd::Zero(st.size());
  for (std::size_t c = 0; c < gt.cell_count(); ++c)
    if (!gt.is_boundary(c)) ft(static_cast<Eigen::Index>(c)) = u01(rng);
  CHECK((spectral_projection(gt, st, ft, 0.0, 8.0) - ft).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(projection_matrix(st, 0.0, 1e-3).trace() == doctest::Approx(1.0));

  Eigen::VectorXd bad = f;
  bad(0) = 1.0;
  CHECK_THROWS_AS(spectral_projection(g, s, bad, 0.0, 1.0), ConfigError);
}
