#include "carpet/multiscale.hpp"

#include <cmath>

#include "carpet/metric.hpp"

namespace carpet {

namespace {

constexpr Reflection I = Reflection::Identity;
constexpr Reflection H = Reflection::FlipH;
constexpr Reflection V = Reflection::FlipV;

std::int64_t count_cells(int m) {
  std::int64_t n = 1;
  for (int k = 0; k < m; ++k) n *= 8;
  return n;
}

void check_length(const Eigen::VectorXd& u, int m) {
  if (m < 0 || m > 8) throw ConfigError("level out of range");
  if (u.size() != count_cells(m)) throw ConfigError("function length does not match level " + std::to_string(m));
}

}  // namespace

TilePattern tile_pattern(IdentType t) {
  switch (t) {
    case IdentType::Torus:
      return {{{I, I, I}, {I, I, I}, {I, I, I}}};
    case IdentType::Projective:
      return {{{I, V, I}, {H, I, H}, {I, V, I}}};
    case IdentType::KleinH:
      return {{{I, V, I}, {I, I, I}, {I, V, I}}};
    case IdentType::KleinV:
      return {{{I, I, I}, {H, I, H}, {I, I, I}}};
  }
  return {};
}

std::vector<std::int32_t> cell_rank_table(int m) {
  const std::int64_t s = pow3(m);
  std::vector<std::int32_t> rank(static_cast<std::size_t>(s * s), -1);
  std::int32_t next = 0;
  for (std::int64_t j = 0; j < s; ++j)
    for (std::int64_t i = 0; i < s; ++i)
      if (cell_exists(i, j, m)) rank[static_cast<std::size_t>(j * s + i)] = next++;
  return rank;
}

TiledFunction tile_with_pattern(const Eigen::VectorXd& u, int m, const TilePattern& pattern) {
  check_length(u, m);
  const std::int64_t s = pow3(m), S = 3 * s;
  const auto coarse = cell_rank_table(m);
  TiledFunction out{m, m + 1, Eigen::VectorXd(count_cells(m + 1))};
  Eigen::Index k = 0;
  for (std::int64_t j = 0; j < S; ++j) {
    for (std::int64_t i = 0; i < S; ++i) {
      if (!cell_exists(i, j, m + 1)) continue;
      std::int64_t a = i % s, b = j % s;
      const Reflection r = pattern[static_cast<std::size_t>(j / s)][static_cast<std::size_t>(i / s)];
      if (r == Reflection::FlipH || r == Reflection::FlipBoth) a = s - 1 - a;
      if (r == Reflection::FlipV || r == Reflection::FlipBoth) b = s - 1 - b;
      out.values(k++) = u(coarse[static_cast<std::size_t>(b * s + a)]);
    }
  }
  return out;
}

TiledFunction tile_eigenfunction(const Eigen::VectorXd& u, int m, IdentType type) {
  return tile_with_pattern(u, m, tile_pattern(type));
}

Eigen::VectorXd apply_laplacian(const CarpetGraph& g, const Eigen::VectorXd& f) {
  if (g.kind() != GraphKind::Glued) throw ConfigError("apply_laplacian needs a glued graph");
  if (f.size() != static_cast<Eigen::Index>(g.cell_count())) throw ConfigError("function length mismatch");
  Eigen::VectorXd out(f.size());
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    double acc = 0.0;
    for (auto nb : g.slots(c)) acc += f(static_cast<Eigen::Index>(c)) - f(nb);
    out(static_cast<Eigen::Index>(c)) = acc;
  }
  return out;
}

double eigen_residual(const CarpetGraph& g, const Eigen::VectorXd& v, double lambda) {
  const double n = v.norm();
  if (n == 0.0) return 0.0;
  return (apply_laplacian(g, v) - lambda * v).norm() / n;
}

Eigen::VectorXd average_down(const Eigen::VectorXd& u, int m) {
  if (m < 1) throw ConfigError("average_down needs m >= 1");
  check_length(u, m);
  const std::int64_t s = pow3(m - 1);
  const auto fine = cell_rank_table(m);
  Eigen::VectorXd out(count_cells(m - 1));
  Eigen::Index k = 0;
  for (std::int64_t j = 0; j < s; ++j) {
    for (std::int64_t i = 0; i < s; ++i) {
      if (!cell_exists(i, j, m - 1)) continue;
      double acc = 0.0;
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a)
          if (a != 1 || b != 1) acc += u(fine[static_cast<std::size_t>((3 * j + b) * 3 * s + 3 * i + a)]);
      out(k++) = acc / 8.0;
    }
  }
  return out;
}

std::string_view to_string(RefinementCategory c) {
  switch (c) {
    case RefinementCategory::Ok:
      return "ok";
    case RefinementCategory::ZeroAverage:
      return "zero_average";
    case RefinementCategory::ZeroProjection:
      return "zero_projection";
  }
  return "?";
}

RefinementScore refinement_score(const Eigen::VectorXd& u, const CarpetGraph& coarse_graph, const Spectrum& coarse) {
  if (!coarse.has_vectors() || coarse.kind != LaplacianKind::CombinatorialGlued)
    throw ConfigError("refinement needs a glued spectrum with eigenvectors");
  const Eigen::VectorXd ubar = average_down(u, coarse.m + 1);
  RefinementScore score;
  const double nb = ubar.norm();
  if (nb <= 1e-9 * u.norm()) {
    score.category = RefinementCategory::ZeroAverage;
    score.residual = 1.0;
    return score;
  }
  // ||L ubar - lambda ubar|| is convex in lambda, so the best spectrum point
  // is the one nearest the Rayleigh quotient
  const Eigen::VectorXd lu = apply_laplacian(coarse_graph, ubar);
  const double rq = ubar.dot(lu) / (nb * nb);
  const auto clusters = eigenvalue_clusters(coarse.eigenvalues);
  auto best = clusters.front();
  for (const auto& c : clusters)
    if (std::abs(coarse.eigenvalues(c.first) - rq) < std::abs(coarse.eigenvalues(best.first) - rq)) best = c;
  score.matched_lambda = coarse.eigenvalues(best.first);

  const auto block = coarse.eigenvectors.middleCols(best.first, best.second - best.first);
  const Eigen::VectorXd proj = block * (block.transpose() * ubar);
  if (proj.norm() <= 1e-9 * nb) {
    score.category = RefinementCategory::ZeroProjection;
    score.residual = 1.0;
    return score;
  }
  score.residual = (ubar - proj).norm() / nb;
  return score;
}

Eigen::VectorXd periodic_extension(const Eigen::VectorXd& u, int m, IdentType type, int M) {
  if (M < m) throw ConfigError("window level must not be below the source level");
  Eigen::VectorXd v = u;
  for (int k = m; k < M; ++k) v = tile_eigenfunction(v, k, type).values;
  return v;
}

double window_eigen_residual(const CarpetGraph& window, const Eigen::VectorXd& v, double lambda, int min_distance) {
  if (window.kind() != GraphKind::Unglued) throw ConfigError("window residual needs an unglued graph");
  const auto dist = distance_to_boundary(window);
  double worst = 0.0;
  for (std::size_t c = 0; c < window.cell_count(); ++c) {
    if (dist[c] < min_distance) continue;
    const double x = v(static_cast<Eigen::Index>(c));
    double acc = 4.0 * x;
    for (auto nb : window.slots(c)) acc -= v(nb);
    worst = std::max(worst, std::abs(acc - lambda * x));
  }
  return worst;
}

namespace {

void check_projection_input(const CarpetGraph& g, const Spectrum& s, const Eigen::VectorXd& f) {
  if (!s.has_vectors() || s.kind != LaplacianKind::CombinatorialGlued)
    throw ConfigError("projection needs a glued spectrum with eigenvectors");
  if (f.size() != s.size()) throw ConfigError("function length mismatch");
  for (Eigen::Index c = 0; c < f.size(); ++c)
    if (f(c) != 0.0 && g.is_boundary(static_cast<std::size_t>(c)))
      throw ConfigError("support of f touches the window ring at " + format_addr(g.cell(static_cast<std::size_t>(c))));
}

// end points are shifted down by rounding noise so that lambda_0 = -1e-15 counts as 0
constexpr double kEndpointSlack = 1e-12;
bool in_interval(double lambda, double a, double b) { return lambda >= a - kEndpointSlack && lambda < b - kEndpointSlack; }

// <f, u_k> over supp f only
Eigen::VectorXd support_coefficients(const Spectrum& s, const Eigen::VectorXd& f) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index x = 0; x < f.size(); ++x)
    if (f(x) != 0.0) c += f(x) * s.eigenvectors.row(x).transpose();
  return c;
}

}  // namespace

Eigen::VectorXd spectral_projection(const CarpetGraph& g, const Spectrum& s, const Eigen::VectorXd& f, double a,
                                    double b) {
  check_projection_input(g, s, f);
  Eigen::VectorXd c = support_coefficients(s, f);
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (!in_interval(s.eigenvalues(k), a, b)) c(k) = 0.0;
  return s.eigenvectors * c;
}

Eigen::MatrixXd projection_matrix(const Spectrum& s, double a, double b) {
  if (!s.has_vectors()) throw ConfigError("projection needs eigenvectors");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s.size(), s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (in_interval(s.eigenvalues(k), a, b)) p.noalias() += s.eigenvectors.col(k) * s.eigenvectors.col(k).transpose();
  return p;
}

Eigen::VectorXd spectral_laplacian(const CarpetGraph& g, const Spectrum& s, const Eigen::VectorXd& f) {
  check_projection_input(g, s, f);
  const Eigen::VectorXd c = support_coefficients(s, f).cwiseProduct(s.eigenvalues);
  return s.eigenvectors * c;
}

}  // namespace carpet
