#include "carpet/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carpet/metric.hpp"

namespace carpet {

std::string_view to_string(LaplacianKind k) {
  return k == LaplacianKind::NormalizedDirichlet ? "NormalizedDirichlet" : "CombinatorialGlued";
}

LaplacianKind parse_laplacian_kind(std::string_view s) {
  if (s == "NormalizedDirichlet" || s == "dirichlet") return LaplacianKind::NormalizedDirichlet;
  if (s == "CombinatorialGlued" || s == "glued") return LaplacianKind::CombinatorialGlued;
  throw ConfigError("unknown laplacian kind '" + std::string(s) + "'");
}

std::vector<std::size_t> operator_cells(const CarpetGraph& g, LaplacianKind kind) {
  std::vector<std::size_t> cells;
  if (kind == LaplacianKind::CombinatorialGlued) {
    if (g.kind() != GraphKind::Glued) throw ConfigError("combinatorial laplacian needs a glued graph");
    cells.resize(g.cell_count());
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    return cells;
  }
  if (g.kind() != GraphKind::Unglued) throw ConfigError("dirichlet laplacian needs an unglued graph");
  for (std::size_t k = 0; k < g.cell_count(); ++k)
    if (!g.is_boundary(k)) cells.push_back(k);
  return cells;
}

LaplacianOperator assemble(const CarpetGraph& g, LaplacianKind kind) {
  LaplacianOperator op{kind, operator_cells(g, kind), {}};
  const auto n = static_cast<Eigen::Index>(op.cells.size());
  std::vector<std::int32_t> row(g.cell_count(), -1);
  for (Eigen::Index r = 0; r < n; ++r) row[op.cells[static_cast<std::size_t>(r)]] = static_cast<std::int32_t>(r);

  const bool normalized = kind == LaplacianKind::NormalizedDirichlet;
  const double diag = normalized ? 1.0 : 4.0;
  const double off = normalized ? -0.25 : -1.0;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(5 * n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t c = op.cells[static_cast<std::size_t>(r)];
    trips.emplace_back(r, r, diag);
    for (auto nb : g.slots(c)) {
      if (nb == kMissing) {
        if (!normalized) throw NumericError("glued graph has a missing slot");
        continue;
      }
      const auto col = row[static_cast<std::size_t>(nb)];
      if (col < 0) continue;  // Dirichlet ring
      trips.emplace_back(r, col, off);
    }
  }
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  return op;
}

std::optional<Eigen::Index> Spectrum::row_of(std::size_t cell) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), cell);
  if (it == cells.end() || *it != cell) return std::nullopt;
  return static_cast<Eigen::Index>(it - cells.begin());
}

namespace {

void normalize_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    auto col = v.col(k);
    const double top = col.cwiseAbs().maxCoeff();
    // first entry within rounding of the maximum decides, so mirror-image
    // ties resolve the same way every run
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (std::abs(col(r)) >= top * (1.0 - 1e-9)) {
        if (col(r) < 0) col = -col;
        break;
      }
    }
  }
}

}  // namespace

double max_residual(const LaplacianOperator& op, const Spectrum& s) {
  if (!s.has_vectors()) throw ConfigError("residual needs eigenvectors");
  double worst = 0.0;
  const Eigen::MatrixXd av = op.matrix * s.eigenvectors;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    worst = std::max(worst, (av.col(k) - s.eigenvalues(k) * s.eigenvectors.col(k)).norm());
  return worst;
}

Spectrum eigendecompose(const LaplacianOperator& op, int m, const IdentSequence& seq, bool vectors) {
  Spectrum s;
  s.kind = op.kind;
  s.m = m;
  s.seq = seq;
  s.cells = op.cells;
  const auto n = op.matrix.rows();
  if (n == 0) return s;

  Eigen::MatrixXd a = Eigen::MatrixXd(op.matrix);
  s.eigenvalues.resize(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', static_cast<lapack_int>(n),
                                         a.data(), static_cast<lapack_int>(n), s.eigenvalues.data());
  if (info != 0) throw NumericError("dsyevd failed with info " + std::to_string(info));
  if (!s.eigenvalues.allFinite()) throw NumericError("non-finite eigenvalue");
  if (vectors) {
    s.eigenvectors = std::move(a);
    normalize_signs(s.eigenvectors);
    const double res = max_residual(op, s);
    if (!(res <= kEigenResidualBound))
      throw NumericError("eigenpair residual " + std::to_string(res) + " above bound");
    s.residual_bound = res;
  }
  return s;
}

Spectrum compute_spectrum(const CarpetGraph& g, LaplacianKind kind, bool vectors) {
  return eigendecompose(assemble(g, kind), g.level(), g.sequence(), vectors);
}

namespace {
bool same_cluster(double a, double b, double rel_gap) {
  return std::abs(b - a) <= rel_gap * std::max({std::abs(a), std::abs(b), 1e-8});
}
}  // namespace

std::vector<std::pair<Eigen::Index, Eigen::Index>> eigenvalue_clusters(const Eigen::VectorXd& values,
                                                                       double rel_gap) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= values.size(); ++k) {
    if (k == values.size() || !same_cluster(values(k - 1), values(k), rel_gap)) {
      out.emplace_back(start, k);
      start = k;
    }
  }
  return out;
}

Eigen::Index multiplicity_at(const Eigen::VectorXd& values, Eigen::Index k, double rel_gap) {
  for (auto [a, b] : eigenvalue_clusters(values, rel_gap))
    if (k >= a && k < b) return b - a;
  throw ConfigError("eigenvalue index out of range");
}

RenormalizationEstimate estimate_R(const Spectrum& coarse, const Spectrum& fine, int count) {
  if (count < 1 || coarse.size() <= count || fine.size() <= count)
    throw ConfigError("not enough eigenvalues to estimate R");
  RenormalizationEstimate est;
  double sum = 0.0;
  for (int k = 1; k <= count; ++k) {
    const double lf = fine.eigenvalues(k);
    if (!(lf > 0)) throw NumericError("non-positive fine eigenvalue in R estimate");
    est.ratios.push_back(coarse.eigenvalues(k) / lf);
    sum += est.ratios.back();
    if (multiplicity_at(coarse.eigenvalues, k) != multiplicity_at(fine.eigenvalues, k)) est.aligned = false;
  }
  est.R = sum / count;
  return est;
}

double weyl_exponent(double R) {
  if (!(R > 1.0)) throw ConfigError("R must exceed 1");
  return std::log(8.0) / std::log(R);
}

std::size_t counting_function(const Spectrum& s, double t) {
  const auto* b = s.eigenvalues.data();
  return static_cast<std::size_t>(std::upper_bound(b, b + s.size(), t) - b);
}

std::vector<WeylRow> counting_and_weyl(const Spectrum& s, double R) {
  const double alpha = weyl_exponent(R);
  std::vector<WeylRow> rows;
  for (auto [a, b] : eigenvalue_clusters(s.eigenvalues)) {
    const double t = s.eigenvalues(b - 1);
    if (t <= 1e-12) continue;
    WeylRow row;
    row.t = t;
    row.N = static_cast<std::size_t>(b);
    row.W = static_cast<double>(row.N) / std::pow(t, alpha);
    rows.push_back(row);
  }
  return rows;
}

double boundary_mass_fraction(const CarpetGraph& g, const std::vector<std::size_t>& cells,
                              const Eigen::Ref<const Eigen::VectorXd>& v, int width) {
  const auto dist = distance_to_boundary(g);
  double near = 0.0, total = 0.0;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const double w = v(static_cast<Eigen::Index>(r)) * v(static_cast<Eigen::Index>(r));
    total += w;
    const int d = dist[cells[r]];
    if (d >= 0 && d <= width) near += w;
  }
  return total > 0 ? near / total : 0.0;
}

std::vector<double> boundary_decay_scan(const CarpetGraph& g, const Spectrum& s, int width, int k_max) {
  if (s.kind != LaplacianKind::NormalizedDirichlet) throw ConfigError("boundary scan needs a Dirichlet spectrum");
  if (!s.has_vectors()) throw ConfigError("boundary scan needs eigenvectors");
  if (width < 1) throw ConfigError("width must be positive");
  const auto dist = distance_to_boundary(g);
  const int kk = std::min<int>(k_max, static_cast<int>(s.size()));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(kk));
  for (int k = 0; k < kk; ++k) {
    const auto col = s.eigenvectors.col(k);
    double near = 0.0;
    for (std::size_t r = 0; r < s.cells.size(); ++r) {
      const int d = dist[s.cells[r]];
      if (d >= 0 && d <= width) near += col(static_cast<Eigen::Index>(r)) * col(static_cast<Eigen::Index>(r));
    }
    out.push_back(near / col.squaredNorm());
  }
  return out;
}

}  // namespace carpet
