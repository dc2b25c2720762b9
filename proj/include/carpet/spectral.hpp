#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carpet/topology.hpp"

namespace carpet {

enum class LaplacianKind : std::uint8_t {
  /// u(x) - (1/4) sum u(y) on interior cells of an unglued graph, zero extension.
  NormalizedDirichlet,
  /// sum (f(x) - f(y)) over the four slots of every cell of a glued graph.
  CombinatorialGlued,
};

std::string_view to_string(LaplacianKind k);
LaplacianKind parse_laplacian_kind(std::string_view s);

/// Relative gap below which neighboring eigenvalues are one eigenspace.
inline constexpr double kClusterRelGap = 1e-7;
/// Required ||A v - lambda v|| for every computed eigenpair.
inline constexpr double kEigenResidualBound = 1e-8;

/// Graph cells spanned by the operator, in row order.
std::vector<std::size_t> operator_cells(const CarpetGraph& g, LaplacianKind kind);

struct LaplacianOperator {
  LaplacianKind kind;
  std::vector<std::size_t> cells;
  Eigen::SparseMatrix<double> matrix;
};

LaplacianOperator assemble(const CarpetGraph& g, LaplacianKind kind);

struct Spectrum {
  LaplacianKind kind = LaplacianKind::CombinatorialGlued;
  int m = 0;
  IdentSequence seq;
  std::vector<std::size_t> cells;
  Eigen::VectorXd eigenvalues;   // ascending, with multiplicity
  Eigen::MatrixXd eigenvectors;  // orthonormal columns; empty when values only
  std::optional<double> residual_bound;

  Eigen::Index size() const { return eigenvalues.size(); }
  bool has_vectors() const { return eigenvectors.cols() == eigenvalues.size() && eigenvalues.size() > 0; }
  /// Row of a graph cell, or nullopt for cells outside the operator.
  std::optional<Eigen::Index> row_of(std::size_t cell) const;
};

/// Dense symmetric decomposition (LAPACK divide and conquer). Eigenvectors are
/// sign-normalized so that the largest-magnitude entry is positive.
Spectrum eigendecompose(const LaplacianOperator& op, int m, const IdentSequence& seq, bool vectors = true);
Spectrum compute_spectrum(const CarpetGraph& g, LaplacianKind kind, bool vectors = true);

/// [first, last) index ranges of numerically equal eigenvalues.
std::vector<std::pair<Eigen::Index, Eigen::Index>> eigenvalue_clusters(const Eigen::VectorXd& values,
                                                                       double rel_gap = kClusterRelGap);
/// Size of the eigenspace containing index k.
Eigen::Index multiplicity_at(const Eigen::VectorXd& values, Eigen::Index k, double rel_gap = kClusterRelGap);

struct RenormalizationEstimate {
  double R = 0.0;
  std::vector<double> ratios;  // lambda_k(coarse) / lambda_k(fine), k = 1..count
  bool aligned = true;         // multiplicity blocks agree at every used index
};

/// Mean of lambda_k(coarse) / lambda_k(fine) for k = 1..count (lambda_0 excluded).
RenormalizationEstimate estimate_R(const Spectrum& coarse, const Spectrum& fine, int count = 10);

/// alpha = log 8 / log R.
double weyl_exponent(double R);

/// N(t) = #{lambda <= t}.
std::size_t counting_function(const Spectrum& s, double t);

struct WeylRow {
  double t = 0.0;
  std::size_t N = 0;
  double W = 0.0;
};

/// N and W = N / t^alpha sampled at each distinct positive eigenvalue
/// (N counts the whole eigenspace at t).
std::vector<WeylRow> counting_and_weyl(const Spectrum& s, double R);

/// Fraction of l2 mass of an interior vector on cells within graph distance
/// `width` of the outer ring (the ring itself carries no Dirichlet mass).
double boundary_mass_fraction(const CarpetGraph& g, const std::vector<std::size_t>& cells,
                              const Eigen::Ref<const Eigen::VectorXd>& v, int width);

/// Near-boundary mass fraction for each of the first k_max eigenfunctions of
/// a NormalizedDirichlet spectrum.
std::vector<double> boundary_decay_scan(const CarpetGraph& g, const Spectrum& s, int width, int k_max);

/// max_k ||A v_k - lambda_k v_k||.
double max_residual(const LaplacianOperator& op, const Spectrum& s);

}  // namespace carpet
