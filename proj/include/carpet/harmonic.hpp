#pragma once

#include <Eigen/Sparse>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "carpet/topology.hpp"

namespace carpet {

/// Relative residual every solve must meet: ||Au - b|| <= tol ||b||.
inline constexpr double kSolveTolerance = 1e-10;
/// Systems up to this order use a sparse LDL^T factorization, larger ones CG.
inline constexpr Eigen::Index kDirectSolveLimit = 4096;

/// Combinatorial Laplacian 4I - A restricted to a set of free cells of an
/// unglued graph; slots pointing at fixed cells only contribute to the diagonal.
/// The factorization is read-only after construction.
class DirichletSystem {
 public:
  DirichletSystem(const CarpetGraph& g, std::vector<std::size_t> free_cells);
  ~DirichletSystem();
  DirichletSystem(DirichletSystem&&) noexcept;
  DirichletSystem& operator=(DirichletSystem&&) noexcept;

  /// Interior cells (everything off the outer ring) of g.
  static DirichletSystem interior(const CarpetGraph& g);

  const std::vector<std::size_t>& free_cells() const { return free_; }
  std::optional<Eigen::Index> position(std::size_t cell) const;
  const Eigen::SparseMatrix<double>& matrix() const { return A_; }
  bool is_direct() const;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Values on all cells: `fixed` supplies every non-free cell.
  std::vector<double> extend(const std::vector<double>& fixed) const;

 private:
  const CarpetGraph* g_;
  std::vector<std::size_t> free_;
  std::vector<Eigen::Index> pos_;  // cell -> position or -1
  Eigen::SparseMatrix<double> A_;
  struct Solver;
  std::unique_ptr<Solver> solver_;
};

/// Interior values with u(x) = mean of u over the 4 slots of x; boundary cells
/// keep the supplied values (vector indexed by cell, interior entries ignored).
std::vector<double> harmonic_extension(const CarpetGraph& g, const std::vector<double>& boundary_values);

/// x -> P(x, y) for a boundary cell y (all cells; P(y, y) = 1).
std::vector<double> poisson_kernel(const CarpetGraph& g, std::size_t y);

/// Resistance between interior cell x and the grounded outer ring with unit
/// conductance per slot: solve u(x) = 1, u = 0 on the ring, harmonic elsewhere,
/// then R = 1 / sum over slots of x of (1 - u(neighbor)).
double effective_resistance(const CarpetGraph& g, std::size_t x);

/// Resistance of every interior cell (NaN on the ring) from one factorization,
/// as the diagonal of the inverse Dirichlet Laplacian.
std::vector<double> resistance_profile(const CarpetGraph& g);

}  // namespace carpet
