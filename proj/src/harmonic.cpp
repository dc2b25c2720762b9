#include "carpet/harmonic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>

namespace carpet {

struct DirichletSystem::Solver {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> direct;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  bool use_direct = true;
};

DirichletSystem::DirichletSystem(const CarpetGraph& g, std::vector<std::size_t> free_cells)
    : g_(&g), free_(std::move(free_cells)), pos_(g.cell_count(), -1), solver_(std::make_unique<Solver>()) {
  if (g.kind() != GraphKind::Unglued) throw ConfigError("Dirichlet systems need an unglued graph");
  for (std::size_t k = 0; k < free_.size(); ++k) pos_[free_[k]] = static_cast<Eigen::Index>(k);
  const auto n = static_cast<Eigen::Index>(free_.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(free_.size() * 5);
  for (std::size_t k = 0; k < free_.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    double diag = 0.0;
    for (auto s : g.slots(free_[k])) {
      if (s == kMissing) throw ConfigError("free cell with a missing slot (ring cells must be fixed)");
      diag += 1.0;
      const auto p = pos_[static_cast<std::size_t>(s)];
      if (p >= 0) trips.emplace_back(row, p, -1.0);
    }
    trips.emplace_back(row, row, diag);
  }
  A_.resize(n, n);
  A_.setFromTriplets(trips.begin(), trips.end());
  A_.makeCompressed();
  solver_->use_direct = n <= kDirectSolveLimit;
  if (solver_->use_direct) {
    solver_->direct.compute(A_);
    if (solver_->direct.info() != Eigen::Success) throw NumericError("Dirichlet factorization failed (singular?)");
  } else {
    solver_->cg.setTolerance(kSolveTolerance * 1e-2);
    solver_->cg.setMaxIterations(20 * n);
    solver_->cg.compute(A_);
  }
}

DirichletSystem::~DirichletSystem() = default;
DirichletSystem::DirichletSystem(DirichletSystem&&) noexcept = default;
DirichletSystem& DirichletSystem::operator=(DirichletSystem&&) noexcept = default;

DirichletSystem DirichletSystem::interior(const CarpetGraph& g) {
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < g.cell_count(); ++k) {
    if (!g.is_boundary(k)) free.push_back(k);
  }
  return DirichletSystem(g, std::move(free));
}

std::optional<Eigen::Index> DirichletSystem::position(std::size_t cell) const {
  auto p = pos_.at(cell);
  return p < 0 ? std::nullopt : std::optional<Eigen::Index>(p);
}

bool DirichletSystem::is_direct() const { return solver_->use_direct; }

Eigen::VectorXd DirichletSystem::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd u = solver_->use_direct ? Eigen::VectorXd(solver_->direct.solve(rhs))
                                          : Eigen::VectorXd(solver_->cg.solve(rhs));
  const double bnorm = rhs.norm();
  const double res = (A_ * u - rhs).norm();
  if (!(res <= kSolveTolerance * std::max(bnorm, std::numeric_limits<double>::min()))) {
    if (bnorm == 0.0 && res == 0.0) return u;
    throw NumericError("Dirichlet solve missed the residual tolerance");
  }
  return u;
}

std::vector<double> DirichletSystem::extend(const std::vector<double>& fixed) const {
  if (fixed.size() != g_->cell_count()) throw ConfigError("boundary data must be indexed by cell");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) {
    for (auto s : g_->slots(free_[k])) {
      if (pos_[static_cast<std::size_t>(s)] < 0) b[static_cast<Eigen::Index>(k)] += fixed[static_cast<std::size_t>(s)];
    }
  }
  std::vector<double> out = fixed;
  if (b.norm() == 0.0) {
    for (auto c : free_) out[c] = 0.0;
    return out;
  }
  const Eigen::VectorXd u = solve(b);
  for (std::size_t k = 0; k < free_.size(); ++k) out[free_[k]] = u[static_cast<Eigen::Index>(k)];
  return out;
}

std::vector<double> harmonic_extension(const CarpetGraph& g, const std::vector<double>& boundary_values) {
  return DirichletSystem::interior(g).extend(boundary_values);
}

std::vector<double> poisson_kernel(const CarpetGraph& g, std::size_t y) {
  if (y >= g.cell_count() || !g.is_boundary(y)) throw ConfigError("Poisson kernel base must be a boundary cell");
  std::vector<double> data(g.cell_count(), 0.0);
  data[y] = 1.0;
  return harmonic_extension(g, data);
}

double effective_resistance(const CarpetGraph& g, std::size_t x) {
  if (x >= g.cell_count() || g.is_boundary(x)) throw ConfigError("resistance source must be an interior cell");
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < g.cell_count(); ++k) {
    if (!g.is_boundary(k) && k != x) free.push_back(k);
  }
  std::vector<double> fixed(g.cell_count(), 0.0);
  fixed[x] = 1.0;
  const auto u = DirichletSystem(g, std::move(free)).extend(fixed);
  double current = 0.0;
  for (auto s : g.slots(x)) current += 1.0 - u[static_cast<std::size_t>(s)];
  return 1.0 / current;
}

std::vector<double> resistance_profile(const CarpetGraph& g) {
  const auto sys = DirichletSystem::interior(g);
  std::vector<double> out(g.cell_count(), std::numeric_limits<double>::quiet_NaN());
  const auto n = static_cast<Eigen::Index>(sys.free_cells().size());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    e[k] = 1.0;
    out[sys.free_cells()[static_cast<std::size_t>(k)]] = sys.solve(e)[k];
    e[k] = 0.0;
  }
  return out;
}

}  // namespace carpet
