#pragma once

#include <Eigen/Dense>
#include <array>
#include <string_view>

#include "carpet/spectral.hpp"

namespace carpet {

enum class Reflection : std::uint8_t { Identity, FlipH, FlipV, FlipBoth };

/// pattern[by][bx] is the reflection applied on sub-copy (bx, by); the
/// centre entry is unused.
using TilePattern = std::array<std::array<Reflection, 3>, 3>;

TilePattern tile_pattern(IdentType t);

/// Row-major rank of every lattice square at level m, -1 on vacant squares.
std::vector<std::int32_t> cell_rank_table(int m);

struct TiledFunction {
  int source_level = 0;
  int target_level = 0;
  Eigen::VectorXd values;  // indexed by glued cell order at target_level
};

/// Copies a level-m function onto the 8 sub-copies of level m+1.
TiledFunction tile_with_pattern(const Eigen::VectorXd& u, int m, const TilePattern& pattern);
TiledFunction tile_eigenfunction(const Eigen::VectorXd& u, int m, IdentType type);

/// ||L v - lambda v|| / ||v|| for the combinatorial glued Laplacian of g.
double eigen_residual(const CarpetGraph& g, const Eigen::VectorXd& v, double lambda);

/// Mean over the 8 level-m cells inside each level-(m-1) cell.
Eigen::VectorXd average_down(const Eigen::VectorXd& u, int m);

enum class RefinementCategory : std::uint8_t { Ok, ZeroAverage, ZeroProjection };
std::string_view to_string(RefinementCategory c);

struct RefinementScore {
  RefinementCategory category = RefinementCategory::Ok;
  double matched_lambda = 0.0;
  double residual = 0.0;  // ||ubar - proj ubar|| / ||ubar||, in [0, 1]
};

/// Averages u down a level and compares it with the closest eigenspace of
/// the coarse glued spectrum. `coarse` must carry eigenvectors.
RefinementScore refinement_score(const Eigen::VectorXd& u, const CarpetGraph& coarse_graph, const Spectrum& coarse);

/// Tiling iterated up to window level M; values in glued cell order at level M.
Eigen::VectorXd periodic_extension(const Eigen::VectorXd& u, int m, IdentType type, int M);

/// Worst |L v - lambda v| over cells of an unglued window at distance >= min_distance
/// from its outer ring.
double window_eigen_residual(const CarpetGraph& window, const Eigen::VectorXd& v, double lambda, int min_distance = 2);

/// sum over lambda_k in [a, b) of <f, u_k> u_k; f must vanish on the outer ring.
/// Both end points are compared with 1e-12 slack, so a computed -1e-15 counts as 0.
Eigen::VectorXd spectral_projection(const CarpetGraph& g, const Spectrum& s, const Eigen::VectorXd& f, double a,
                                    double b);

/// Matrix of the same projection acting on functions of every cell.
Eigen::MatrixXd projection_matrix(const Spectrum& s, double a, double b);

/// sum_k lambda_k <f, u_k> u_k.
Eigen::VectorXd spectral_laplacian(const CarpetGraph& g, const Spectrum& s, const Eigen::VectorXd& f);

/// Graph Laplacian sum (f(x) - f(y)) applied directly on a glued graph.
Eigen::VectorXd apply_laplacian(const CarpetGraph& g, const Eigen::VectorXd& f);

}  // namespace carpet
