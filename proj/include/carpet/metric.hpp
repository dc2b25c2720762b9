#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "carpet/oracle.hpp"
#include "carpet/topology.hpp"

namespace carpet {

/// Thrown when a ball computation would reach the edge of the oracle window.
class WindowTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kUnreached = -1;

/// Geodesic distances from source, exact for every cell within `limit` steps
/// (limit < 0: unbounded). Unreached cells hold kUnreached.
std::vector<int> bfs_distances(const CarpetGraph& g, std::size_t source, int limit = -1);

/// Multi-source BFS from the outer ring of an unglued graph.
std::vector<int> distance_to_boundary(const CarpetGraph& g);

/// Max BFS distance from cell; throws NumericError when the graph is disconnected.
int eccentricity(const CarpetGraph& g, std::size_t cell);

/// Cardinalities of strict balls B(x, r) = {y : d(x, y) < r}.
struct BallSeries {
  ExtAddr source;
  int window_level = 0;
  std::vector<std::int64_t> counts;  // counts[r - 1] = #B(source, r), r = 1..r_max

  int r_max() const { return static_cast<int>(counts.size()); }
  std::int64_t count(int r) const { return counts.at(static_cast<std::size_t>(r - 1)); }
  double ratio(int r) const { return static_cast<double>(count(r)) / (static_cast<double>(r) * r * r); }
};

/// Closed-form torus/Klein crossing length: r_m = 2^(m+2) - 6 (meaningful for m >= 2).
std::int64_t crossing_length(int m);
/// R_0 = 0, R_{m+1} = max(2 R_m + 3, 2 R_m + 2^m + 1).
std::int64_t projective_reach(int m);

struct GrowthSequences {
  std::vector<std::int64_t> r;  // r[m - 2] = r_m for m = 2..m_max
  std::vector<std::int64_t> R;  // R[m] for m = 0..m_max
};
GrowthSequences growth_sequences(int m_max);

/// Smallest window level whose crossing bound covers radius r: 2^(M+2) - 6 >= 2r
/// for torus/Klein, R_M >= 2r when projective identifications occur.
int recommended_window_level(int r, bool projective);

/// Ball series over the blowup restricted to window `window_level`. Throws
/// WindowTooSmall if any cell at distance < r_max has a neighbor outside.
BallSeries ball_series(const BlowupOracle& oracle, ExtAddr source, int r_max, int window_level);
/// Starts at recommended_window_level and grows the window until the ball fits.
BallSeries ball_series_fitted(const BlowupOracle& oracle, ExtAddr source, int r_max, bool projective);

/// Copies of V_m (block units of side 3^m in a window) touched by the ball
/// B(source, 2^m), together with the copies sharing a corner vertex with the
/// source's copy after all identifications.
struct CornerShareReport {
  std::size_t sharing_copies = 0;   // including the source copy
  std::size_t visited_copies = 0;
  bool ball_inside_sharing = true;  // every visited copy shares a corner
};
CornerShareReport corner_share_check(const BlowupOracle& oracle, ExtAddr source, int m, int window_level);

}  // namespace carpet
