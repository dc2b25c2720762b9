#pragma once

#include <Eigen/Dense>
#include <vector>

#include "carpet/spectral.hpp"

namespace carpet {

/// Kernel values with magnitude below this are reported as numerical noise.
inline constexpr double kNoiseFloor = 1e-30;

// Heat kernel H_t(x,y) = sum_i exp(-lambda_i t) u_i(x) u_i(y). Cells are spectrum rows.
double heat_kernel(const Spectrum& s, double t, Eigen::Index x, Eigen::Index y);
Eigen::VectorXd heat_column(const Spectrum& s, double t, Eigen::Index y);
Eigen::MatrixXd heat_matrix(const Spectrum& s, double t);

/// Fit window for diagonal slopes. Times in the window are multiplied by
/// time_scale before entering exp(-lambda t); with the normalized Dirichlet
/// spectrum, time_scale = 4 is heat flow for the combinatorial operator 4 - A.
/// The defaults reproduce the published diagonal slope table: natural log,
/// -1 <= log t <= 3, combinatorial time.
struct SlopeWindow {
  double lo = -1.0;
  double hi = 3.0;
  double log_base = 2.718281828459045;
  double time_scale = 4.0;
  int samples = 81;
};

/// Window as literally stated elsewhere: log10 t in [-1, 3], normalized time.
inline constexpr SlopeWindow kDecimalSlopeWindow{-1.0, 3.0, 10.0, 1.0, 81};

struct SlopeFit {
  double beta = 0.0;  // minus the least-squares slope of log H_t(x,x) against log t
  SlopeWindow window;
  bool shrunk = false;  // upper end pulled in to avoid underflow
  std::vector<double> log_t, log_h;
};

/// Power law for the diagonal over samples uniform in log t. The slope is
/// independent of the log base; only the window end points depend on it.
SlopeFit diagonal_slope(const Spectrum& s, Eigen::Index x, const SlopeWindow& w = {});

enum class ProfileMode : std::uint8_t { Line, Shell, Full };
ProfileMode parse_profile_mode(std::string_view s);

struct KernelSample {
  std::size_t cell = 0;  // graph cell index
  int distance = 0;      // BFS distance to the base cell
  double value = 0.0;
  bool noise = false;
};

struct KernelSeries {
  std::size_t base = 0;
  double t = 0.0;
  ProfileMode mode = ProfileMode::Full;
  std::vector<KernelSample> samples;

  /// Largest value at each distance; NaN where a shell is empty.
  std::vector<double> shell_maxima() const;
};

/// Line mode walks the maximal run of interior cells in the base cell's row;
/// shell and full modes cover every interior cell, shell sorted by distance.
KernelSeries off_diagonal_profile(const CarpetGraph& g, const Spectrum& s, std::size_t base_cell, double t,
                                  ProfileMode mode);

struct DecayFit {
  double gamma = 0.0;  // slope of log(-log(v/v0)) against log r
  int points = 0;
};

/// Stretched-exponential exponent of a shell envelope, shells r >= 1 that are
/// positive, below v0 and above the noise floor.
DecayFit fit_decay_exponent(const std::vector<double>& envelope);

enum class WaveFrequency : std::uint8_t {
  Linear,      // sin(lambda t) / lambda
  SquareRoot,  // sin(sqrt(lambda) t) / sqrt(lambda)
};

double wave_propagator(const Spectrum& s, double t, Eigen::Index x, Eigen::Index y,
                       WaveFrequency f = WaveFrequency::Linear);
double wave_time_derivative(const Spectrum& s, double t, Eigen::Index x, Eigen::Index y,
                            WaveFrequency f = WaveFrequency::Linear);
Eigen::MatrixXd wave_matrix(const Spectrum& s, double t, WaveFrequency f = WaveFrequency::Linear);
Eigen::MatrixXd wave_derivative_matrix(const Spectrum& s, double t, WaveFrequency f = WaveFrequency::Linear);

/// u(t) and du/dt for initial data u(0) = f0, u'(0) = g0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> wave_solution(const Spectrum& s, const Eigen::VectorXd& f0,
                                                          const Eigen::VectorXd& g0, double t,
                                                          WaveFrequency f = WaveFrequency::Linear);

/// <u', u'> + <u, w^2 u> with w the per-mode angular frequency.
double wave_energy(const Spectrum& s, const Eigen::VectorXd& u, const Eigen::VectorXd& ut,
                   WaveFrequency f = WaveFrequency::Linear);

}  // namespace carpet
