#include "carpet/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "carpet/metric.hpp"

namespace carpet {

namespace {

void need_vectors(const Spectrum& s) {
  if (!s.has_vectors()) throw ConfigError("kernel evaluation needs eigenvectors");
}

void check_row(const Spectrum& s, Eigen::Index r) {
  if (r < 0 || r >= s.size()) throw ConfigError("cell is not a row of the spectrum");
}

Eigen::ArrayXd heat_weights(const Spectrum& s, double t) {
  if (!(t >= 0)) throw ConfigError("time must be non-negative");
  return (-s.eigenvalues.array() * t).exp();
}

double frequency(double lambda, WaveFrequency f) {
  return f == WaveFrequency::Linear ? lambda : std::sqrt(std::max(lambda, 0.0));
}

// sin(w t) / w with the w -> 0 limit t
double sinc_weight(double w, double t) { return std::abs(w) < 1e-14 ? t : std::sin(w * t) / w; }

Eigen::ArrayXd wave_weights(const Spectrum& s, double t, WaveFrequency f) {
  Eigen::ArrayXd w(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) w(k) = sinc_weight(frequency(s.eigenvalues(k), f), t);
  return w;
}

Eigen::ArrayXd wave_derivative_weights(const Spectrum& s, double t, WaveFrequency f) {
  Eigen::ArrayXd w(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) w(k) = std::cos(frequency(s.eigenvalues(k), f) * t);
  return w;
}

double weighted_entry(const Spectrum& s, const Eigen::ArrayXd& w, Eigen::Index x, Eigen::Index y) {
  need_vectors(s);
  check_row(s, x);
  check_row(s, y);
  return (s.eigenvectors.row(x).array() * s.eigenvectors.row(y).array() * w.transpose()).sum();
}

Eigen::MatrixXd weighted_matrix(const Spectrum& s, const Eigen::ArrayXd& w) {
  need_vectors(s);
  return s.eigenvectors * w.matrix().asDiagonal() * s.eigenvectors.transpose();
}

}  // namespace

double heat_kernel(const Spectrum& s, double t, Eigen::Index x, Eigen::Index y) {
  return weighted_entry(s, heat_weights(s, t), x, y);
}

Eigen::VectorXd heat_column(const Spectrum& s, double t, Eigen::Index y) {
  need_vectors(s);
  check_row(s, y);
  const Eigen::VectorXd c = heat_weights(s, t) * s.eigenvectors.row(y).transpose().array();
  return s.eigenvectors * c;
}

Eigen::MatrixXd heat_matrix(const Spectrum& s, double t) { return weighted_matrix(s, heat_weights(s, t)); }

SlopeFit diagonal_slope(const Spectrum& s, Eigen::Index x, const SlopeWindow& w) {
  need_vectors(s);
  check_row(s, x);
  if (w.samples < 2 || !(w.hi > w.lo)) throw ConfigError("slope window needs two distinct samples");
  if (!(w.log_base > 1.0) || !(w.time_scale > 0.0)) throw ConfigError("bad slope window base or time scale");
  const Eigen::ArrayXd u2 = s.eigenvectors.row(x).transpose().array().square();
  const double ln_base = std::log(w.log_base);

  SlopeFit fit;
  fit.window = w;
  const double step = (w.hi - w.lo) / (w.samples - 1);
  for (int k = 0; k < w.samples; ++k) {
    const double lt = w.lo + step * k;
    const double t = w.time_scale * std::exp(lt * ln_base);
    const double h = (u2 * (-s.eigenvalues.array() * t).exp()).sum();
    if (!(h > 1e-300)) {
      fit.shrunk = true;
      break;
    }
    fit.log_t.push_back(lt);
    fit.log_h.push_back(std::log(h) / ln_base);
  }
  const auto n = fit.log_t.size();
  if (n < 2) throw NumericError("heat diagonal underflows across the whole fit window");
  fit.window.hi = fit.log_t.back();
  fit.window.samples = static_cast<int>(n);

  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += fit.log_t[k];
    my += fit.log_h[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxy += (fit.log_t[k] - mx) * (fit.log_h[k] - my);
    sxx += (fit.log_t[k] - mx) * (fit.log_t[k] - mx);
  }
  fit.beta = -sxy / sxx;
  return fit;
}

ProfileMode parse_profile_mode(std::string_view s) {
  if (s == "line") return ProfileMode::Line;
  if (s == "shell") return ProfileMode::Shell;
  if (s == "full") return ProfileMode::Full;
  throw ConfigError("unknown profile mode '" + std::string(s) + "'");
}

std::vector<double> KernelSeries::shell_maxima() const {
  std::vector<double> out;
  for (const auto& p : samples) {
    if (p.distance < 0) continue;
    const auto d = static_cast<std::size_t>(p.distance);
    if (out.size() <= d) out.resize(d + 1, std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(out[d]) || p.value > out[d]) out[d] = p.value;
  }
  return out;
}

KernelSeries off_diagonal_profile(const CarpetGraph& g, const Spectrum& s, std::size_t base_cell, double t,
                                  ProfileMode mode) {
  const auto y = s.row_of(base_cell);
  if (!y) throw ConfigError("base cell " + format_addr(g.cell(base_cell)) + " is not in the spectrum");
  const Eigen::VectorXd col = heat_column(s, t, *y);
  const auto dist = bfs_distances(g, base_cell);

  KernelSeries out;
  out.base = base_cell;
  out.t = t;
  out.mode = mode;
  auto push = [&](std::size_t cell) {
    const auto r = s.row_of(cell);
    if (!r) return false;
    const double v = col(*r);
    out.samples.push_back({cell, dist[cell], v, std::abs(v) < kNoiseFloor});
    return true;
  };

  if (mode == ProfileMode::Line) {
    const auto& a = g.cell(base_cell);
    std::int64_t lo = a.i;
    while (lo > 0) {
      auto c = g.index_of(lo - 1, a.j);
      if (!c || !s.row_of(*c)) break;
      --lo;
    }
    for (std::int64_t i = lo; i < g.side(); ++i) {
      auto c = g.index_of(i, a.j);
      if (!c || !push(*c)) break;
    }
    return out;
  }
  for (std::size_t c : s.cells) push(c);
  if (mode == ProfileMode::Shell)
    std::stable_sort(out.samples.begin(), out.samples.end(),
                     [](const KernelSample& p, const KernelSample& q) { return p.distance < q.distance; });
  return out;
}

DecayFit fit_decay_exponent(const std::vector<double>& envelope) {
  DecayFit fit;
  if (envelope.empty() || !(envelope[0] > 0)) return fit;
  const double v0 = envelope[0];
  std::vector<double> xs, ys;
  for (std::size_t r = 1; r < envelope.size(); ++r) {
    const double v = envelope[r];
    if (!(v > kNoiseFloor) || !(v < v0)) continue;
    xs.push_back(std::log(static_cast<double>(r)));
    ys.push_back(std::log(-std::log(v / v0)));
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 2) return fit;
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= fit.points;
  my /= fit.points;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  fit.gamma = sxx > 0 ? sxy / sxx : 0.0;
  return fit;
}

double wave_propagator(const Spectrum& s, double t, Eigen::Index x, Eigen::Index y, WaveFrequency f) {
  return weighted_entry(s, wave_weights(s, t, f), x, y);
}

double wave_time_derivative(const Spectrum& s, double t, Eigen::Index x, Eigen::Index y, WaveFrequency f) {
  return weighted_entry(s, wave_derivative_weights(s, t, f), x, y);
}

Eigen::MatrixXd wave_matrix(const Spectrum& s, double t, WaveFrequency f) {
  return weighted_matrix(s, wave_weights(s, t, f));
}

Eigen::MatrixXd wave_derivative_matrix(const Spectrum& s, double t, WaveFrequency f) {
  return weighted_matrix(s, wave_derivative_weights(s, t, f));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> wave_solution(const Spectrum& s, const Eigen::VectorXd& f0,
                                                          const Eigen::VectorXd& g0, double t, WaveFrequency f) {
  need_vectors(s);
  if (f0.size() != s.size() || g0.size() != s.size()) throw ConfigError("initial data has the wrong length");
  const Eigen::ArrayXd a = (s.eigenvectors.transpose() * f0).array();
  const Eigen::ArrayXd b = (s.eigenvectors.transpose() * g0).array();
  Eigen::ArrayXd c(s.size()), ct(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const double w = frequency(s.eigenvalues(k), f);
    c(k) = a(k) * std::cos(w * t) + b(k) * sinc_weight(w, t);
    ct(k) = -a(k) * w * std::sin(w * t) + b(k) * std::cos(w * t);
  }
  return {s.eigenvectors * c.matrix(), s.eigenvectors * ct.matrix()};
}

double wave_energy(const Spectrum& s, const Eigen::VectorXd& u, const Eigen::VectorXd& ut, WaveFrequency f) {
  need_vectors(s);
  const Eigen::ArrayXd a = (s.eigenvectors.transpose() * u).array();
  double e = ut.squaredNorm();
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const double w = frequency(s.eigenvalues(k), f);
    e += w * w * a(k) * a(k);
  }
  return e;
}

}  // namespace carpet
