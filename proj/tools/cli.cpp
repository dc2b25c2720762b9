#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "carpet/csv.hpp"
#include "carpet/harmonic.hpp"
#include "carpet/kernels.hpp"
#include "carpet/metric.hpp"
#include "carpet/multiscale.hpp"
#include "carpet/random_walk.hpp"
#include "carpet/spectrum_io.hpp"

namespace carpet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Options that steer where results go but never what they are; kept out of
// the config hash so moving the output directory leaves CSVs byte-identical.
const std::set<std::string> kUnhashed = {"help", "config", "out", "cache", "cache-file", "threads"};

struct Context {
  std::string command;
  std::string hash;
  fs::path out = ".";
  std::string cache;
  std::string cache_file;
  unsigned threads = 0;
  std::ostream* log = nullptr;

  std::ofstream open(const std::string& name) const {
    fs::create_directories(out);
    std::ofstream os(out / name, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + (out / name).string());
    return os;
  }

  std::string comment(std::string_view note = {}) const {
    std::string c = "config_hash=" + hash + " command=" + command;
    if (!note.empty()) c += " " + std::string(note);
    return c;
  }

  void write_json(const std::string& name, const json& j) const {
    auto os = open(name);
    os << j.dump(2) << '\n';
  }
};

struct SeqArgs {
  std::string seq = "TTTTT";
  int m = -1;

  IdentSequence resolve() {
    auto s = IdentSequence::parse(seq);
    if (m < 0) m = static_cast<int>(s.size()) - 1;
    if (static_cast<int>(s.size()) != m + 1)
      throw ConfigError("sequence " + seq + " has " + std::to_string(s.size()) + " entries, level " +
                        std::to_string(m) + " needs " + std::to_string(m + 1));
    if (m < 1 || m > 8) throw ConfigError("level must be in 1..8");
    return s;
  }
  std::string tag() const { return "m" + std::to_string(m) + "_" + IdentSequence::parse(seq).to_string(); }
};

void add_seq(CLI::App* app, SeqArgs& a, const std::string& def = "TTTTT") {
  a.seq = def;
  app->add_option("--seq", a.seq, "identification sequence, entry 0 = outer boundary (e.g. TPKhKvT)");
  app->add_option("--m", a.m, "level; defaults to length of --seq minus one");
}

std::size_t cell_of(const CarpetGraph& g, const std::string& text) {
  std::int64_t i = 0, j = 0;
  if (!text.empty() && text.front() == '(') {
    const auto a = parse_addr(text);
    if (a.m != g.level()) throw ConfigError("address " + text + " is not a level-" + std::to_string(g.level()) + " address");
    i = a.i;
    j = a.j;
  } else {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigError("cell must be (base3,base3) or i,j: " + text);
    try {
      i = std::stoll(text.substr(0, comma));
      j = std::stoll(text.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad cell " + text);
    }
  }
  if (i < 0 || j < 0 || i >= g.side() || j >= g.side()) throw ConfigError("cell " + text + " outside the carpet");
  auto c = g.index_of(i, j);
  if (!c) throw ConfigError("cell " + text + " is a vacant square");
  return *c;
}

ExtAddr parse_ext(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("expected x,y: " + text);
  try {
    return {std::stoll(text.substr(0, comma)), std::stoll(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ConfigError("bad coordinates " + text);
  }
}

std::string kind_tag(LaplacianKind k) { return k == LaplacianKind::CombinatorialGlued ? "glued" : "dirichlet"; }

Spectrum obtain_spectrum(const Context& ctx, const CarpetGraph& g, LaplacianKind kind, bool vectors) {
  fs::path path;
  if (!ctx.cache_file.empty()) {
    path = ctx.cache_file;
  } else if (!ctx.cache.empty()) {
    path = fs::path(ctx.cache) / cache_file_name(g.level(), g.sequence(), kind);
  }
  if (!path.empty() && fs::exists(path)) {
    if (auto s = load_spectrum(path, g, kind, vectors)) {
      *ctx.log << "loaded spectrum cache " << path.string() << '\n';
      return std::move(*s);
    }
  }
  auto s = compute_spectrum(g, kind, vectors);
  if (!path.empty()) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_spectrum(path, s);
  }
  return s;
}

IdentType uniform_type(const std::string& t) { return parse_ident_type(t); }

// ---------------------------------------------------------------- build

struct BuildArgs {
  SeqArgs seq;
  std::string kind = "glued";
};

void cmd_build(const Context& ctx, BuildArgs& a) {
  const auto s = a.seq.resolve();
  if (a.kind != "glued" && a.kind != "unglued") throw ConfigError("--kind must be glued or unglued");
  const auto g = build_graph(a.seq.m, s, a.kind == "glued" ? GraphKind::Glued : GraphKind::Unglued);
  auto os = ctx.open("graph_" + a.kind + "_" + a.seq.tag() + ".csv");
  os << "# " << ctx.comment("missing=-1") << '\n';
  g.write_csv(os);
  *ctx.log << "cells=" << g.cell_count() << " boundary=" << g.boundary_count() << '\n';
}

// ---------------------------------------------------------------- balls

struct BallArgs {
  std::string type = "T";
  int r_max = 64;
  std::string source = "0,0";
  int window = 0;
};

void cmd_balls(const Context& ctx, BallArgs& a) {
  const auto t = uniform_type(a.type);
  if (a.r_max < 1) throw ConfigError("--rmax must be positive");
  const auto oracle = BlowupOracle::uniform(t);
  const auto series = a.window > 0 ? ball_series(oracle, parse_ext(a.source), a.r_max, a.window)
                                   : ball_series_fitted(oracle, parse_ext(a.source), a.r_max, t == IdentType::Projective);
  const int level = series.window_level;
  auto os = ctx.open("balls_" + std::string(to_string(t)) + ".csv");
  CsvWriter csv(os, ctx.comment("radius=strict window_level=" + std::to_string(level)), {"r", "count", "count_over_r3"});
  for (int r = 1; r <= series.r_max(); ++r) csv.row() << r << series.count(r) << series.ratio(r);
}

// ---------------------------------------------------------------- walk

struct WalkArgs {
  std::string type = "T";
  std::uint64_t trials = 1000;
  std::uint64_t max_length = 500000;
  std::uint64_t seed = 1;
  std::string start = "0,0";
};

void cmd_walk(const Context& ctx, WalkArgs& a) {
  WalkConfig c;
  c.ident = uniform_type(a.type);
  c.trials = a.trials;
  c.max_length = a.max_length;
  c.master_seed = a.seed;
  c.start = parse_ext(a.start);
  c.validate();
  const auto stats = run_batch(c, ctx.threads);
  const std::string tag = std::string(to_string(c.ident));

  {
    auto os = ctx.open("walk_" + tag + ".csv");
    CsvWriter csv(os, ctx.comment(), {"trial_index", "outcome", "return_length"});
    for (std::size_t k = 0; k < stats.trials.size(); ++k) {
      const auto& r = stats.trials[k];
      if (r.recurrent)
        csv.row() << static_cast<std::uint64_t>(k) << "recurrent" << r.length;
      else
        csv.row() << static_cast<std::uint64_t>(k) << "transient" << "";
    }
  }
  {
    auto os = ctx.open("walk_" + tag + "_hist.csv");
    CsvWriter csv(os, ctx.comment(), {"log10_length_bin", "count"});
    for (const auto& [bin, n] : stats.log_histogram()) csv.row() << bin << n;
  }
  json summary = {{"ident", tag},
                  {"trials", c.trials},
                  {"recurrent", stats.recurrent_count},
                  {"transient", stats.transient_count},
                  {"recurrent_fraction", stats.recurrent_fraction()},
                  {"odd_returns", stats.odd_returns},
                  {"even_returns", stats.even_returns},
                  {"config_hash", ctx.hash}};
  ctx.write_json("walk_" + tag + "_summary.json", summary);
  *ctx.log << summary.dump() << '\n';
}

// ---------------------------------------------------------------- resistance

void cmd_resistance(const Context& ctx, SeqArgs& a) {
  const auto s = a.resolve();
  const auto g = build_unglued(a.m, s);
  const auto prof = resistance_profile(g);
  const auto dist = distance_to_boundary(g);
  auto os = ctx.open("resistance_" + a.tag() + ".csv");
  CsvWriter csv(os, ctx.comment("unit conductance per slot"), {"cell_index", "addr", "distance_to_boundary", "resistance"});
  double best = -1;
  int best_d = 0, max_d = 0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (g.is_boundary(c)) continue;
    csv.row() << static_cast<std::uint64_t>(c) << format_addr(g.cell(c)) << dist[c] << prof[c];
    max_d = std::max(max_d, dist[c]);
    if (prof[c] > best) {
      best = prof[c];
      best_d = dist[c];
    }
  }
  json summary = {{"max_resistance", best},
                  {"argmax_distance", best_d},
                  {"max_distance", max_d},
                  {"hill_ratio", max_d > 0 ? static_cast<double>(best_d) / max_d : 0.0},
                  {"config_hash", ctx.hash}};
  ctx.write_json("resistance_" + a.tag() + "_summary.json", summary);
  *ctx.log << summary.dump() << '\n';
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
  SeqArgs seq;
  std::string kind = "glued";
  bool values_only = false;
  int dump_vectors = 0;
  double weyl_R = 0.0;
};

void write_weyl(const Context& ctx, const std::string& name, const Spectrum& s, double R) {
  auto os = ctx.open(name);
  CsvWriter csv(os, ctx.comment("R=" + format_double(R) + " alpha=" + format_double(weyl_exponent(R))),
                {"t", "N", "W", "ln_t", "ln_N", "ln_W", "log10_t", "log10_N", "log10_W"});
  for (const auto& r : counting_and_weyl(s, R)) {
    const double n = static_cast<double>(r.N);
    csv.row() << r.t << static_cast<std::uint64_t>(r.N) << r.W << std::log(r.t) << std::log(n) << std::log(r.W)
              << std::log10(r.t) << std::log10(n) << std::log10(r.W);
  }
}

void cmd_spectrum(const Context& ctx, SpectrumArgs& a) {
  const auto seq = a.seq.resolve();
  const auto kind = parse_laplacian_kind(a.kind);
  const auto g = build_graph(a.seq.m, seq, kind == LaplacianKind::CombinatorialGlued ? GraphKind::Glued : GraphKind::Unglued);
  const bool vectors = !a.values_only || a.dump_vectors > 0;
  const auto s = obtain_spectrum(ctx, g, kind, vectors);
  const std::string tag = kind_tag(kind) + "_" + a.seq.tag();
  {
    auto os = ctx.open("spectrum_" + tag + ".csv");
    CsvWriter csv(os, ctx.comment(), {"k", "eigenvalue", "multiplicity"});
    const auto clusters = eigenvalue_clusters(s.eigenvalues);
    for (auto [lo, hi] : clusters)
      for (auto k = lo; k < hi; ++k) csv.row() << static_cast<std::int64_t>(k) << s.eigenvalues(k) << static_cast<std::int64_t>(hi - lo);
  }
  if (a.dump_vectors > 0) {
    auto os = ctx.open("eigenvectors_" + tag + ".csv");
    CsvWriter csv(os, ctx.comment(), {"k", "i", "j", "value"});
    const auto n = std::min<Eigen::Index>(a.dump_vectors, s.size());
    for (Eigen::Index k = 0; k < n; ++k)
      for (std::size_t r = 0; r < s.cells.size(); ++r) {
        const auto& c = g.cell(s.cells[r]);
        csv.row() << static_cast<std::int64_t>(k) << c.i << c.j << s.eigenvectors(static_cast<Eigen::Index>(r), k);
      }
  }
  if (a.weyl_R > 0) write_weyl(ctx, "weyl_" + tag + ".csv", s, a.weyl_R);
  json summary = {{"count", s.size()}, {"config_hash", ctx.hash}};
  summary["residual_bound"] = s.residual_bound ? json(*s.residual_bound) : json();
  *ctx.log << summary.dump() << '\n';
}

// ---------------------------------------------------------------- dirichlet-scan

struct ScanArgs {
  SeqArgs seq;
  std::vector<int> widths{1, 3, 9};
  int k_max = 150;
  double threshold = 1e-3;
};

void cmd_dirichlet_scan(const Context& ctx, ScanArgs& a) {
  const auto seq = a.seq.resolve();
  const auto g = build_unglued(a.seq.m, seq);
  const auto s = obtain_spectrum(ctx, g, LaplacianKind::NormalizedDirichlet, true);
  auto os = ctx.open("dirichlet_scan_" + a.seq.tag() + ".csv");
  CsvWriter csv(os, ctx.comment("threshold=" + format_double(a.threshold)),
                {"k", "eigenvalue", "width", "mass_fraction", "below_threshold"});
  json summary = json::array();
  for (int w : a.widths) {
    const auto scan = boundary_decay_scan(g, s, w, a.k_max);
    int below = 0;
    for (std::size_t k = 0; k < scan.size(); ++k) {
      const bool b = scan[k] < a.threshold;
      below += b;
      csv.row() << static_cast<std::uint64_t>(k) << s.eigenvalues(static_cast<Eigen::Index>(k)) << w << scan[k] << (b ? 1 : 0);
    }
    summary.push_back({{"width", w}, {"min_fraction", *std::min_element(scan.begin(), scan.end())}, {"below", below}});
  }
  *ctx.log << summary.dump() << '\n';
}

// ---------------------------------------------------------------- heat

struct HeatArgs {
  SeqArgs seq;
  std::string mode = "diagonal";
  std::string base;
  std::vector<double> times{1.0};
  std::vector<std::string> cells;
  double lo = -1.0, hi = 3.0;
  std::string log_base = "e";
  double time_scale = 4.0;
  int samples = 81;
};

std::vector<std::size_t> central_edge_cells(const CarpetGraph& g) {
  // cells along the bottom edge of the central hole, then the corner beyond it
  const std::int64_t h = pow3(g.level() - 1);
  std::vector<std::size_t> out;
  for (std::int64_t k = 0; k < h; ++k) out.push_back(*g.index_of(h + k, h - 1));
  out.push_back(*g.index_of(2 * h, h - 1));
  return out;
}

std::vector<double> shell_minima(const KernelSeries& ks) {
  std::vector<double> out;
  for (const auto& p : ks.samples) {
    if (p.distance < 0 || !(p.value > kNoiseFloor)) continue;
    const auto d = static_cast<std::size_t>(p.distance);
    if (out.size() <= d) out.resize(d + 1, std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(out[d]) || p.value < out[d]) out[d] = p.value;
  }
  return out;
}

void cmd_heat(const Context& ctx, HeatArgs& a) {
  const auto seq = a.seq.resolve();
  const auto g = build_unglued(a.seq.m, seq);
  const auto s = obtain_spectrum(ctx, g, LaplacianKind::NormalizedDirichlet, true);

  if (a.mode == "diagonal") {
    SlopeWindow w;
    w.lo = a.lo;
    w.hi = a.hi;
    w.samples = a.samples;
    w.time_scale = a.time_scale;
    if (a.log_base == "e")
      w.log_base = std::exp(1.0);
    else if (a.log_base == "10")
      w.log_base = 10.0;
    else
      throw ConfigError("--log-base must be e or 10");
    std::vector<std::size_t> cells;
    for (const auto& c : a.cells) cells.push_back(cell_of(g, c));
    if (cells.empty()) cells = central_edge_cells(g);

    auto os_s = ctx.open("heat_slopes_" + a.seq.tag() + ".csv");
    auto os_d = ctx.open("heat_diagonal_" + a.seq.tag() + ".csv");
    CsvWriter slopes(os_s, ctx.comment("log_base=" + a.log_base + " time_scale=" + format_double(a.time_scale)),
                     {"row", "addr", "slope", "beta", "log_t_hi", "shrunk"});
    CsvWriter diag(os_d, ctx.comment("log_base=" + a.log_base), {"addr", "log_t", "log_h"});
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto fit = diagonal_slope(s, *s.row_of(cells[k]), w);
      const auto addr = format_addr(g.cell(cells[k]));
      if (fit.shrunk) *ctx.log << "warning: window shrunk to avoid underflow at " << addr << '\n';
      slopes.row() << static_cast<std::uint64_t>(k) << addr << -fit.beta << fit.beta << fit.window.hi << (fit.shrunk ? 1 : 0);
      for (std::size_t q = 0; q < fit.log_t.size(); ++q) diag.row() << addr << fit.log_t[q] << fit.log_h[q];
    }
    return;
  }

  if (a.base.empty()) throw ConfigError("--base is required for off-diagonal modes");
  const auto mode = parse_profile_mode(a.mode);
  const auto y = cell_of(g, a.base);
  auto os = ctx.open("heat_" + a.mode + "_" + a.seq.tag() + ".csv");
  auto os_fit = ctx.open("heat_decay_" + a.mode + "_" + a.seq.tag() + ".csv");
  CsvWriter csv(os, ctx.comment("base=" + format_addr(g.cell(y)) + " noise_floor=1e-30"),
                {"t", "cell_index", "addr", "i", "j", "distance", "value", "log10_value", "noise"});
  CsvWriter fits(os_fit, ctx.comment("base=" + format_addr(g.cell(y))), {"t", "gamma_upper", "points_upper", "gamma_lower", "points_lower"});
  for (double t : a.times) {
    const auto ks = off_diagonal_profile(g, s, y, t, mode);
    for (const auto& p : ks.samples) {
      const auto& c = g.cell(p.cell);
      csv.row() << t << static_cast<std::uint64_t>(p.cell) << format_addr(c) << c.i << c.j << p.distance << p.value
                << (p.value > 0 ? std::log10(p.value) : std::numeric_limits<double>::quiet_NaN()) << (p.noise ? 1 : 0);
    }
    const auto up = fit_decay_exponent(ks.shell_maxima());
    const auto down = fit_decay_exponent(shell_minima(ks));
    fits.row() << t << up.gamma << up.points << down.gamma << down.points;
  }
}

// ---------------------------------------------------------------- wave

struct WaveArgs {
  SeqArgs seq;
  std::string base;
  std::vector<double> times{1.0};
  std::string freq = "linear";
};

void cmd_wave(const Context& ctx, WaveArgs& a) {
  const auto seq = a.seq.resolve();
  const auto g = build_unglued(a.seq.m, seq);
  if (a.base.empty()) throw ConfigError("--base is required");
  WaveFrequency f;
  if (a.freq == "linear")
    f = WaveFrequency::Linear;
  else if (a.freq == "sqrt")
    f = WaveFrequency::SquareRoot;
  else
    throw ConfigError("--freq must be linear or sqrt");
  const auto s = obtain_spectrum(ctx, g, LaplacianKind::NormalizedDirichlet, true);
  const auto y = cell_of(g, a.base);
  const auto ry = s.row_of(y);
  if (!ry) throw ConfigError("base cell lies on the outer ring");
  const auto dist = bfs_distances(g, y);
  auto os = ctx.open("wave_" + a.freq + "_" + a.seq.tag() + ".csv");
  CsvWriter csv(os, ctx.comment("base=" + format_addr(g.cell(y)) + " freq=" + a.freq),
                {"t", "cell_index", "addr", "i", "j", "distance", "value", "derivative"});
  for (double t : a.times) {
    if (!(t >= 0)) throw ConfigError("times must be non-negative");
    for (std::size_t r = 0; r < s.cells.size(); ++r) {
      const auto x = static_cast<Eigen::Index>(r);
      const auto& c = g.cell(s.cells[r]);
      csv.row() << t << static_cast<std::uint64_t>(s.cells[r]) << format_addr(c) << c.i << c.j << dist[s.cells[r]]
                << wave_propagator(s, t, x, *ry, f) << wave_time_derivative(s, t, x, *ry, f);
    }
  }
}

// ---------------------------------------------------------------- poisson

struct PoissonArgs {
  SeqArgs seq;
  std::string base;
};

void cmd_poisson(const Context& ctx, PoissonArgs& a) {
  const auto seq = a.seq.resolve();
  const auto g = build_unglued(a.seq.m, seq);
  if (a.base.empty()) throw ConfigError("--base is required");
  const auto y = cell_of(g, a.base);
  const auto p = poisson_kernel(g, y);
  const auto dist = bfs_distances(g, y);
  auto os = ctx.open("poisson_" + a.seq.tag() + ".csv");
  CsvWriter csv(os, ctx.comment("base=" + format_addr(g.cell(y))), {"cell_index", "addr", "i", "j", "distance", "value"});
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto& cc = g.cell(c);
    csv.row() << static_cast<std::uint64_t>(c) << format_addr(cc) << cc.i << cc.j << dist[c] << p[c];
  }
}

// ---------------------------------------------------------------- tile

struct TileArgs {
  std::string type = "T";
  int m = 2;
  int dump = -1;
};

void cmd_tile(const Context& ctx, TileArgs& a) {
  const auto t = uniform_type(a.type);
  if (a.m < 1 || a.m > 4) throw ConfigError("tile source level must be in 1..4");
  const auto coarse = build_glued(a.m, IdentSequence::uniform(t, a.m));
  const auto fine = build_glued(a.m + 1, IdentSequence::uniform(t, a.m + 1));
  const auto s = obtain_spectrum(ctx, coarse, LaplacianKind::CombinatorialGlued, true);
  const std::string tag = std::string(to_string(t)) + "_m" + std::to_string(a.m);
  auto os = ctx.open("tile_" + tag + ".csv");
  CsvWriter csv(os, ctx.comment(), {"k", "eigenvalue", "residual"});
  double worst = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const auto v = tile_eigenfunction(s.eigenvectors.col(k), a.m, t);
    const double r = eigen_residual(fine, v.values, s.eigenvalues(k));
    worst = std::max(worst, r);
    csv.row() << static_cast<std::int64_t>(k) << s.eigenvalues(k) << r;
  }
  if (a.dump >= 0) {
    if (a.dump >= s.size()) throw ConfigError("--dump index beyond the spectrum");
    const auto v = tile_eigenfunction(s.eigenvectors.col(a.dump), a.m, t);
    auto od = ctx.open("tile_" + tag + "_k" + std::to_string(a.dump) + ".csv");
    CsvWriter grid(od, ctx.comment(), {"i", "j", "value"});
    for (std::size_t c = 0; c < fine.cell_count(); ++c) grid.row() << fine.cell(c).i << fine.cell(c).j << v.values(static_cast<Eigen::Index>(c));
  }
  *ctx.log << json{{"max_residual", worst}, {"config_hash", ctx.hash}}.dump() << '\n';
}

// ---------------------------------------------------------------- refine

struct RefineArgs {
  std::string type = "T";
  int m = 3;
};

void cmd_refine(const Context& ctx, RefineArgs& a) {
  const auto t = uniform_type(a.type);
  if (a.m < 2 || a.m > 4) throw ConfigError("refine level must be in 2..4");
  const auto fine = build_glued(a.m, IdentSequence::uniform(t, a.m));
  const auto coarse = build_glued(a.m - 1, IdentSequence::uniform(t, a.m - 1));
  const auto sf = obtain_spectrum(ctx, fine, LaplacianKind::CombinatorialGlued, true);
  const auto sc = obtain_spectrum(ctx, coarse, LaplacianKind::CombinatorialGlued, true);
  auto os = ctx.open("refine_" + std::string(to_string(t)) + "_m" + std::to_string(a.m) + ".csv");
  CsvWriter csv(os, ctx.comment(), {"k", "eigenvalue", "matched_eigenvalue", "residual", "category"});
  std::map<std::string, int> counts;
  for (Eigen::Index k = 0; k < sf.size(); ++k) {
    const auto r = refinement_score(sf.eigenvectors.col(k), coarse, sc);
    ++counts[std::string(to_string(r.category))];
    csv.row() << static_cast<std::int64_t>(k) << sf.eigenvalues(k) << r.matched_lambda << r.residual << to_string(r.category);
  }
  *ctx.log << json(counts).dump() << '\n';
}

// ---------------------------------------------------------------- resolution

struct ResolutionArgs {
  std::string type = "T";
  std::vector<int> levels{2, 3};
  std::string cell = "0,0";
  double a = 0.0, b = 0.05;
};

void cmd_resolution(const Context& ctx, ResolutionArgs& a) {
  const auto t = uniform_type(a.type);
  const auto oracle = BlowupOracle::uniform(t);
  const auto where = parse_ext(a.cell);
  std::sort(a.levels.begin(), a.levels.end());
  if (a.levels.empty() || a.levels.front() < 1 || a.levels.back() > 4) throw ConfigError("levels must be in 1..4");
  auto os = ctx.open("resolution_" + std::string(to_string(t)) + ".csv");
  auto orep = ctx.open("resolution_" + std::string(to_string(t)) + "_report.csv");
  CsvWriter csv(os, ctx.comment("interval=[" + format_double(a.a) + "," + format_double(a.b) + ")"), {"level", "x", "y", "value"});
  CsvWriter rep(orep, ctx.comment(), {"level", "completeness_residual", "laplacian_residual", "idempotence_residual", "norm", "diff_from_previous"});
  std::map<std::pair<std::int64_t, std::int64_t>, double> previous;
  for (int m : a.levels) {
    const auto g = build_glued(m, IdentSequence::uniform(t, m));
    const auto s = obtain_spectrum(ctx, g, LaplacianKind::CombinatorialGlued, true);
    const auto w = oracle.to_window(where, m);
    if (w.i < 0 || w.j < 0 || w.i >= g.side() || w.j >= g.side()) throw ConfigError("cell lies outside the level-" + std::to_string(m) + " window");
    const auto c = g.index_of(w.i, w.j);
    if (!c) throw ConfigError("cell is a vacant square");
    Eigen::VectorXd f = Eigen::VectorXd::Zero(s.size());
    f(static_cast<Eigen::Index>(*c)) = 1.0;
    const auto p = spectral_projection(g, s, f, a.a, a.b);
    const auto full = spectral_projection(g, s, f, 0.0, 8.0 + 1e-9);
    const double complete = (full - f).lpNorm<Eigen::Infinity>();
    const double lap = (spectral_laplacian(g, s, f) - apply_laplacian(g, f)).lpNorm<Eigen::Infinity>();
    // idempotence on the eigen-coefficients, since p itself touches the ring
    const Eigen::VectorXd coeff = s.eigenvectors.transpose() * p;
    Eigen::VectorXd masked = coeff;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (!(s.eigenvalues(k) >= a.a && s.eigenvalues(k) < a.b)) masked(k) = 0.0;
    const double idem = (masked - coeff).lpNorm<Eigen::Infinity>();

    std::map<std::pair<std::int64_t, std::int64_t>, double> current;
    double diff2 = 0.0;
    for (std::size_t k = 0; k < g.cell_count(); ++k) {
      const auto e = oracle.from_window(g.cell(k));
      const double v = p(static_cast<Eigen::Index>(k));
      current[{e.x, e.y}] = v;
      csv.row() << m << e.x << e.y << v;
      if (auto it = previous.find({e.x, e.y}); it != previous.end()) diff2 += (v - it->second) * (v - it->second);
    }
    rep.row() << m << complete << lap << idem << p.norm()
              << (previous.empty() ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(diff2));
    previous = std::move(current);
  }
}

// ---------------------------------------------------------------- weyl-sweep

struct SweepArgs {
  std::string alphabet = "TP";
  int m = 4;
  std::vector<int> prefix_k;  // empty: 1 .. min(3, m - 1)
  double zoom_lo = -5.0, zoom_hi = -2.0;
  int grid = 301;
};

std::vector<IdentType> parse_alphabet(const std::string& text) {
  std::vector<IdentType> out;
  for (std::size_t k = 0; k < text.size();) {
    std::size_t len = (k + 1 < text.size() && text[k] == 'K' && (text[k + 1] == 'h' || text[k + 1] == 'v')) ? 2 : 1;
    out.push_back(parse_ident_type(text.substr(k, len)));
    k += len;
  }
  if (out.empty()) throw ConfigError("empty alphabet");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct SweepEntry {
  IdentSequence seq;
  double R = 0.0;
  double alpha = 0.0;
  Spectrum spectrum;
  std::vector<double> ln_w;  // ln W on the zoom grid
};

void cmd_weyl_sweep(const Context& ctx, SweepArgs& a) {
  const auto alphabet = parse_alphabet(a.alphabet);
  if (a.m < 2 || a.m > 4) throw ConfigError("sweep level must be in 2..4");
  if (a.grid < 2) throw ConfigError("--grid must be at least 2");
  // free entries are seq[0..m-1]; seq[m] only labels the unit holes, which do
  // not change the level-m graph, so it repeats seq[m-1]
  std::vector<SweepEntry> entries;
  std::size_t total = 1;
  for (int k = 0; k < a.m; ++k) total *= alphabet.size();
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<IdentType> e(static_cast<std::size_t>(a.m) + 1);
    std::size_t c = code;
    for (int k = a.m - 1; k >= 0; --k) {
      e[static_cast<std::size_t>(k)] = alphabet[c % alphabet.size()];
      c /= alphabet.size();
    }
    e[static_cast<std::size_t>(a.m)] = e[static_cast<std::size_t>(a.m) - 1];
    entries.push_back({IdentSequence(e), 0, 0, {}, {}});
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t k; (k = next++) < entries.size();) {
      try {
        auto& en = entries[k];
        const auto fine = obtain_spectrum(ctx, build_glued(a.m, en.seq), LaplacianKind::CombinatorialGlued, false);
        const auto coarse = obtain_spectrum(ctx, build_glued(a.m - 1, en.seq.prefix(a.m - 1)), LaplacianKind::CombinatorialGlued, false);
        en.R = estimate_R(coarse, fine, std::min<int>(10, static_cast<int>(coarse.size()) - 1)).R;
        en.alpha = weyl_exponent(en.R);
        en.spectrum = fine;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, ctx.threads ? ctx.threads : std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < std::min<std::size_t>(n_threads, entries.size()); ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  auto osr = ctx.open("weyl_sweep_summary.csv");
  CsvWriter summary(osr, ctx.comment(), {"seq", "R", "alpha", "lambda_1"});
  for (auto& en : entries) {
    write_weyl(ctx, "weyl_" + en.seq.to_string() + ".csv", en.spectrum, en.R);
    summary.row() << en.seq.to_string() << en.R << en.alpha << en.spectrum.eigenvalues(1);
    for (int q = 0; q < a.grid; ++q) {
      const double lt = a.zoom_lo + (a.zoom_hi - a.zoom_lo) * q / (a.grid - 1);
      const double t = std::exp(lt);
      en.ln_w.push_back(std::log(static_cast<double>(counting_function(en.spectrum, t))) - en.alpha * lt);
    }
  }

  auto osg = ctx.open("weyl_segmentation.csv");
  CsvWriter seg(osg, ctx.comment("zoom ln t in [" + format_double(a.zoom_lo) + "," + format_double(a.zoom_hi) + "]"),
                {"k", "within_mean_gap", "across_mean_gap", "within_max_gap", "across_max_gap", "within_below_across"});
  if (a.prefix_k.empty())
    for (int k = 1; k <= std::min(3, a.m - 1); ++k) a.prefix_k.push_back(k);
  for (int k : a.prefix_k) {
    if (k < 1 || k >= a.m) throw ConfigError("prefix length must be in 1..m-1");
    double wsum = 0, asum = 0, wmax = 0, amax = 0;
    std::size_t wn = 0, an = 0;
    for (std::size_t p = 0; p < entries.size(); ++p)
      for (std::size_t q = p + 1; q < entries.size(); ++q) {
        double gap = 0;
        for (int r = 0; r < a.grid; ++r)
          gap = std::max(gap, std::abs(entries[p].ln_w[static_cast<std::size_t>(r)] - entries[q].ln_w[static_cast<std::size_t>(r)]));
        bool same = true;
        for (int d = 0; d < k; ++d) same = same && entries[p].seq[static_cast<std::size_t>(d)] == entries[q].seq[static_cast<std::size_t>(d)];
        if (same) {
          wsum += gap, ++wn, wmax = std::max(wmax, gap);
        } else {
          asum += gap, ++an, amax = std::max(amax, gap);
        }
      }
    const double wm = wn ? wsum / static_cast<double>(wn) : 0.0, am = an ? asum / static_cast<double>(an) : 0.0;
    seg.row() << k << wm << am << wmax << amax << (wm < am ? 1 : 0);
  }
  *ctx.log << "sweep: " << entries.size() << " sequences\n";
}

// ---------------------------------------------------------------- driver

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  if (path.empty()) return rest;

  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  json cfg;
  try {
    cfg = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("bad config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  std::vector<std::string> out;
  std::size_t first = 0;
  if (!rest.empty() && rest.front().rfind("-", 0) != 0) {
    out.push_back(rest.front());
    first = 1;
  } else if (cfg.contains("command")) {
    out.push_back(cfg["command"].get<std::string>());
  }
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") continue;
    const std::string flag = "--" + key;
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        out.push_back(flag);
        out.push_back(scalar(v));
      }
    } else {
      out.push_back(flag);
      out.push_back(scalar(value));
    }
  }
  // command-line flags come last so they override the file
  out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(first), rest.end());
  return out;
}

std::string option_key(const CLI::Option* o) {
  const auto& l = o->get_lnames();
  return l.empty() ? o->get_name() : l.front();
}

std::string canonical_config(const CLI::App* sub) {
  json j;
  j["command"] = sub->get_name();
  for (const auto* o : sub->get_options()) {
    const auto key = option_key(o);
    if (kUnhashed.count(key)) continue;
    if (o->count() > 0) {
      const auto r = o->results();
      j[key] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      j[key] = o->get_default_str();
    }
  }
  return j.dump();
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Magic carpet graph experiments"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Context ctx;
  ctx.log = &out;
  std::string out_dir = ".";
  std::string cache_dir;
  bool cache_set = false;
  std::string config_path;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--cache", cache_dir, "spectrum cache directory (default <out>/cache, empty string disables)")
        ->each([&](const std::string&) { cache_set = true; });
    sub->add_option("--cache-file", ctx.cache_file, "explicit spectrum cache file");
    sub->add_option("--threads", ctx.threads, "worker threads (0 = hardware)");
    sub->add_option("--config", config_path, "JSON config; command-line flags override it");
  };

  BuildArgs build;
  auto* s_build = app.add_subcommand("build", "dump a cell graph");
  add_seq(s_build, build.seq);
  s_build->add_option("--kind", build.kind, "glued or unglued");

  BallArgs balls;
  auto* s_balls = app.add_subcommand("balls", "ball cardinalities in the blowup");
  s_balls->add_option("--type", balls.type, "T, P, Kh or Kv");
  s_balls->add_option("--rmax", balls.r_max, "largest radius");
  s_balls->add_option("--source", balls.source, "source cell x,y relative to the seed cell");
  s_balls->add_option("--window", balls.window, "window level (0 = automatic)");

  WalkArgs walk;
  auto* s_walk = app.add_subcommand("walk", "random walk return statistics");
  s_walk->add_option("--type", walk.type, "T, P, Kh or Kv");
  s_walk->add_option("--trials", walk.trials, "number of trials");
  s_walk->add_option("--max-length", walk.max_length, "steps before a trial counts as transient");
  s_walk->add_option("--seed", walk.seed, "master seed");
  s_walk->add_option("--start", walk.start, "start cell x,y");

  SeqArgs resistance;
  auto* s_res = app.add_subcommand("resistance", "effective resistance to the outer ring");
  add_seq(s_res, resistance);

  SpectrumArgs spectrum;
  auto* s_spec = app.add_subcommand("spectrum", "full Laplacian spectrum");
  add_seq(s_spec, spectrum.seq);
  s_spec->add_option("--kind", spectrum.kind, "glued or dirichlet");
  s_spec->add_flag("--values-only", spectrum.values_only, "skip eigenvectors");
  s_spec->add_option("--vectors", spectrum.dump_vectors, "dump the first N eigenvectors");
  s_spec->add_option("--weyl-R", spectrum.weyl_R, "write a Weyl ratio table with this R");

  ScanArgs scan;
  auto* s_scan = app.add_subcommand("dirichlet-scan", "near-boundary mass of Dirichlet eigenfunctions");
  add_seq(s_scan, scan.seq);
  s_scan->add_option("--width", scan.widths, "ring widths")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_scan->add_option("--kmax", scan.k_max, "number of eigenfunctions");
  s_scan->add_option("--threshold", scan.threshold, "mass fraction counted as decay");

  HeatArgs heat;
  auto* s_heat = app.add_subcommand("heat", "Dirichlet heat kernel");
  add_seq(s_heat, heat.seq);
  s_heat->add_option("--mode", heat.mode, "diagonal, line, shell or full");
  s_heat->add_option("--base", heat.base, "base cell, (base3,base3) or i,j");
  s_heat->add_option("--t", heat.times, "times")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_heat->add_option("--cell", heat.cells, "diagonal cells")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_heat->add_option("--window-lo", heat.lo, "fit window start (log t)");
  s_heat->add_option("--window-hi", heat.hi, "fit window end (log t)");
  s_heat->add_option("--log-base", heat.log_base, "e or 10");
  s_heat->add_option("--time-scale", heat.time_scale, "factor on t in exp(-lambda t)");
  s_heat->add_option("--samples", heat.samples, "fit samples");

  WaveArgs wave;
  auto* s_wave = app.add_subcommand("wave", "wave propagator");
  add_seq(s_wave, wave.seq);
  s_wave->add_option("--base", wave.base, "base cell");
  s_wave->add_option("--t", wave.times, "times")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_wave->add_option("--freq", wave.freq, "linear (sin(lambda t)/lambda) or sqrt");

  PoissonArgs poisson;
  auto* s_poi = app.add_subcommand("poisson", "Poisson kernel of a boundary cell");
  add_seq(s_poi, poisson.seq);
  s_poi->add_option("--base", poisson.base, "boundary cell");

  TileArgs tile;
  auto* s_tile = app.add_subcommand("tile", "tile glued eigenfunctions one level up");
  s_tile->add_option("--type", tile.type, "T, P, Kh or Kv");
  s_tile->add_option("--m", tile.m, "source level");
  s_tile->add_option("--dump", tile.dump, "write the tiled eigenfunction with this index");

  RefineArgs refine;
  auto* s_ref = app.add_subcommand("refine", "average eigenfunctions down a level");
  s_ref->add_option("--type", refine.type, "T, P, Kh or Kv");
  s_ref->add_option("--m", refine.m, "fine level");

  ResolutionArgs resolution;
  auto* s_resol = app.add_subcommand("resolution", "spectral projections of a point mass");
  s_resol->add_option("--type", resolution.type, "T, P, Kh or Kv");
  s_resol->add_option("--level", resolution.levels, "window levels")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_resol->add_option("--cell", resolution.cell, "support cell x,y relative to the seed cell");
  s_resol->add_option("--a", resolution.a, "interval start");
  s_resol->add_option("--b", resolution.b, "interval end (exclusive)");

  SweepArgs sweep;
  auto* s_sweep = app.add_subcommand("weyl-sweep", "Weyl ratios over all sequences of an alphabet");
  s_sweep->add_option("--alphabet", sweep.alphabet, "e.g. TP or TPKhKv");
  s_sweep->add_option("--m", sweep.m, "level");
  s_sweep->add_option("--prefix-k", sweep.prefix_k, "prefix lengths for grouping (default 1..min(3,m-1))")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_sweep->add_option("--zoom-lo", sweep.zoom_lo, "zoom start, ln t");
  s_sweep->add_option("--zoom-hi", sweep.zoom_hi, "zoom end, ln t");
  s_sweep->add_option("--grid", sweep.grid, "samples across the zoom");

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) common(sub);

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  ctx.command = sub->get_name();
  ctx.hash = hex64(fnv1a64(canonical_config(sub)));
  ctx.out = out_dir;
  ctx.cache = cache_set ? cache_dir : (fs::path(out_dir) / "cache").string();

  try {
    const auto& c = ctx.command;
    if (c == "build") cmd_build(ctx, build);
    else if (c == "balls") cmd_balls(ctx, balls);
    else if (c == "walk") cmd_walk(ctx, walk);
    else if (c == "resistance") cmd_resistance(ctx, resistance);
    else if (c == "spectrum") cmd_spectrum(ctx, spectrum);
    else if (c == "dirichlet-scan") cmd_dirichlet_scan(ctx, scan);
    else if (c == "heat") cmd_heat(ctx, heat);
    else if (c == "wave") cmd_wave(ctx, wave);
    else if (c == "poisson") cmd_poisson(ctx, poisson);
    else if (c == "tile") cmd_tile(ctx, tile);
    else if (c == "refine") cmd_refine(ctx, refine);
    else if (c == "resolution") cmd_resolution(ctx, resolution);
    else if (c == "weyl-sweep") cmd_weyl_sweep(ctx, sweep);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const WindowTooSmall& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace carpet::cli
