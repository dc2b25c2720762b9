#include "carpet/spectrum_io.hpp"

#include <bit>
#include <fstream>
#include <nlohmann/json.hpp>

namespace carpet {

namespace {

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

void put_doubles(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw CacheMismatch("spectrum cache truncated");
}

}  // namespace

std::string cache_file_name(int m, const IdentSequence& seq, LaplacianKind kind) {
  return std::string(to_string(kind)) + "_m" + std::to_string(m) + "_" + seq.to_string() + ".spec";
}

void save_spectrum(const std::filesystem::path& path, const Spectrum& s) {
  nlohmann::ordered_json h;
  h["m"] = s.m;
  h["seq"] = s.seq.to_string();
  h["kind"] = to_string(s.kind);
  h["count"] = s.size();
  h["vectors"] = s.has_vectors();
  h["residual_bound"] = s.residual_bound ? nlohmann::ordered_json(*s.residual_bound) : nlohmann::ordered_json();

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    os << h.dump() << '\n';
    put_doubles(os, s.eigenvalues.data(), static_cast<std::size_t>(s.size()));
    if (s.has_vectors()) put_doubles(os, s.eigenvectors.data(), static_cast<std::size_t>(s.eigenvectors.size()));
    if (!os) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<Spectrum> load_spectrum(const std::filesystem::path& path, const CarpetGraph& g, LaplacianKind kind,
                       bool need_vectors) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw CacheMismatch("bad cache header in " + path.string() + ": " + e.what());
  }

  Spectrum s;
  s.kind = kind;
  s.m = g.level();
  s.seq = g.sequence();
  s.cells = operator_cells(g, kind);
  const auto n = static_cast<Eigen::Index>(s.cells.size());

  auto mismatch = [&](const std::string& what) {
    throw CacheMismatch("cache " + path.string() + " " + what + " differs from request");
  };
  try {
    if (h.at("m").get<int>() != s.m) mismatch("level");
    if (h.at("seq").get<std::string>() != s.seq.to_string()) mismatch("sequence");
    if (h.at("kind").get<std::string>() != to_string(kind)) mismatch("kind");
    if (h.at("count").get<Eigen::Index>() != n) mismatch("count");
    const bool has_vectors = h.at("vectors").get<bool>();
    if (need_vectors && !has_vectors) return std::nullopt;
    if (!h.at("residual_bound").is_null()) s.residual_bound = h["residual_bound"].get<double>();

    s.eigenvalues.resize(n);
    get_doubles(is, s.eigenvalues.data(), static_cast<std::size_t>(n));
    if (has_vectors) {
      s.eigenvectors.resize(n, n);
      get_doubles(is, s.eigenvectors.data(), static_cast<std::size_t>(n * n));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CacheMismatch("bad cache header in " + path.string() + ": " + e.what());
  }
  if (is.peek() != std::char_traits<char>::eof()) throw CacheMismatch("trailing bytes in " + path.string());
  return s;
}

}  // namespace carpet
