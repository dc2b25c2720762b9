#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>

#include "carpet/spectral.hpp"

namespace carpet {

/// Header of a cache file disagrees with the requested configuration.
struct CacheMismatch : ConfigError {
  using ConfigError::ConfigError;
};

/// One JSON line (m, seq, kind, count, vectors, residual_bound), then raw
/// little-endian doubles: eigenvalues, then eigenvectors column by column.
void save_spectrum(const std::filesystem::path& path, const Spectrum& s);

/// Loads and checks the header against `g` and `kind`. Returns nullopt when
/// `need_vectors` is set and the file holds eigenvalues only.
std::optional<Spectrum> load_spectrum(const std::filesystem::path& path, const CarpetGraph& g, LaplacianKind kind,
                       bool need_vectors);

/// File name used by the CLI cache, e.g. "CombinatorialGlued_m4_TTTTT.spec".
std::string cache_file_name(int m, const IdentSequence& seq, LaplacianKind kind);

}  // namespace carpet
