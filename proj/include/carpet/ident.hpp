#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace carpet {

/// Thrown for malformed user input (sequence strings, configs, addresses).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a numerical routine cannot meet its contract.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class IdentType : std::uint8_t { Torus, Projective, KleinH, KleinV };

/// Gluing of the left and right sides reverses the row offset.
constexpr bool reverses_horizontal_gluing(IdentType t) {
  return t == IdentType::Projective || t == IdentType::KleinH;
}

/// Gluing of the top and bottom sides reverses the column offset.
constexpr bool reverses_vertical_gluing(IdentType t) {
  return t == IdentType::Projective || t == IdentType::KleinV;
}

std::string_view to_string(IdentType t);
IdentType parse_ident_type(std::string_view token);

/// Per-level identification choices. Entry 0 glues the outer square, entry d
/// (d >= 1) glues the 8^(d-1) vacant squares created at subdivision depth d-1.
class IdentSequence {
 public:
  IdentSequence() = default;
  explicit IdentSequence(std::vector<IdentType> entries);

  static IdentSequence uniform(IdentType t, int m);
  /// Parses strings such as "TPKhKvT". Tokens: T, P, Kh, Kv (case-sensitive
  /// for the Klein suffix; a bare "K" means Kh).
  static IdentSequence parse(std::string_view text);

  std::size_t size() const { return entries_.size(); }
  IdentType operator[](std::size_t k) const { return entries_.at(k); }
  const std::vector<IdentType>& entries() const { return entries_; }

  /// Highest level this sequence can describe.
  int max_level() const { return static_cast<int>(entries_.size()) - 1; }
  bool is_constant() const;
  /// First m+1 entries.
  IdentSequence prefix(int m) const;

  std::string to_string() const;

  friend bool operator==(const IdentSequence&, const IdentSequence&) = default;

 private:
  std::vector<IdentType> entries_;
};

}  // namespace carpet
