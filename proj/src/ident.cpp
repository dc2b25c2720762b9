#include "carpet/ident.hpp"

#include <algorithm>

namespace carpet {

std::string_view to_string(IdentType t) {
  switch (t) {
    case IdentType::Torus: return "T";
    case IdentType::Projective: return "P";
    case IdentType::KleinH: return "Kh";
    case IdentType::KleinV: return "Kv";
  }
  return "?";
}

IdentType parse_ident_type(std::string_view token) {
  if (token == "T" || token == "torus") return IdentType::Torus;
  if (token == "P" || token == "projective") return IdentType::Projective;
  if (token == "Kh" || token == "K" || token == "klein" || token == "kleinh") return IdentType::KleinH;
  if (token == "Kv" || token == "kleinv") return IdentType::KleinV;
  throw ConfigError("unknown identification type '" + std::string(token) + "'");
}

IdentSequence::IdentSequence(std::vector<IdentType> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigError("identification sequence must be non-empty");
}

IdentSequence IdentSequence::uniform(IdentType t, int m) {
  if (m < 0) throw ConfigError("level must be non-negative");
  return IdentSequence(std::vector<IdentType>(static_cast<std::size_t>(m) + 1, t));
}

IdentSequence IdentSequence::parse(std::string_view text) {
  std::vector<IdentType> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char c = text[pos];
    if (c == 'T' || c == 'P') {
      out.push_back(c == 'T' ? IdentType::Torus : IdentType::Projective);
      ++pos;
    } else if (c == 'K') {
      if (pos + 1 < text.size() && (text[pos + 1] == 'h' || text[pos + 1] == 'v')) {
        out.push_back(text[pos + 1] == 'h' ? IdentType::KleinH : IdentType::KleinV);
        pos += 2;
      } else {
        out.push_back(IdentType::KleinH);
        ++pos;
      }
    } else {
      throw ConfigError("invalid character '" + std::string(1, c) + "' in identification sequence '" +
                        std::string(text) + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty identification sequence");
  return IdentSequence(std::move(out));
}

bool IdentSequence::is_constant() const {
  return std::all_of(entries_.begin(), entries_.end(), [&](IdentType t) { return t == entries_.front(); });
}

IdentSequence IdentSequence::prefix(int m) const {
  if (m < 0 || m > max_level()) throw ConfigError("sequence too short for level " + std::to_string(m));
  return IdentSequence(std::vector<IdentType>(entries_.begin(), entries_.begin() + m + 1));
}

std::string IdentSequence::to_string() const {
  std::string s;
  for (auto t : entries_) s += carpet::to_string(t);
  return s;
}

}  // namespace carpet
