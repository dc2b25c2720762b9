#include "carpet/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace carpet {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, end);
}

CsvWriter::CsvWriter(std::ostream& os, std::string_view comment, std::vector<std::string> columns)
    : os_(os), columns_(std::move(columns)) {
  if (!comment.empty()) os_ << "# " << comment << '\n';
  for (std::size_t k = 0; k < columns_.size(); ++k) os_ << (k ? "," : "") << columns_[k];
  os_ << '\n';
}

void CsvWriter::Row::sep() {
  if (fields_++) w_.os_ << ',';
}

CsvWriter::Row::~Row() noexcept(false) {
  if (fields_ != w_.columns_.size() && std::uncaught_exceptions() == 0)
    throw std::logic_error("csv row has " + std::to_string(fields_) + " fields, header has " +
                           std::to_string(w_.columns_.size()));
  w_.os_ << '\n';
}

CsvWriter::Row& CsvWriter::Row::operator<<(double v) {
  sep();
  w_.os_ << format_double(v);
  return *this;
}

CsvWriter::Row& CsvWriter::Row::operator<<(std::int64_t v) {
  sep();
  w_.os_ << v;
  return *this;
}

CsvWriter::Row& CsvWriter::Row::operator<<(std::uint64_t v) {
  sep();
  w_.os_ << v;
  return *this;
}

CsvWriter::Row& CsvWriter::Row::operator<<(std::string_view v) {
  sep();
  if (v.find_first_of(",\"\n") == std::string_view::npos) {
    w_.os_ << v;
    return *this;
  }
  w_.os_ << '"';
  for (char c : v) {
    if (c == '"') w_.os_ << '"';
    w_.os_ << c;
  }
  w_.os_ << '"';
  return *this;
}

}  // namespace carpet
