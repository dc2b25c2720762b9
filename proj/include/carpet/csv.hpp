#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace carpet {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_double(double v);

class CsvWriter {
 public:
  /// Writes "# <comment>" (skipped when empty) and the header row.
  CsvWriter(std::ostream& os, std::string_view comment, std::vector<std::string> columns);

  class Row {
   public:
    explicit Row(CsvWriter& w) : w_(w) {}
    Row(const Row&) = delete;
    ~Row() noexcept(false);
    Row& operator<<(double v);
    Row& operator<<(std::int64_t v);
    Row& operator<<(std::uint64_t v);
    Row& operator<<(int v) { return *this << static_cast<std::int64_t>(v); }
    Row& operator<<(std::string_view v);
    Row& operator<<(const char* v) { return *this << std::string_view(v); }
    Row& operator<<(const std::string& v) { return *this << std::string_view(v); }

   private:
    void sep();
    CsvWriter& w_;
    std::size_t fields_ = 0;
  };

  Row row() { return Row(*this); }
  std::size_t columns() const { return columns_.size(); }

 private:
  std::ostream& os_;
  std::vector<std::string> columns_;
};

}  // namespace carpet
