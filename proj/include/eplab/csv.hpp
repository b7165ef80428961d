#pragma once

// Plain CSV tables with shortest round-trip number formatting.

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "eplab/error.hpp"

namespace eplab::csv {

// Shortest decimal string that parses back to the same double.
inline std::string format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) throw NumericalError("number formatting failed");
  return std::string(buf, res.ptr);
}

inline std::string format(const std::optional<double>& x) { return x ? format(*x) : ""; }

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  // Values are either numbers or preformatted cells.
  class Row {
   public:
    Row& operator<<(double x) {
      cells_.push_back(format(x));
      return *this;
    }
    Row& operator<<(int x) {
      cells_.push_back(std::to_string(x));
      return *this;
    }
    Row& operator<<(const std::optional<double>& x) {
      cells_.push_back(format(x));
      return *this;
    }
    Row& operator<<(const std::string& s) {
      cells_.push_back(s);
      return *this;
    }
    Row& operator<<(const char* s) { return *this << std::string(s); }

   private:
    friend class Table;
    std::vector<std::string> cells_;
  };

  void add(const Row& row) {
    if (row.cells_.size() != header_.size()) {
      throw InputError("csv row has " + std::to_string(row.cells_.size()) + " cells, header has " +
                       std::to_string(header_.size()));
    }
    rows_.push_back(row.cells_);
  }

  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    std::ostringstream os;
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << str();
    if (!f) throw InputError("write failed: " + path);
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace eplab::csv
