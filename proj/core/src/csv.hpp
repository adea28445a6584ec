#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace bosatom::detail {

/// %.17g so that every double round-trips.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), cols_(header.size()) {
    bool first = true;
    for (const auto& h : header) {
      os_ << (first ? "" : ",") << h;
      first = false;
    }
    os_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) os_ << (k ? "," : "") << format_double(values[k]);
    os_ << '\n';
  }

  std::size_t columns() const { return cols_; }

private:
  std::ostream& os_;
  std::size_t cols_;
};

}  // namespace bosatom::detail
