#ifndef OLAC_CSV_HPP
#define OLAC_CSV_HPP

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace olac {

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Shortest round-trip decimal form; NaN and infinities as "nan", "inf", "-inf".
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

/// Comma-delimited rows terminated by LF. Fields containing a comma, quote or
/// newline are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(&out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream* out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws CsvError if the column does not exist.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

/// Parses a header row and data rows; every row must match the header width.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Strict number parse: the whole field must be consumed. Empty → nullopt.
std::optional<double> parse_number(const std::string& field);

}  // namespace olac

#endif  // OLAC_CSV_HPP
