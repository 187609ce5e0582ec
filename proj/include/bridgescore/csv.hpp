#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bridgescore {

struct CsvParseError : std::runtime_error {
  std::size_t line;
  CsvParseError(std::size_t line_no, const std::string& what)
      : std::runtime_error("csv line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

/// RFC-4180 reader: quoted fields, doubled-quote escapes, LF or CRLF rows,
/// embedded newlines inside quotes. Structural errors (stray quote,
/// unterminated quote at EOF) throw CsvParseError.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads one row into `out`. Returns false at end of input.
  bool next(std::vector<std::string>& out);

  // 1-based line number where the last returned row started.
  std::size_t row_line() const { return row_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t row_line_ = 1;
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields);

  static std::string escape(std::string_view field);

 private:
  std::ostream& out_;
};

}  // namespace bridgescore
