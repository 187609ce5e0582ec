#include "bridgescore/csv.hpp"

#include <istream>
#include <ostream>

namespace bridgescore {

bool CsvReader::next(std::vector<std::string>& out) {
  out.clear();
  int first = in_.peek();
  if (first == std::char_traits<char>::eof()) return false;

  row_line_ = line_;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  for (;;) {
    int ci = in_.get();
    if (ci == std::char_traits<char>::eof()) {
      if (quoted) throw CsvParseError(row_line_, "unterminated quoted field");
      out.push_back(std::move(field));
      return true;
    }
    char c = static_cast<char>(ci);
    if (quoted) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty())
          throw CsvParseError(line_, "quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        out.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        if (in_.peek() == '\n') break;  // swallow, handled by the \n branch
        [[fallthrough]];
      case '\n':
        ++line_;
        out.push_back(std::move(field));
        return true;
      default:
        field.push_back(c);
        field_started = true;
        break;
    }
  }
}

std::string CsvWriter::escape(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void CsvWriter::row(std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape(fields[i]);
  }
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<std::string> fields) {
  row(std::span<const std::string>(fields.begin(), fields.size()));
}

}  // namespace bridgescore
