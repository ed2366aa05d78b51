#pragma once

// Line/token scanner shared by the text-format parsers.

#include "wmcvar/error.hpp"

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace wmcvar::detail {

class LineScanner {
public:
  explicit LineScanner(std::string_view text) : text_(text) {}

  /// Advances to the next line; returns false at end of input.
  bool next_line() {
    if (pos_ >= text_.size())
      return false;
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos)
      end = text_.size();
    line_ = text_.substr(pos_, end - pos_);
    if (!line_.empty() && line_.back() == '\r')
      line_.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    col_ = 0;
    return true;
  }

  std::size_t line_no() const { return line_no_; }
  std::size_t column() const { return col_ + 1; }
  std::string_view line() const { return line_; }

  /// True if the rest of the current line is whitespace.
  bool at_eol() {
    skip_ws();
    return col_ >= line_.size();
  }

  bool blank_or_comment(char comment = 'c') {
    skip_ws();
    if (col_ >= line_.size())
      return true;
    if (line_[col_] == comment &&
        (col_ + 1 == line_.size() || line_[col_ + 1] == ' ' ||
         line_[col_ + 1] == '\t'))
      return true;
    return false;
  }

  std::string_view token() {
    skip_ws();
    auto start = col_;
    while (col_ < line_.size() && line_[col_] != ' ' && line_[col_] != '\t')
      ++col_;
    if (start == col_)
      fail("unexpected end of line");
    return line_.substr(start, col_ - start);
  }

  std::int64_t integer() {
    skip_ws();
    auto start_col = col_;
    auto tok = token();
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      col_ = start_col;
      fail("expected integer, got '" + std::string(tok) + "'");
    }
    return value;
  }

  std::int64_t nonnegative() {
    skip_ws();
    auto start_col = col_;
    auto v = integer();
    if (v < 0) {
      col_ = start_col;
      fail("expected nonnegative integer");
    }
    return v;
  }

  void expect_eol() {
    if (!at_eol())
      fail("trailing characters");
  }

  [[noreturn]] void fail(const std::string &what) const {
    throw ParseError(what, line_no_, col_ + 1);
  }

private:
  void skip_ws() {
    while (col_ < line_.size() && (line_[col_] == ' ' || line_[col_] == '\t'))
      ++col_;
  }

  std::string_view text_;
  std::string_view line_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  std::size_t col_ = 0;
};

} // namespace wmcvar::detail
