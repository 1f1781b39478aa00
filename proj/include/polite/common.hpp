#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polite {

enum class Lang { en, zh };

std::string_view to_string(Lang lang);

/// Parses "en" / "zh". Throws DataError("unknown language ...") otherwise.
Lang parse_lang(std::string_view text);

/// Base of everything the library throws on bad input.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad invocation: wrong flag combination, missing file, bad argument value.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed record in an input file; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace polite
