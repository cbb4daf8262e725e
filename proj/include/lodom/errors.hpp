#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lodom {

// Base for every error raised by the library. Messages are one line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed binary content; carries the byte offset where decoding stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Malformed text content; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Too few correspondences or an unusable normal-equation system.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// Non-finite values reaching numeric code.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace lodom
