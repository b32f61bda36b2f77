#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace slgen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad GenParams / config values. `field` names the offending key.
class ParamError : public Error {
 public:
  ParamError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Grammar fails structural validation where an operation requires it.
class StructureError : public Error {
 public:
  using Error::Error;
};

// Height repair could not bring the grammar under the limit.
class RepairError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. line is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(format(source, line, what)), source_(std::move(source)), line_(line) {}
  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line,
                            const std::string& what) {
    std::string s = source.empty() ? std::string("<input>") : source;
    if (line > 0) s += ":" + std::to_string(line);
    return s + ": " + what;
  }
  std::string source_;
  std::size_t line_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

// Predictions that do not fit the gold corpus.
class InputError : public Error {
 public:
  using Error::Error;
};

// A breached invariant reported as data. Warnings do not fail validation.
struct Violation {
  std::string code;
  std::string message;
  bool warning = false;
};

inline std::size_t count_errors(const std::vector<Violation>& vs) {
  std::size_t n = 0;
  for (const auto& v : vs)
    if (!v.warning) ++n;
  return n;
}

}  // namespace slgen
