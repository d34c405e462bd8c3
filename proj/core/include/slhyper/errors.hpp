#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slhyper {

// Invalid numerical input or a failed mathematical precondition.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DomainError {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : DomainError(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Bad command line usage (unknown flag, missing argument).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slhyper
