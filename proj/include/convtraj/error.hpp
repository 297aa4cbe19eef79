#pragma once

#include <stdexcept>
#include <string>

namespace convtraj {

enum class ErrorKind {
  BadInput,   // malformed or inconsistent input; CLI exit code 2
  Numerical,  // solver or geometry failure; CLI exit code 3
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error bad_input(const std::string& what) { return Error(ErrorKind::BadInput, what); }
inline Error numerical(const std::string& what) { return Error(ErrorKind::Numerical, what); }

// Raised by root isolation when the polynomial vanishes identically.
class ZeroPolynomialError : public Error {
 public:
  ZeroPolynomialError() : Error(ErrorKind::Numerical, "degenerate face: polynomial is identically zero") {}
};

}  // namespace convtraj
