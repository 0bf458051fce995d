#pragma once

#include <stdexcept>
#include <string>

namespace rasdm {

enum class ErrorKind {
  Invalid,            // malformed input or domain violation
  Infeasible,         // model-level infeasibility
  EmptyIntersection,  // agents' risk sets share no measure
  Numerical,          // solver could not certify its answer
  NotConverged,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace rasdm
