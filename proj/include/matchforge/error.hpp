#pragma once

#include <stdexcept>
#include <string>

namespace matchforge {

// Base of every exception the library throws on bad data or infeasible
// requests. Contract violations inside solvers use std::logic_error instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (duplicate ids, negative costs, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// The request asks for something no solution satisfies (m > m-dagger, ...).
class Infeasible : public Error {
 public:
  using Error::Error;
};

// A size guard or numeric range was exceeded.
class LimitExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace matchforge
