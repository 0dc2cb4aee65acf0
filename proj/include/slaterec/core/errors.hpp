#pragma once

#include <stdexcept>
#include <string>

namespace slaterec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad sizes or parameters handed to a constructor/sampler, or a bad run config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidSlate : public Error {
 public:
  using Error::Error;
};

class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

// A transition model produced something that is not a distribution.
class ModelError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class UnsupportedMode : public Error {
 public:
  using Error::Error;
};

}  // namespace slaterec
