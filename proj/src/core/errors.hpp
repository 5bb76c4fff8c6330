#pragma once

#include <stdexcept>
#include <string>

namespace bdb {

// Base class for every error the library raises on purpose. Each concrete
// type maps 1:1 to a status code of the C API.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Moment target outside the feasible cone 0 < n < 1/eta, |E| < 2*eps0*d*n.
class Infeasible : public Error {
public:
  using Error::Error;
};

class NoConvergence : public Error {
public:
  using Error::Error;
};

// Moment Jacobian determinant below the configured floor (n near 0 or 1/eta).
class NearSingular : public Error {
public:
  using Error::Error;
};

class NoRoot : public Error {
public:
  using Error::Error;
};

class BranchLost : public Error {
public:
  using Error::Error;
};

class DegenerateEigenvector : public Error {
public:
  using Error::Error;
};

class IncommensurableWavenumber : public Error {
public:
  using Error::Error;
};

class Unphysical : public Error {
public:
  using Error::Error;
};

// Expected terminal signal of instability runs pushed past saturation.
class BlowUp : public Error {
public:
  BlowUp(const std::string& msg, double time) : Error(msg), t(time) {}
  double t;
};

class SaturatedTooFast : public Error {
public:
  using Error::Error;
};

class ProfileInvalid : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class CorruptSnapshot : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace bdb
