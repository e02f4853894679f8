#pragma once

#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace pbauth {

using Bigint = mpz_class;

/// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParameterError : Error {
  using Error::Error;
};

struct InvalidModulusError : Error {
  using Error::Error;
};

/// Inversion failed; carries the offending gcd.
struct NotInvertibleError : Error {
  Bigint gcd;
  NotInvertibleError(const std::string& what, Bigint g)
      : Error(what), gcd(std::move(g)) {}
};

struct PlaintextRangeError : Error {
  using Error::Error;
};

struct MalformedCiphertextError : Error {
  using Error::Error;
};

/// Wire message failed validation (length, range, unit membership, encoding).
struct MalformedMessageError : Error {
  using Error::Error;
};

/// Session misuse: length mismatch against enrolled state, wrong round, etc.
struct ProtocolError : Error {
  using Error::Error;
};

/// The intercepted round-3 value was not computed against the forged vector.
struct ForgeryMismatchError : Error {
  using Error::Error;
};

struct StateError : Error {
  using Error::Error;
};

struct ReplayError : Error {
  using Error::Error;
};

/// File-system failure; message carries the path.
struct IoError : Error {
  using Error::Error;
};

}  // namespace pbauth
