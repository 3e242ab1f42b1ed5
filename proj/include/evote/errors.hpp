#pragma once

#include <stdexcept>
#include <string>

namespace evote {

// Base of every error the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid group / scheme parameters (non-prime order, p too small, ...).
struct ParameterError : Error {
  using Error::Error;
};

// Caller violated a precondition (mismatched params, wrong arity, vote out of domain).
struct UsageError : Error {
  using Error::Error;
};

// Malformed serialized input.
struct DecodeError : Error {
  using Error::Error;
};

// A brute-force oracle would exceed its enumeration budget.
struct ResourceError : Error {
  using Error::Error;
};

// prove() was handed a witness the relation rejects.
struct WitnessError : Error {
  using Error::Error;
};

// Bulletin board chain or record integrity failure.
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace evote
