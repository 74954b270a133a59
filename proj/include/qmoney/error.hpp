#pragma once

#include <stdexcept>
#include <string>

namespace qmoney {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidParameters : public Error {
 public:
  using Error::Error;
};

// A register (or token) was used after a destructive operation.
class ConsumedRegister : public Error {
 public:
  ConsumedRegister() : Error("register already consumed") {}
};

class UnknownHandle : public Error {
 public:
  using Error::Error;
};

// The rerandomization program returned bottom (serial failed the test gate).
class RerandomizationRefused : public Error {
 public:
  RerandomizationRefused() : Error("rerandomization refused: serial failed the ciphertext test") {}
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmoney
