// SPDX-License-Identifier: Apache-2.0

#ifndef MOLACT_ERROR_HPP_
#define MOLACT_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace molact {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported SMILES. `position` is the byte offset of the
/// offending character (or the input length for end-of-input errors).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error("SMILES parse error at " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Structural invariant of a molecular graph violated (bad bond endpoints,
/// duplicate bonds) or an operation that requires a valid molecule got one
/// that is not.
class MoleculeError : public Error {
 public:
  using Error::Error;
};

class UnknownGroupError : public Error {
 public:
  explicit UnknownGroupError(const std::string& name)
      : Error("unknown functional group '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class CatalogError : public Error {
 public:
  using Error::Error;
};

/// Atom environment not covered by the LogP contribution table.
class UnsupportedAtomClass : public Error {
 public:
  UnsupportedAtomClass(int atom_index, const std::string& description)
      : Error("no LogP class for atom " + std::to_string(atom_index) + " (" + description + ")"),
        atom_index_(atom_index) {}
  int atom_index() const noexcept { return atom_index_; }

 private:
  int atom_index_;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class OracleUnavailable : public OracleError {
 public:
  using OracleError::OracleError;
};

class OracleTimeout : public OracleError {
 public:
  using OracleError::OracleError;
};

class OracleMalformedReply : public OracleError {
 public:
  using OracleError::OracleError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace molact

#endif  // MOLACT_ERROR_HPP_
