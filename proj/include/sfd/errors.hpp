#pragma once

#include <stdexcept>
#include <string>

namespace sfd {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input table is missing a required column, or a transform would
// create a column name that already exists.
struct SchemaError : Error {
  using Error::Error;
};

// A cell could not be parsed. Messages cite the 1-based data row.
struct ParseError : Error {
  using Error::Error;
};

// Cross-record consistency violations: duplicate ids, references to
// unknown ids, malformed polygon rings.
struct IntegrityError : Error {
  using Error::Error;
};

// Positions do not form the structure an ordering requires.
struct StructureError : Error {
  using Error::Error;
};

// A parameter value is outside its valid range, or a method was asked
// to run on data that cannot support it.
struct DomainError : Error {
  using Error::Error;
};

// Design matrix is rank deficient. The message names the dependent columns.
struct CollinearityError : Error {
  using Error::Error;
};

// Differencing produced no usable rows (every channel too short).
struct EmptyDesignError : Error {
  using Error::Error;
};

// A numeric procedure could not complete (for example, a resampling
// scheme exhausted its redraw budget).
struct ComputationError : Error {
  using Error::Error;
};

// A file could not be read, written, or atomically replaced.
struct IoError : Error {
  using Error::Error;
};

}  // namespace sfd
