#pragma once

#include <stdexcept>
#include <string>

namespace mrf {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files (FASTA, TSV grids, JSON documents).
struct ParseError : Error {
  using Error::Error;
};

// Violated domain invariants or operation preconditions.
struct ValidationError : Error {
  using Error::Error;
};

// The query cannot hold the template's strands at all (no legal placement).
// Separate from ValidationError so callers can report "no hit" instead of
// "bad input".
struct InfeasibleError : ValidationError {
  using ValidationError::ValidationError;
};

// Filesystem-level failures (missing files, short writes).
struct IoError : Error {
  using Error::Error;
};

}  // namespace mrf
