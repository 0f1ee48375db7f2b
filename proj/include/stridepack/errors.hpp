#pragma once

#include <stdexcept>
#include <string>

namespace stridepack {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a constructor argument violates its bounds
struct InvalidArgument : Error {
  using Error::Error;
};

// non-C array order requested
struct UnsupportedOrder : Error {
  using Error::Error;
};

// degenerate layout (coincident elements) rejected by canonicalization
struct InvalidLayout : Error {
  using Error::Error;
};

struct BufferTooSmall : Error {
  using Error::Error;
};

// unpack target layout describes some byte more than once
struct OverlappingLayout : Error {
  using Error::Error;
};

// no strided form and the fallback path is disabled
struct Unsupported : Error {
  using Error::Error;
};

struct EmptyProfile : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

} // namespace stridepack
