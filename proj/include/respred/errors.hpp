#pragma once

#include <stdexcept>

namespace respred {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct BoundsError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct DegeneracyError : Error { using Error::Error; };
struct ExcitationError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct UnsupportedOrderError : Error { using Error::Error; };
struct GenerationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace respred
