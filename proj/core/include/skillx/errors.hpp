#pragma once

#include <stdexcept>
#include <string>

namespace skillx {

/// Base class for all library errors. Subtypes map 1:1 onto the error
/// contracts of the public operations.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Gateway / transport
class TransportError : public Error { using Error::Error; };
class MalformedResponse : public Error { using Error::Error; };

// Numeric substrate
class DimensionMismatch : public Error { using Error::Error; };
class ZeroVector : public Error { using Error::Error; };

// Library update algebra
class DuplicateName : public Error { using Error::Error; };
class UnknownTarget : public Error { using Error::Error; };
class NameCollision : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };

// LLM response parsing
class ParseError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class EmptyPlan : public Error { using Error::Error; };

// Index
class EmptyIndex : public Error { using Error::Error; };

// Persistence
class IoError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class VersionError : public Error { using Error::Error; };
class DuplicateTool : public Error { using Error::Error; };

// Environment
class UnknownTool : public Error { using Error::Error; };
class UnknownTask : public Error { using Error::Error; };
class EnvironmentError : public Error { using Error::Error; };

}  // namespace skillx
