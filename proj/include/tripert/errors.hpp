#pragma once

#include <stdexcept>
#include <string>

namespace tripert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input/model errors. The CLI maps these to exit code 2.
class ParameterError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class DriftError : public Error { using Error::Error; };
class NoRootError : public Error { using Error::Error; };
class AssumptionError : public Error { using Error::Error; };
class UnboundedEnvelopeError : public Error { using Error::Error; };
class DegenerateError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };

// Numerical / estimation errors.
class NonConvergence : public Error { using Error::Error; };
class EmptyGrid : public Error { using Error::Error; };
class SingularDesign : public Error { using Error::Error; };

}  // namespace tripert
