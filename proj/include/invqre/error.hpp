#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace invqre {

enum class ErrorKind {
    DimensionMismatch,
    NonPositiveLambda,
    NonFiniteInput,
    IndexOutOfRange,
    EigendecompositionFailure,
    DecompositionFailure,
    NonPositiveStrategy,
    ZeroAreaTotal,
    InvalidGeometry,
    InvalidArgument,
    ParseError,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type. The kind is stable and
// machine readable; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace invqre
