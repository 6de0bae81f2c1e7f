#include "invqre/error.hpp"

namespace invqre {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonPositiveLambda: return "NonPositiveLambda";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::EigendecompositionFailure: return "EigendecompositionFailure";
        case ErrorKind::DecompositionFailure: return "DecompositionFailure";
        case ErrorKind::NonPositiveStrategy: return "NonPositiveStrategy";
        case ErrorKind::ZeroAreaTotal: return "ZeroAreaTotal";
        case ErrorKind::InvalidGeometry: return "InvalidGeometry";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace invqre
