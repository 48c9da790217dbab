#include "transposit/errors.hpp"

#include <cstdio>

namespace transposit {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SyntaxError: return "SyntaxError";
        case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
        case ErrorKind::DuplicateCoordinate: return "DuplicateCoordinate";
        case ErrorKind::MissingSection: return "MissingSection";
        case ErrorKind::ArityMismatch: return "ArityMismatch";
        case ErrorKind::InvalidModel: return "InvalidModel";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::SingularFrame: return "SingularFrame";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::OffManifold: return "OffManifold";
        case ErrorKind::InitOffManifold: return "InitOffManifold";
        case ErrorKind::NotVoronetsForm: return "NotVoronetsForm";
        case ErrorKind::NotChaplyginForm: return "NotChaplyginForm";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::ProjectionFailed: return "ProjectionFailed";
        case ErrorKind::UnknownModel: return "UnknownModel";
        case ErrorKind::UnknownOracle: return "UnknownOracle";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ParseError::ParseError(ErrorKind kind, std::size_t position, const std::string& message,
                       std::vector<std::string> expected)
    : Error(kind, message + " at offset " + std::to_string(position)),
      position_(position),
      detail_(message),
      expected_(std::move(expected)) {}

DomainError::DomainError(const std::string& what, const std::string& subexpr)
    : Error(ErrorKind::DomainError, what + " in " + subexpr), subexpr_(subexpr) {}

static std::string format_det(double det, double threshold) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "|detW| = %.3e <= %.3e", det < 0 ? -det : det, threshold);
    return buf;
}

SingularFrame::SingularFrame(double det, double threshold)
    : Error(ErrorKind::SingularFrame, format_det(det, threshold)), det_(det) {}

}  // namespace transposit
