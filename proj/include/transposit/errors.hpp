#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace transposit {

enum class ErrorKind {
    SyntaxError,
    UnknownIdentifier,
    DuplicateCoordinate,
    MissingSection,
    ArityMismatch,
    InvalidModel,
    DomainError,
    SingularFrame,
    SingularSystem,
    OffManifold,
    InitOffManifold,
    NotVoronetsForm,
    NotChaplyginForm,
    RankDeficient,
    ProjectionFailed,
    UnknownModel,
    UnknownOracle,
    InvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Base error for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parse failure at a byte offset of the source text.
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, std::size_t position, const std::string& message,
               std::vector<std::string> expected = {});
    std::size_t position() const noexcept { return position_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }
    /// Message without the offset suffix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t position_;
    std::string detail_;
    std::vector<std::string> expected_;
};

/// Evaluation failure; carries the printed offending sub-expression.
class DomainError : public Error {
public:
    DomainError(const std::string& what, const std::string& subexpr);
    const std::string& subexpression() const noexcept { return subexpr_; }

private:
    std::string subexpr_;
};

/// Frame matrix too close to singular.
class SingularFrame : public Error {
public:
    SingularFrame(double det, double threshold);
    double det() const noexcept { return det_; }

private:
    double det_;
};

}  // namespace transposit
