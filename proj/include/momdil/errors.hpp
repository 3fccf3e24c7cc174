#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace momdil {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MOMDIL_DEFINE_ERROR(Name)                   \
    class Name : public Error {                     \
    public:                                         \
        using Error::Error;                         \
    }

// linear algebra
MOMDIL_DEFINE_ERROR(DimensionMismatch);
MOMDIL_DEFINE_ERROR(NonHermitianInput);
MOMDIL_DEFINE_ERROR(NotPSD);

// words / polynomials
MOMDIL_DEFINE_ERROR(CapacityExceeded);
MOMDIL_DEFINE_ERROR(AlphabetMismatch);
MOMDIL_DEFINE_ERROR(GeneratorOutOfRange);
MOMDIL_DEFINE_ERROR(EmptyInput);
MOMDIL_DEFINE_ERROR(RangeError);

// ensembles / files
MOMDIL_DEFINE_ERROR(ParseError);
MOMDIL_DEFINE_ERROR(ValidationError);

// kernel / dilation pipeline
MOMDIL_DEFINE_ERROR(InsufficientDepth);
MOMDIL_DEFINE_ERROR(IllConditioned);
MOMDIL_DEFINE_ERROR(NotContractive);
MOMDIL_DEFINE_ERROR(DepthExceeded);

#undef MOMDIL_DEFINE_ERROR

/// Polynomial text that does not match the grammar. Carries the byte offset
/// of the offending token and the set of tokens that would have been accepted.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, std::vector<std::string> expected, const std::string& found)
        : Error(format(position, expected, found)), position_(position), expected_(std::move(expected)) {}

    std::size_t position() const noexcept { return position_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string format(std::size_t pos, const std::vector<std::string>& expected, const std::string& found) {
        std::string msg = "syntax error at position " + std::to_string(pos) + ": expected ";
        for (std::size_t k = 0; k < expected.size(); ++k) {
            if (k) msg += k + 1 == expected.size() ? " or " : ", ";
            msg += expected[k];
        }
        msg += ", found " + found;
        return msg;
    }

    std::size_t position_;
    std::vector<std::string> expected_;
};

} // namespace momdil
