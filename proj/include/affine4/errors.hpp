#pragma once

#include <stdexcept>
#include <string>

namespace affine4 {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define AFFINE4_DEFINE_ERROR(Name)                                       \
    class Name : public Error {                                          \
    public:                                                              \
        using Error::Error;                                              \
        const char* kind() const noexcept override { return #Name; }     \
    };

// jets
AFFINE4_DEFINE_ERROR(DegenerateDivisor)
AFFINE4_DEFINE_ERROR(DomainError)
AFFINE4_DEFINE_ERROR(InvalidOrder)
// expr
AFFINE4_DEFINE_ERROR(UnboundVariable)
// linalg / pencil
AFFINE4_DEFINE_ERROR(SingularFrame)
AFFINE4_DEFINE_ERROR(SingularTransform)
// immersion
AFFINE4_DEFINE_ERROR(InsufficientOrder)
AFFINE4_DEFINE_ERROR(NotNormalized)
// families
AFFINE4_DEFINE_ERROR(DegenerateCurve)
AFFINE4_DEFINE_ERROR(DegenerateCoefficient)
AFFINE4_DEFINE_ERROR(InvalidFamily)
// scene files and command line input
AFFINE4_DEFINE_ERROR(InputError)

#undef AFFINE4_DEFINE_ERROR

/// Located parse failure for the expression language.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::string expected, std::string found)
        : Error("syntax error at offset " + std::to_string(offset) + ": expected " + expected +
                ", found " + found),
          offset_(offset), expected_(std::move(expected)), found_(std::move(found)) {}

    const char* kind() const noexcept override { return "SyntaxError"; }
    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }
    const std::string& found() const noexcept { return found_; }

private:
    std::size_t offset_;
    std::string expected_;
    std::string found_;
};

}  // namespace affine4
