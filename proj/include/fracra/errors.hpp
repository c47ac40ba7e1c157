#pragma once

#include <stdexcept>
#include <string>

namespace fracra {

/// Input violates a documented precondition (bad parameter, malformed file, size mismatch).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure broke down (eigensolver, factorization, inner solve).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw ValidationError(message);
}

}  // namespace detail
}  // namespace fracra
