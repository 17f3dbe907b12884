#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

// Input, configuration, or precondition problems. CLI maps these to exit 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical trouble: accuracy contract violated, integral did not converge,
// iteration failed to converge. CLI maps these to exit 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qmem
