#pragma once

#include <stdexcept>
#include <string>

namespace latfuse {

// Violated precondition or malformed input. CLI maps this to exit code 2.
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure (non-convergent quadrature, weight underflow, step-cap
// exceeded). CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace latfuse
