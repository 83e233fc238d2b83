#pragma once

#include <stdexcept>
#include <string>

namespace dpglmb {

/// Raised when a caller breaks a documented precondition (dimension mismatch,
/// out-of-range argument, unknown measurement index, ...).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a numerical routine cannot proceed: non positive-definite
/// innovation covariance, failed Cholesky, zero total mass, etc.
class NumericalDegeneracy : public std::runtime_error {
public:
    explicit NumericalDegeneracy(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dpglmb
