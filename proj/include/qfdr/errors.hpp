// errors.hpp - exception hierarchy shared by all qfdr modules

#pragma once

#include <stdexcept>
#include <string>

namespace qfdr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An argument broke a documented structural contract (non-Hermitian input,
// rates violating KMS, generator without a Gibbs fixed point, ...).
struct ContractViolation : Error {
    using Error::Error;
};

// A scalar parameter lies outside its admissible range.
struct DomainError : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Linear-algebra failure: a generator whose zero eigenvalue is not simple,
// a metric that vanishes on a geodesic segment.
struct SingularityError : Error {
    using Error::Error;
};

// An iterative refinement did not reach its tolerance within its budget.
struct ConvergenceError : Error {
    using Error::Error;
};

// Configuration problem detected by the CLI layer; carries the offending field.
struct ValidationError : Error {
    ValidationError(std::string field_name, const std::string& what)
        : Error(what), field(std::move(field_name)) {}
    std::string field;
};

} // namespace qfdr
