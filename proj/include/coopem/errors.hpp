// errors.hpp — Exception types raised by the library

#pragma once

#include <stdexcept>
#include <string>

namespace coopem {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define COOPEM_ERROR(Name)                                        \
    struct Name : Error {                                         \
        explicit Name(const std::string& what) : Error(what) {}   \
    }

COOPEM_ERROR(InvalidArgument);
COOPEM_ERROR(NegativeFrequency);
COOPEM_ERROR(QuadratureFailure);
COOPEM_ERROR(DegenerateSteadyState);
COOPEM_ERROR(NoPumpNoDecay);
COOPEM_ERROR(BondOverflow);
COOPEM_ERROR(GridMismatch);
COOPEM_ERROR(ZeroIntensity);
COOPEM_ERROR(NotStationary);
COOPEM_ERROR(DomainError);
COOPEM_ERROR(NonConvergence);
COOPEM_ERROR(GridTooCoarse);
COOPEM_ERROR(DisjointSupport);
COOPEM_ERROR(CacheError);

#undef COOPEM_ERROR

}  // namespace coopem
