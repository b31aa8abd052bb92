#pragma once

#include <stdexcept>
#include <string>

namespace exitmoments {

// Base class for every failure the library reports. Callers that only need
// "did it work" can catch this; the derived types exist so tests and the CLI
// can tell configuration mistakes from numerical breakdowns.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfRange : Error {
    using Error::Error;
};
struct InvalidProfile : Error {
    using Error::Error;
};
struct NonPositiveH : Error {
    using Error::Error;
};
struct SingularAtZero : Error {
    using Error::Error;
};
struct EtaNonPositive : Error {
    using Error::Error;
};
struct NegativeOrder : Error {
    using Error::Error;
};
struct DegenerateCap : Error {
    using Error::Error;
};
struct BracketFailure : Error {
    using Error::Error;
};
struct QuadratureUnderflow : Error {
    using Error::Error;
};
struct HorizonTooSmall : Error {
    using Error::Error;
};
struct InvalidC : Error {
    using Error::Error;
};
struct NonPositiveB : Error {
    using Error::Error;
};
struct DegenerateCone : Error {
    using Error::Error;
};
struct StepTooLarge : Error {
    using Error::Error;
};

}  // namespace exitmoments
