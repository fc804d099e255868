#pragma once

#include <stdexcept>
#include <string>

namespace coalition_nash {

// Base class for every error the library throws on contract violations.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- topology ----
struct InvalidEdge : Error {
    using Error::Error;
};
struct DisconnectedGraph : Error {
    using Error::Error;
};

// ---- numerics ----
struct NotSchur : Error {
    using Error::Error;
};
struct NotSymmetric : Error {
    using Error::Error;
};
struct MultipleZeroEigenvalues : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};

// ---- game ----
struct NotStronglyMonotone : Error {
    using Error::Error;
};
struct UnsupportedObjective : Error {
    using Error::Error;
};
struct SingularKKT : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};

// ---- engine ----
struct DegenerateTopology : Error {
    using Error::Error;
};
struct Diverged : Error {
    long iteration;
    Diverged(const std::string& what, long k) : Error(what), iteration(k) {}
};

// ---- harness ----
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace coalition_nash
