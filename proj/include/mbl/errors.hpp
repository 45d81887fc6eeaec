// errors.hpp — Exception taxonomy for the library's contract violations

#pragma once

#include <stdexcept>
#include <string>

namespace mbl {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Matrix/vector dimension does not match the lattice or operand.
struct InvalidShape final : Error {
    using Error::Error;
};

// A requested feature is outside the supported parameter range.
struct Unsupported final : Error {
    using Error::Error;
};

// Malformed or out-of-range input (bad region, budget exceeded, bad config).
struct InvalidInput final : Error {
    using Error::Error;
};

// A candidate constant of motion fails the commutator check.
struct NotConserved final : Error {
    using Error::Error;
};

// Eigenvalue clustering cannot be decided at the given tolerance.
struct AmbiguousSpectrum final : Error {
    using Error::Error;
};

// A truncated eigenvalue drifted past the midpoint to its parent cluster.
struct ClusterMismatch final : Error {
    using Error::Error;
};

// Flip-observable construction needs at least two eigenspaces.
struct NeedTwoEigenspaces final : Error {
    using Error::Error;
};

// Hamiltonian eigenvectors cannot be assigned to eigenspaces of the constant.
struct AssignmentAmbiguous final : Error {
    using Error::Error;
};

// Spectrum fails the non-degeneracy requirements of the requested operation.
struct DegenerateSpectrum final : Error {
    using Error::Error;
};

// Signalling protocol preconditions violated (overlapping supports).
struct InvalidProtocol final : Error {
    using Error::Error;
};

// Joint eigenvalue selection has empty intersection.
struct EmptyIntersection final : Error {
    using Error::Error;
};

// A verified inequality failed beyond tolerance. The primary scientific alarm.
struct BoundViolation final : Error {
    using Error::Error;
};

}  // namespace mbl
