#pragma once

#include <stdexcept>
#include <string>

namespace boltz {

/** Base class for all solver errors. */
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Configuration or input rejected; `path` is the offending field (dotted). */
struct ValidationError : SolverError {
    explicit ValidationError(const std::string& field_path, const std::string& what)
        : SolverError(field_path + ": " + what), path(field_path) {}
    std::string path;
};

/** Velocity/spatial grid parameters violate the grid contract. */
struct InvalidGrid : SolverError {
    using SolverError::SolverError;
};

/** Adaptive quadrature failed to reach the requested tolerance. */
struct QuadratureFailure : SolverError {
    using SolverError::SolverError;
};

/** Gram matrix of the conservation constraints is numerically singular. */
struct SingularGram : SolverError {
    using SolverError::SolverError;
};

/** A distribution left the representable range (NaN/Inf or runaway norm). */
struct BlowUp : SolverError {
    using SolverError::SolverError;
};

/** A spatial cell holds no mass; moments are undefined there. */
struct EmptyCell : SolverError {
    using SolverError::SolverError;
};

/** Weight cache file does not match the requested grid/model. */
struct CacheMismatch : SolverError {
    using SolverError::SolverError;
};

/** A scalar root lies outside the search bracket. */
struct OutOfBracket : SolverError {
    using SolverError::SolverError;
};

/** An iterative solver exhausted its iteration budget. */
struct NoConvergence : SolverError {
    using SolverError::SolverError;
};

}  // namespace boltz
