#pragma once

#include <stdexcept>
#include <string>

namespace semistable {

// Base class for all library errors. CLI maps these to exit code 2.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct SchemaError : Error {
    SchemaError(const std::string& path, const std::string& reason)
        : Error("schema error at " + path + ": " + reason), path(path), reason(reason) {}
    std::string path;
    std::string reason;
};

struct NotSublattice : Error {
    using Error::Error;
};

struct ZeroVector : Error {
    using Error::Error;
};

struct NotStrictlyConvex : Error {
    using Error::Error;
};

struct RankMismatch : Error {
    using Error::Error;
};

struct NotSimplicial : Error {
    using Error::Error;
};

struct NotAFan : Error {
    using Error::Error;
};

struct PointOnBoundary : Error {
    using Error::Error;
};

struct PointOutside : Error {
    using Error::Error;
};

struct PreconditionFailed : Error {
    using Error::Error;
};

// Raised when an exact enumeration exceeds its size guard.
struct EnumerationLimit : Error {
    using Error::Error;
};

// Internal invariant violation; indicates a bug, not bad input.
struct InternalError : Error {
    using Error::Error;
};

}  // namespace semistable
