#pragma once

#include <stdexcept>
#include <string>

namespace recon {

// Base class for all errors raised by the pipeline.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A value fails an operation's precondition (bad quaternion norm, tau out of
// range, malformed pose row, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Byte stream is not in the expected container format at all.
class FormatError : public Error {
public:
    using Error::Error;
};

// Container recognized but uses a layout we deliberately do not support
// (wrong dtype, Fortran order, wrong shape, compressed zip member, ...).
class UnsupportedLayout : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Structural invariant of a composite object is violated (count mismatch,
// missing archive member, shape mismatch between tables, empty session).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Resource id already in use.
class ConflictError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Numerically degenerate selection: collinear/coplanar points, look-at with
// coincident eye and target.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

// Scene geometry not visible from a camera where visibility is required.
class VisibilityError : public Error {
public:
    using Error::Error;
};

// Asked for an output that has not been produced yet.
class NotReadyError : public Error {
public:
    using Error::Error;
};

} // namespace recon
