#pragma once

#include <stdexcept>
#include <string>

namespace tmpc {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (bad index, score below threshold, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// An operation needed segment scores that the trajectory does not carry.
class UnscoredTrajectoryError : public Error {
public:
    using Error::Error;
};

// A generation step produced (or was given) an empty/whitespace-only text.
class EmptyResponseError : public Error {
public:
    using Error::Error;
};

// A remote backend failed: transport error, bad status, exhausted retries.
class BackendError : public Error {
public:
    using Error::Error;
};

// Authentication rejected by the endpoint. Never carries the credential itself.
class CredentialError : public BackendError {
public:
    using BackendError::BackendError;
};

// The endpoint answered, but not in the shape the wire format promises.
class MalformedBodyError : public BackendError {
public:
    using BackendError::BackendError;
};

// A planning run could not produce a single usable rollout.
class DegenerateRunError : public Error {
public:
    using Error::Error;
};

// An exhaustive search would exceed the tractability guard.
class IntractableSearchError : public Error {
public:
    using Error::Error;
};

// The sandbox itself could not be set up; distinct from a failing candidate.
class InfrastructureError : public Error {
public:
    using Error::Error;
};

} // namespace tmpc
