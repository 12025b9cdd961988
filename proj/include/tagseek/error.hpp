#pragma once

#include <stdexcept>
#include <string>

namespace tagseek {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input file (corpus, embeddings, config).
class LoadError : public Error {
public:
    using Error::Error;
};

/// Black-box evaluation failed (dimension mismatch, unknown id).
class EvalError : public Error {
public:
    using Error::Error;
};

/// A policy could not produce a decision, e.g. every candidate is exhausted.
class PolicyError : public Error {
public:
    using Error::Error;
};

/// Network failure talking to a remote oracle.
class TransportError : public Error {
public:
    using Error::Error;
};

/// The remote oracle answered with something that breaks the oracle contract.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Bad numeric input to the linear-algebra core.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace tagseek
