#pragma once

#include <stdexcept>
#include <string>

namespace hydrofcr {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration value or inconsistent scenario setup.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (bad header, bad field, bad number).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Missing samples in a trace that must be gap-free.
class GapError : public Error {
public:
    using Error::Error;
};

/// Value outside its physically admissible range.
class RangeError : public Error {
public:
    using Error::Error;
};

class TraceTooShort : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class AllZeroResiduals : public Error {
public:
    using Error::Error;
};

class WindowLargerThanLog : public Error {
public:
    using Error::Error;
};

class MissingBaseline : public Error {
public:
    using Error::Error;
};

/// The battery DC voltage left its hard guard band; the scenario is
/// mis-sized and the run must abort.
class VoltageWindowViolated : public Error {
public:
    using Error::Error;
};

} // namespace hydrofcr
