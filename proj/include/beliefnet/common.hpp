#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace beliefnet {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProvenanceMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse failure in a text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, long line)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// Formats a double as decimal text with 17 significant digits, enough to
/// round-trip any IEEE-754 binary64 value exactly.
std::string sig17(double v);

/// SplitMix64 finalizer; used to derive independent per-stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `index` derived from `master`. Distinct indices give
/// uncorrelated mt19937_64 seeds, so replicates can run in any order or
/// thread layout and still draw identical values.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace beliefnet
