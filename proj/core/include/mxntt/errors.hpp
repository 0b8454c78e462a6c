#pragma once

#include <stdexcept>
#include <string>

namespace mxntt {

// Unsupported parameter combinations, values outside an operation's domain.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Operand shape mismatches.
class DimensionError : public DomainError {
public:
    explicit DimensionError(const std::string& what) : DomainError(what) {}
};

// Value not representable in the requested balanced digit count.
class RecodeOverflowError : public DomainError {
public:
    explicit RecodeOverflowError(const std::string& what) : DomainError(what) {}
};

// Structurally malformed input (bad file, dangling graph reference). Distinct
// from a rule violation, which is reported as data, not thrown.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mxntt
