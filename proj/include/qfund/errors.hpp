#pragma once

#include <stdexcept>
#include <string>

namespace qf {

/// Input outside an operation's mathematical domain (negative amount, k <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Every project in the pool has a zero matching requirement, so 1/k is undefined.
class NoMatchableProjects : public DomainError {
public:
    NoMatchableProjects() : DomainError("no matchable projects: total QF matching requirement is zero") {}
};

/// Malformed input file (missing header, unparsable config).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened for reading or writing.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qf
