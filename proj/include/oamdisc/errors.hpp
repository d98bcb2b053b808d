#pragma once

#include <stdexcept>
#include <string>

namespace oamdisc {

/// Inputs outside the mathematical or geometric domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed file or configuration content.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by n_min when no finite electron count reaches the threshold.
class UnreachableThreshold : public DomainError {
 public:
  explicit UnreachableThreshold(const std::string& what) : DomainError(what) {}
};

}  // namespace oamdisc
