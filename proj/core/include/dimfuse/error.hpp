#pragma once

#include <stdexcept>
#include <string>

namespace dimfuse {

/// Base for every failure the toolkit reports as a domain error (CLI exit 1).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that parses but violates a contract (bad manifest row, invalid matrix).
class ValidationError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NoEvidenceError : public DomainError {
 public:
  explicit NoEvidenceError(const std::string& site_id)
      : DomainError(site_id.empty() ? "no evidence for site"
                                    : "no evidence for site '" + site_id + "'") {}
};

}  // namespace dimfuse
