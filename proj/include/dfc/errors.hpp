#pragma once

#include <stdexcept>
#include <string>

namespace dfc {

/// Thrown when a construction is mathematically infeasible for the given
/// inputs (hypothesis of a lemma violated, root not bracketed, ...).
class infeasible_error : public std::runtime_error {
 public:
  explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a search leaves the configured working interval
/// [-domain_bound, domain_bound]; advises enlarging domain_bound.
class saturation_error : public std::runtime_error {
 public:
  explicit saturation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an input file/scenario violates the schema.
class schema_error : public std::runtime_error {
 public:
  explicit schema_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dfc
