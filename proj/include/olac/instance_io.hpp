#ifndef OLAC_INSTANCE_IO_HPP
#define OLAC_INSTANCE_IO_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

#include "olac/model.hpp"

namespace olac {

/// Malformed document: `line` is 1-based (0 when unknown), `field` is a path
/// such as "states[3].actions[0].services".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::string field);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Well-formed document describing an invalid instance.
class InvalidInstance : public std::runtime_error {
 public:
  explicit InvalidInstance(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// JSON with top-level `r` and `states: [{probability, actions: [{cost,
/// arrivals, services}]}]`.
NetworkInstance<double> load_instance(const std::string& text);
NetworkInstance<double> load_instance_file(const std::string& path);

/// Same schema; numbers are written in shortest round-trip form.
std::string serialize_instance(const NetworkInstance<double>& instance);

}  // namespace olac

#endif  // OLAC_INSTANCE_IO_HPP
