#pragma once

#include <stdexcept>
#include <string>

namespace renalci {

/// Broad failure category; the CLI maps it onto its exit code.
enum class ErrorKind {
  kInput,        // bad files, manifests, configuration, arguments
  kComputation,  // numerics that could not produce a result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define RENALCI_DEFINE_ERROR(Name, Kind)                          \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(Kind, what) {} \
  }

RENALCI_DEFINE_ERROR(DimensionError, ErrorKind::kInput);
RENALCI_DEFINE_ERROR(FormatError, ErrorKind::kInput);
RENALCI_DEFINE_ERROR(ParseError, ErrorKind::kInput);
RENALCI_DEFINE_ERROR(ManifestError, ErrorKind::kInput);
RENALCI_DEFINE_ERROR(ShapeError, ErrorKind::kInput);
RENALCI_DEFINE_ERROR(ConfigError, ErrorKind::kInput);
RENALCI_DEFINE_ERROR(InputError, ErrorKind::kInput);
RENALCI_DEFINE_ERROR(IoError, ErrorKind::kInput);
RENALCI_DEFINE_ERROR(InsufficientTissueError, ErrorKind::kComputation);
RENALCI_DEFINE_ERROR(StatisticsError, ErrorKind::kComputation);
RENALCI_DEFINE_ERROR(DivergenceError, ErrorKind::kComputation);
RENALCI_DEFINE_ERROR(ConditioningError, ErrorKind::kComputation);
RENALCI_DEFINE_ERROR(CapacityError, ErrorKind::kComputation);

#undef RENALCI_DEFINE_ERROR

}  // namespace renalci
