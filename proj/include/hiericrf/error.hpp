#pragma once

#include <stdexcept>
#include <string>

namespace hiericrf {

// Every library failure derives from Error. The category decides the CLI
// exit code: usage problems, bad data/files, or numerical breakdown.
enum class ErrorCategory { kUsage, kData, kNumerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define HIERICRF_DEFINE_ERROR(Name, Category)                 \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& what)                    \
        : Error(ErrorCategory::Category, #Name ": " + what) {} \
  };

HIERICRF_DEFINE_ERROR(InvalidArgument, kUsage)
HIERICRF_DEFINE_ERROR(ParseError, kData)
HIERICRF_DEFINE_ERROR(ValidationError, kData)
HIERICRF_DEFINE_ERROR(UnknownLabel, kData)
HIERICRF_DEFINE_ERROR(LengthMismatch, kData)
HIERICRF_DEFINE_ERROR(DimensionMismatch, kData)
HIERICRF_DEFINE_ERROR(FormatError, kData)
HIERICRF_DEFINE_ERROR(ShapeError, kData)
HIERICRF_DEFINE_ERROR(TruncationError, kData)
HIERICRF_DEFINE_ERROR(InvalidGold, kData)
HIERICRF_DEFINE_ERROR(InvalidSpec, kUsage)
HIERICRF_DEFINE_ERROR(EmptyDataset, kData)
HIERICRF_DEFINE_ERROR(InsufficientData, kData)
HIERICRF_DEFINE_ERROR(NumericalError, kNumerical)
HIERICRF_DEFINE_ERROR(DivergenceError, kNumerical)

#undef HIERICRF_DEFINE_ERROR

}  // namespace hiericrf
