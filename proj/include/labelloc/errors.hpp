#pragma once

#include <stdexcept>
#include <string>

namespace labelloc {

/// Base class for every error raised by the library. `code()` is a stable
/// machine-readable identifier used by the CLI error document.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define LABELLOC_DEFINE_ERROR(Name, code_str)                         \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(code_str, what) {} \
  };

LABELLOC_DEFINE_ERROR(InvalidArgument, "invalid_argument")
LABELLOC_DEFINE_ERROR(OutOfBounds, "out_of_bounds")
LABELLOC_DEFINE_ERROR(ParseError, "parse_error")
LABELLOC_DEFINE_ERROR(ValidationError, "validation_error")
LABELLOC_DEFINE_ERROR(IoError, "io_error")
LABELLOC_DEFINE_ERROR(UnsampleableMap, "unsampleable_map")
LABELLOC_DEFINE_ERROR(GenerationError, "generation_error")
LABELLOC_DEFINE_ERROR(InvalidPose, "invalid_pose")
LABELLOC_DEFINE_ERROR(InvalidTrajectory, "invalid_trajectory")
LABELLOC_DEFINE_ERROR(DetectionUnavailable, "detection_unavailable")

#undef LABELLOC_DEFINE_ERROR

}  // namespace labelloc
