#pragma once

#include <stdexcept>
#include <string>

namespace vigil {

// Base class for all errors raised by the pipeline. Each condition gets its
// own type so callers can catch precisely.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define VIGIL_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& msg) : Error(msg) {}     \
  }

// model / serialization
VIGIL_DEFINE_ERROR(InvariantViolation);
VIGIL_DEFINE_ERROR(BadMagic);
VIGIL_DEFINE_ERROR(Truncated);
VIGIL_DEFINE_ERROR(TrailingBytes);

// runtime
VIGIL_DEFINE_ERROR(CycleDetected);
VIGIL_DEFINE_ERROR(UnknownNode);
VIGIL_DEFINE_ERROR(BadGroupingKey);
VIGIL_DEFINE_ERROR(MixedRoots);
VIGIL_DEFINE_ERROR(UnknownRoot);
VIGIL_DEFINE_ERROR(MissingKey);

// ingest
VIGIL_DEFINE_ERROR(DecodeError);
VIGIL_DEFINE_ERROR(SourceGone);

// bgsub
VIGIL_DEFINE_ERROR(DimsMismatch);
VIGIL_DEFINE_ERROR(Uninitialized);

// detect
VIGIL_DEFINE_ERROR(BadWindowSize);
VIGIL_DEFINE_ERROR(BadModelFile);

// annotate
VIGIL_DEFINE_ERROR(MismatchedIdentity);

// sink / chunks
VIGIL_DEFINE_ERROR(CrcMismatch);
VIGIL_DEFINE_ERROR(CorruptFrameFile);
VIGIL_DEFINE_ERROR(ZeroTotal);
VIGIL_DEFINE_ERROR(NoRunFound);
VIGIL_DEFINE_ERROR(DiskFull);
VIGIL_DEFINE_ERROR(PermissionDenied);
VIGIL_DEFINE_ERROR(IoError);

// cli
VIGIL_DEFINE_ERROR(ConfigError);

#undef VIGIL_DEFINE_ERROR

}  // namespace vigil
