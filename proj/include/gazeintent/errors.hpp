#pragma once

#include <stdexcept>
#include <string>

namespace gazeintent {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be processed (bad shapes, single-class sets, corrupt files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

#define GAZEINTENT_DEFINE_ERROR(name, base) \
  class name : public base {                \
   public:                                  \
    using base::base;                       \
  }

// task world
GAZEINTENT_DEFINE_ERROR(LayoutError, ConfigError);
GAZEINTENT_DEFINE_ERROR(HeldPieceError, Error);
GAZEINTENT_DEFINE_ERROR(NoHeldPieceError, Error);
GAZEINTENT_DEFINE_ERROR(IllegalPickError, Error);

// gaze attention
GAZEINTENT_DEFINE_ERROR(EmptyTraceError, DataError);

// synthetic user
GAZEINTENT_DEFINE_ERROR(IllegalTargetError, Error);

// kernel svm
GAZEINTENT_DEFINE_ERROR(DegenerateDataError, DataError);
GAZEINTENT_DEFINE_ERROR(DimensionMismatchError, DataError);
GAZEINTENT_DEFINE_ERROR(UncalibratedModelError, Error);

// intent predictor
GAZEINTENT_DEFINE_ERROR(EmptySlotError, Error);
GAZEINTENT_DEFINE_ERROR(IllegalCandidateError, Error);
GAZEINTENT_DEFINE_ERROR(NoCandidatesError, Error);

// evaluation
GAZEINTENT_DEFINE_ERROR(InsufficientTraceError, DataError);
GAZEINTENT_DEFINE_ERROR(GridMismatchError, DataError);

// session service
GAZEINTENT_DEFINE_ERROR(ModelLoadError, DataError);
GAZEINTENT_DEFINE_ERROR(OutOfOrderError, Error);
GAZEINTENT_DEFINE_ERROR(ProtocolError, Error);
GAZEINTENT_DEFINE_ERROR(VersionError, DataError);
GAZEINTENT_DEFINE_ERROR(CorruptLogError, DataError);
GAZEINTENT_DEFINE_ERROR(RefusedError, DataError);

#undef GAZEINTENT_DEFINE_ERROR

}  // namespace gazeintent
