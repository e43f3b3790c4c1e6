#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mem {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MEM_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

MEM_DEFINE_ERROR(ShapeMismatch)
MEM_DEFINE_ERROR(DegenerateVector)
MEM_DEFINE_ERROR(IndexOutOfRange)
MEM_DEFINE_ERROR(NonScalarOutput)
MEM_DEFINE_ERROR(KTooLarge)
MEM_DEFINE_ERROR(DegenerateSample)
MEM_DEFINE_ERROR(StreamLengthMismatch)
MEM_DEFINE_ERROR(EmptyGroup)
MEM_DEFINE_ERROR(InvalidSpec)
MEM_DEFINE_ERROR(EpisodeFinished)
MEM_DEFINE_ERROR(NotEnoughData)
MEM_DEFINE_ERROR(ConfigInvalid)
MEM_DEFINE_ERROR(ParseError)
MEM_DEFINE_ERROR(IoError)
MEM_DEFINE_ERROR(CheckpointCorrupt)

/// Config field failed validation; `field()` names the offending key.
class ValidationError : public ConfigInvalid {
 public:
  ValidationError(std::string field, const std::string& reason)
      : ConfigInvalid(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

#undef MEM_DEFINE_ERROR

}  // namespace mem
