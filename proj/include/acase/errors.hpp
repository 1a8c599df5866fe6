#pragma once

#include <stdexcept>
#include <string>

namespace acase {

// Base of every error raised by the toolkit. The CLI maps subclasses of
// DataError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

#define ACASE_DEFINE_ERROR(Name, Base)   \
  class Name : public Base {             \
   public:                               \
    using Base::Base;                    \
  };

ACASE_DEFINE_ERROR(InvalidGraph, DataError)
ACASE_DEFINE_ERROR(InvalidSpec, Error)
ACASE_DEFINE_ERROR(ParseError, DataError)
ACASE_DEFINE_ERROR(ValidationError, DataError)
ACASE_DEFINE_ERROR(FormatError, DataError)
ACASE_DEFINE_ERROR(NonFiniteValue, DataError)
ACASE_DEFINE_ERROR(MissingEmbedding, DataError)
ACASE_DEFINE_ERROR(InsufficientData, DataError)
ACASE_DEFINE_ERROR(MissingFeature, DataError)
ACASE_DEFINE_ERROR(ShapeMismatch, Error)
ACASE_DEFINE_ERROR(EmptyGraph, Error)
ACASE_DEFINE_ERROR(EmptyClass, Error)
ACASE_DEFINE_ERROR(SingleClassTrainingSet, DataError)
ACASE_DEFINE_ERROR(UntrainedModel, Error)

#undef ACASE_DEFINE_ERROR

}  // namespace acase
