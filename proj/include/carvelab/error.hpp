#pragma once

#include <stdexcept>
#include <string>

namespace carvelab {

/// Base class for every domain error raised by the library. The CLI maps
/// these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CARVELAB_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// netspec
CARVELAB_DEFINE_ERROR(ParseError);
CARVELAB_DEFINE_ERROR(CycleError);
CARVELAB_DEFINE_ERROR(DanglingReference);
CARVELAB_DEFINE_ERROR(DimensionMismatch);
CARVELAB_DEFINE_ERROR(ShapeError);

// arrangement / carver
CARVELAB_DEFINE_ERROR(DegenerateBox);
CARVELAB_DEFINE_ERROR(ExactArithmeticOverflow);
CARVELAB_DEFINE_ERROR(SolverTolerance);
CARVELAB_DEFINE_ERROR(InvalidThresholds);
CARVELAB_DEFINE_ERROR(ResolutionTooCoarse);
CARVELAB_DEFINE_ERROR(DivisibilityError);
CARVELAB_DEFINE_ERROR(UnsupportedNeuron);

// polyland
CARVELAB_DEFINE_ERROR(PatternUnrealizable);
CARVELAB_DEFINE_ERROR(NonSymmetric);
CARVELAB_DEFINE_ERROR(NonUnitDirection);
CARVELAB_DEFINE_ERROR(PreconditionViolation);

// ensembles
CARVELAB_DEFINE_ERROR(DegenerateFit);
CARVELAB_DEFINE_ERROR(InvalidProbability);

// spinglass
CARVELAB_DEFINE_ERROR(ConstraintViolation);
CARVELAB_DEFINE_ERROR(Diverged);

// satlab
CARVELAB_DEFINE_ERROR(InvalidSize);

// rendering
CARVELAB_DEFINE_ERROR(EmptyGeometry);

#undef CARVELAB_DEFINE_ERROR

}  // namespace carvelab
