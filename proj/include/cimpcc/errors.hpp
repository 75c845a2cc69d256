#pragma once

#include <stdexcept>
#include <string>

namespace cimpcc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CIMPCC_DECLARE_ERROR(Name)                \
  class Name : public Error {                     \
   public:                                        \
    using Error::Error;                           \
  }

// track_model
CIMPCC_DECLARE_ERROR(ParseError);
CIMPCC_DECLARE_ERROR(DegenerateTrack);
CIMPCC_DECLARE_ERROR(NumericalDegeneracy);
CIMPCC_DECLARE_ERROR(InvalidWindow);

// velocity_map
CIMPCC_DECLARE_ERROR(DomainError);
CIMPCC_DECLARE_ERROR(InvalidFactor);

// vehicle_model
CIMPCC_DECLARE_ERROR(SteeringSingularity);

// planner / nlp_solver
CIMPCC_DECLARE_ERROR(DimensionMismatch);
CIMPCC_DECLARE_ERROR(ConfigurationError);
CIMPCC_DECLARE_ERROR(SolverFailure);
CIMPCC_DECLARE_ERROR(OffTrack);

// race_harness
CIMPCC_DECLARE_ERROR(NoCompletedLaps);
CIMPCC_DECLARE_ERROR(RaceAborted);

#undef CIMPCC_DECLARE_ERROR

}  // namespace cimpcc
