#pragma once

#include <stdexcept>
#include <string>

namespace scvtfv {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SCVTFV_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

// geometry
SCVTFV_DEFINE_ERROR(AntipodalPoint)
SCVTFV_DEFINE_ERROR(DegeneratePolygon)
SCVTFV_DEFINE_ERROR(DegenerateArc)
// grid
SCVTFV_DEFINE_ERROR(LevelTooLarge)
SCVTFV_DEFINE_ERROR(DegenerateCell)
SCVTFV_DEFINE_ERROR(FormatError)
SCVTFV_DEFINE_ERROR(IoError)
// reconstruction
SCVTFV_DEFINE_ERROR(RankDeficientStencil)
SCVTFV_DEFINE_ERROR(StencilTooSmall)
// time stepping / limiter
SCVTFV_DEFINE_ERROR(NonFiniteField)
SCVTFV_DEFINE_ERROR(ZeroWind)
SCVTFV_DEFINE_ERROR(InvalidTimeStep)
// test cases
SCVTFV_DEFINE_ERROR(UnsupportedWind)
// wind reconstruction
SCVTFV_DEFINE_ERROR(RankDeficientSamples)
// metrics
SCVTFV_DEFINE_ERROR(ZeroReference)
SCVTFV_DEFINE_ERROR(NonPositiveError)
// experiments
SCVTFV_DEFINE_ERROR(ConfigError)

#undef SCVTFV_DEFINE_ERROR

}  // namespace scvtfv
