#ifndef HYPISS_ERRORS_HPP
#define HYPISS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hypiss {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct SpeedSignViolation : Error { using Error::Error; };
struct SpeedCollision : Error { using Error::Error; };
struct EvaluationFailure : Error { using Error::Error; };
struct NonPositiveDelta : Error { using Error::Error; };
struct NonPositiveInit : Error { using Error::Error; };
struct BlowUpPresent : Error { using Error::Error; };
struct NonPositiveMu : Error { using Error::Error; };
struct NonPositiveK : Error { using Error::Error; };
struct BeyondBlowUp : Error { using Error::Error; };
struct CFLViolation : Error { using Error::Error; };
struct CompatibilityViolation : Error { using Error::Error; };
struct NonDiagonalQuasilinear : Error { using Error::Error; };
struct HorizonMismatch : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

} // namespace hypiss

#endif
