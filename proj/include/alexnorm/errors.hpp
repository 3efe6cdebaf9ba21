#pragma once

#include <stdexcept>
#include <string>

namespace alexnorm {

/// Base class of every domain error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define ALEXNORM_DEFINE_ERROR(Name)                                            \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {}       \
  }

ALEXNORM_DEFINE_ERROR(NonConvergentTail);
ALEXNORM_DEFINE_ERROR(ToleranceNotMet);
ALEXNORM_DEFINE_ERROR(InvalidSpec);
ALEXNORM_DEFINE_ERROR(NotAbsolutelyIntegrable);
ALEXNORM_DEFINE_ERROR(DegenerateWeight);
ALEXNORM_DEFINE_ERROR(NonIntegrableProduct);
ALEXNORM_DEFINE_ERROR(HypothesisViolated);
ALEXNORM_DEFINE_ERROR(KernelSingularity);
ALEXNORM_DEFINE_ERROR(TailBoundFailure);
ALEXNORM_DEFINE_ERROR(SpecParseError);
ALEXNORM_DEFINE_ERROR(ScenarioFailure);

#undef ALEXNORM_DEFINE_ERROR

}  // namespace alexnorm
