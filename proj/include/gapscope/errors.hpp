#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gapscope {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GAPSCOPE_ERROR(Name)                 \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

GAPSCOPE_ERROR(InvalidArgument);
GAPSCOPE_ERROR(SingularBlock);
GAPSCOPE_ERROR(IllConditioned);
GAPSCOPE_ERROR(NegativeParameter);
GAPSCOPE_ERROR(NoFeasiblePoint);
GAPSCOPE_ERROR(DimensionMismatch);
GAPSCOPE_ERROR(InconsistentConstraints);
GAPSCOPE_ERROR(ValueDisagreement);
GAPSCOPE_ERROR(AuxiliarySolveFailed);
GAPSCOPE_ERROR(InfeasibleDetected);
GAPSCOPE_ERROR(WitnessNotFound);
GAPSCOPE_ERROR(InsufficientData);
GAPSCOPE_ERROR(NotRankComplement);
GAPSCOPE_ERROR(PreconditionViolated);
GAPSCOPE_ERROR(ThresholdNotMet);
GAPSCOPE_ERROR(DomainError);
GAPSCOPE_ERROR(NotYetFeasible);
GAPSCOPE_ERROR(SolverFailure);

#undef GAPSCOPE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NotInPerturbationSpace : public Error {
 public:
  NotInPerturbationSpace(double residual, const std::string& what)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class TooFewConvergedPoints : public Error {
 public:
  TooFewConvergedPoints(double theta, std::size_t converged)
      : Error("theta " + std::to_string(theta) + ": only " + std::to_string(converged) +
              " converged t-values"),
        theta_(theta) {}
  double theta() const { return theta_; }

 private:
  double theta_;
};

}  // namespace gapscope
