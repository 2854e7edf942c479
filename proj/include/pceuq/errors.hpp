#pragma once

#include <stdexcept>
#include <string>

namespace pceuq {

// Base class for all library errors. Input/usage problems derive from
// InputError, numerical failures from NumericalError; the CLI maps these to
// exit codes 2 and 3 respectively.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InputError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

#define PCEUQ_DEFINE_ERROR(Name, Base)                                        \
  class Name : public Base {                                                  \
  public:                                                                     \
    explicit Name(const std::string& msg) : Base(std::string(#Name ": ") + msg) {} \
  }

PCEUQ_DEFINE_ERROR(DegenerateSample, InputError);
PCEUQ_DEFINE_ERROR(OutOfRange, InputError);
PCEUQ_DEFINE_ERROR(InvalidInterval, InputError);
PCEUQ_DEFINE_ERROR(SizeOverflow, InputError);
PCEUQ_DEFINE_ERROR(DegreeMismatch, InputError);
PCEUQ_DEFINE_ERROR(LengthMismatch, InputError);
PCEUQ_DEFINE_ERROR(ZeroReference, InputError);
PCEUQ_DEFINE_ERROR(GridTooCoarse, InputError);
PCEUQ_DEFINE_ERROR(InsufficientData, InputError);
PCEUQ_DEFINE_ERROR(SchemaMismatch, InputError);
PCEUQ_DEFINE_ERROR(UnknownBenchmark, InputError);
PCEUQ_DEFINE_ERROR(UnsupportedFamily, InputError);
PCEUQ_DEFINE_ERROR(ParamOutOfRange, InputError);
PCEUQ_DEFINE_ERROR(MissingCopula, InputError);
PCEUQ_DEFINE_ERROR(DimensionUnsupported, InputError);
PCEUQ_DEFINE_ERROR(CsvError, InputError);

PCEUQ_DEFINE_ERROR(QuadratureFailure, NumericalError);
PCEUQ_DEFINE_ERROR(RankDeficient, NumericalError);
PCEUQ_DEFINE_ERROR(NumericalBreakdown, NumericalError);
PCEUQ_DEFINE_ERROR(LeverageOne, NumericalError);
PCEUQ_DEFINE_ERROR(NoFeasibleModel, NumericalError);
PCEUQ_DEFINE_ERROR(ConvergenceFailure, NumericalError);
PCEUQ_DEFINE_ERROR(FitFailure, NumericalError);
PCEUQ_DEFINE_ERROR(SingularStiffness, NumericalError);

#undef PCEUQ_DEFINE_ERROR

}  // namespace pceuq
