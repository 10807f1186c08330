#pragma once

#include <stdexcept>
#include <string>

namespace carl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// model
class MalformedModel : public Error {
 public:
  using Error::Error;
};
class BadDistribution : public Error {
 public:
  using Error::Error;
};
class NonpositivePrimaryCost : public Error {
 public:
  using Error::Error;
};
class OpenPolicy : public Error {
 public:
  using Error::Error;
};
class ImproperPolicy : public Error {
 public:
  using Error::Error;
};
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// linear algebra and LP
class SingularMatrix : public Error {
 public:
  using Error::Error;
};
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

// heuristics and search
class UnreachableGoal : public Error {
 public:
  using Error::Error;
};
class NoApplicableAction : public Error {
 public:
  using Error::Error;
};
class Nonconvergence : public Error {
 public:
  using Error::Error;
};

// outer optimisation over lambda
class UnboundedCoordinate : public Error {
 public:
  using Error::Error;
};
class IterationCapExceeded : public Error {
 public:
  using Error::Error;
};

// policy extraction
class EmptySupport : public Error {
 public:
  using Error::Error;
};
class ExtractionInfeasible : public Error {
 public:
  using Error::Error;
};
/// The CSSP admits no policy satisfying its secondary-cost bounds.
class Infeasible : public Error {
 public:
  using Error::Error;
};

// domains
class BadSpec : public Error {
 public:
  using Error::Error;
};

}  // namespace carl
