#pragma once

#include <stdexcept>
#include <string>

namespace coltkf {

// Base for failures of the numerical routines themselves, as opposed to
// misuse of the API (which throws std::invalid_argument). The CLI maps
// NumericError to exit code 2 and everything else to 1.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class NotPositiveSemiDefinite : public NumericError {
public:
  explicit NotPositiveSemiDefinite(const std::string& what) : NumericError(what) {}
};

// Predictive variance fell below the floor that keeps filter gains finite.
class DegenerateVariance : public NumericError {
public:
  explicit DegenerateVariance(const std::string& what) : NumericError(what) {}
};

// Censored variance underflowed; skewness is undefined.
class ZeroVariance : public NumericError {
public:
  explicit ZeroVariance(const std::string& what) : NumericError(what) {}
};

class ShapeMismatch : public NumericError {
public:
  explicit ShapeMismatch(const std::string& what) : NumericError(what) {}
};

class UnknownExperiment : public std::invalid_argument {
public:
  explicit UnknownExperiment(const std::string& what) : std::invalid_argument(what) {}
};

// Every optimizer restart produced a non-finite objective.
class NonFinite : public NumericError {
public:
  explicit NonFinite(const std::string& what) : NumericError(what) {}
};

}  // namespace coltkf
