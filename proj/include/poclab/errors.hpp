#pragma once

#include <stdexcept>
#include <string>

namespace poclab {

// Raised when a Renyi tilt q*inv(S1) + (1-q)*inv(S2) is not positive definite
// and the caller asked for an object that only exists in the finite case.
class DivergentError : public std::domain_error {
  public:
    explicit DivergentError(const std::string& what) : std::domain_error(what) {}
};

// A Markov chain produced a non-finite energy or could not be tuned.
class SamplerError : public std::runtime_error {
  public:
    explicit SamplerError(const std::string& what) : std::runtime_error(what) {}
};

class ConvergenceError : public std::runtime_error {
  public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace poclab
