#ifndef MINITWISTOR_CORE_HPP
#define MINITWISTOR_CORE_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtw {

using Complex = std::complex<double>;

inline constexpr double kDefaultTol = 1e-9;

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivisionResidualTooLarge : NumericError {
  using NumericError::NumericError;
};
struct TangentialIntersection : NumericError {
  using NumericError::NumericError;
};
struct ConditionStarViolated : NumericError {
  using NumericError::NumericError;
};
struct NewtonDivergence : NumericError {
  using NumericError::NumericError;
};
struct NodeCountMismatch : NumericError {
  using NumericError::NumericError;
};
struct NonNodalSingularity : NumericError {
  using NumericError::NumericError;
};
struct DiscriminantFactorizationFailed : NumericError {
  using NumericError::NumericError;
};
struct ReductionFailed : NumericError {
  using NumericError::NumericError;
};
struct DegenerateImage : NumericError {
  using NumericError::NumericError;
};
struct DegreeUnachievable : NumericError {
  using NumericError::NumericError;
};
struct DegenerateMetric : NumericError {
  using NumericError::NumericError;
};
struct NoCommonRoot : NumericError {
  using NumericError::NumericError;
};
struct StepFailure : NumericError {
  using NumericError::NumericError;
};
struct RankDrop : NumericError {
  using NumericError::NumericError;
};
struct ProjectionFailure : NumericError {
  using NumericError::NumericError;
};
struct IllConditionedFit : NumericError {
  using NumericError::NumericError;
};
struct RankDeficientFit : NumericError {
  using NumericError::NumericError;
};
struct NotInRealSubspace : NumericError {
  using NumericError::NumericError;
};
struct IndefiniteRealMetric : NumericError {
  using NumericError::NumericError;
};
struct NoRealSolutionFound : NumericError {
  using NumericError::NumericError;
};

// Deterministic RNG used everywhere a seed appears in the public API.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  Complex unit_complex() {
    double ang = uniform(0.0, 6.283185307179586);
    return {std::cos(ang), std::sin(ang)};
  }
  Complex complex(double scale = 1.0) {
    return {scale * uniform(), scale * uniform()};
  }
  int integer(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mtw

#endif
