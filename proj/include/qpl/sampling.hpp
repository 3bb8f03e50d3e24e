#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Core>

namespace qpl {

enum class SamplingMethod { MonteCarlo, Sobol, Quadrature };

std::string to_string(SamplingMethod m);
SamplingMethod parse_sampling_method(const std::string& name);

struct MeasureEstimate {
  double value = 0.0;
  double half_width = 0.0;  ///< 99% confidence half-width (2.576 sigma) or quadrature error estimate
  std::uint64_t samples = 0;
  SamplingMethod method = SamplingMethod::MonteCarlo;
  std::uint64_t seed = 0;

  double lower() const noexcept { return value - half_width < 0.0 ? 0.0 : value - half_width; }
  double upper() const noexcept { return value + half_width > 1.0 ? 1.0 : value + half_width; }
};

inline constexpr double kZ99 = 2.5758293035489004;

/// Seed of sample block b, a splitmix64 step away from the run seed.
std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block);

/// Fraction of points u in [0,1)^dim with hit(u). Pseudo-random points come in blocks of
/// kSampleBlock with per-block seeds, so the estimate does not depend on the thread count.
/// Sobol points are the first `samples` points of the dim-dimensional sequence.
MeasureEstimate estimate_fraction(int dim, std::uint64_t samples, std::uint64_t seed, SamplingMethod method,
                                  const std::function<bool(const Eigen::VectorXd&)>& hit);

inline constexpr std::uint64_t kSampleBlock = 4096;

/// Normal-approximation 99% half-width for a proportion.
double proportion_half_width(double p, std::uint64_t n);

/// Sets the OpenMP thread count when n > 0.
void set_thread_count(int n);

}  // namespace qpl
