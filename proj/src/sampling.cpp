#include "qpl/sampling.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <boost/random/sobol.hpp>
#include <omp.h>

#include "qpl/errors.hpp"

namespace qpl {

std::string to_string(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::MonteCarlo: return "monte_carlo";
    case SamplingMethod::Sobol: return "sobol";
    case SamplingMethod::Quadrature: return "quadrature";
  }
  return "unknown";
}

SamplingMethod parse_sampling_method(const std::string& name) {
  if (name == "monte_carlo") return SamplingMethod::MonteCarlo;
  if (name == "sobol") return SamplingMethod::Sobol;
  if (name == "quadrature") return SamplingMethod::Quadrature;
  throw InputError("unknown sampling method '" + name + "'");
}

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (block + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double proportion_half_width(double p, std::uint64_t n) {
  if (n == 0) return 1.0;
  return kZ99 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

MeasureEstimate estimate_fraction(int dim, std::uint64_t samples, std::uint64_t seed, SamplingMethod method,
                                  const std::function<bool(const Eigen::VectorXd&)>& hit) {
  if (dim < 1) throw InputError("estimate_fraction: dimension must be >= 1");
  if (samples == 0) throw InputError("estimate_fraction: need at least one sample");
  MeasureEstimate est;
  est.samples = samples;
  est.method = method;
  est.seed = seed;
  const std::int64_t blocks = static_cast<std::int64_t>((samples + kSampleBlock - 1) / kSampleBlock);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(blocks), 0);

  if (method == SamplingMethod::Sobol) {
    boost::random::sobol gen(static_cast<std::size_t>(dim));
    std::vector<double> pts(samples * dim);
    for (auto& u : pts) u = std::ldexp(static_cast<double>(gen()), -64);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
      Eigen::VectorXd u(dim);
      const std::uint64_t lo = b * kSampleBlock, hi = std::min<std::uint64_t>(samples, lo + kSampleBlock);
      for (std::uint64_t s = lo; s < hi; ++s) {
        for (int i = 0; i < dim; ++i) u[i] = pts[s * dim + i];
        counts[b] += hit(u) ? 1 : 0;
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
      std::mt19937_64 rng(block_seed(seed, static_cast<std::uint64_t>(b)));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Eigen::VectorXd u(dim);
      const std::uint64_t lo = b * kSampleBlock, hi = std::min<std::uint64_t>(samples, lo + kSampleBlock);
      for (std::uint64_t s = lo; s < hi; ++s) {
        for (int i = 0; i < dim; ++i) u[i] = unif(rng);
        counts[b] += hit(u) ? 1 : 0;
      }
    }
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  est.value = static_cast<double>(total) / static_cast<double>(samples);
  est.half_width = proportion_half_width(est.value, samples);
  return est;
}

}  // namespace qpl
