#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qpl/lattice.hpp"
#include "qpl/model.hpp"
#include "qpl/sampling.hpp"

namespace qpl {

/// X = {x : |v(x) - E| < delta}.
struct SublevelSpec {
  TrigPotential v;
  double E = 0.0;
  double delta = 0.1;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const { return std::abs(v(x) - E) < delta; }
};

/// x in X_N: some |n| <= N has |v(x + n omega) - E| < delta.
bool in_bad_set(const SublevelSpec& spec, const BlockStructure& blocks, const Phase& x, int N, const Frequency& omega);

/// Exact measure of {theta in [0,1) : |g(theta)| < delta} for a smooth periodic g, by root
/// bracketing on a grid refined at local extrema.
double sublevel_length_1d(const std::function<double(double)>& g, double delta, int grid = 8192);

/// mes{theta in T^{b_j} : |v(section, theta) - E| < delta}. Quadrature needs b_j <= 2.
MeasureEstimate section_measure(const SublevelSpec& spec, const BlockStructure& blocks, int j,
                                const Eigen::VectorXd& section, SamplingMethod method, std::uint64_t samples = 100000,
                                std::uint64_t seed = 0);

struct SupSectionMeasure {
  MeasureEstimate worst;          ///< estimate at the worst sampled section
  Eigen::VectorXd worst_section;
  int worst_index = 0;            ///< position of the worst section in the sampled sequence
  int sections_sampled = 0;       ///< sampling density of the sup
};

/// Max of section_measure over `sections` pseudo-random sections (the single empty section
/// when b_j = b).
SupSectionMeasure sup_section_measure(const SublevelSpec& spec, const BlockStructure& blocks, int j, int sections,
                                      SamplingMethod method, std::uint64_t samples, std::uint64_t seed);

struct LojasiewiczFit {
  double exponent_a = 0.0;
  double constant_C = 0.0;
  double residual = 0.0;  ///< rms of the log-log fit
  std::vector<double> deltas;
  std::vector<double> measures;
  std::vector<double> half_widths;
  std::vector<int> section_ids;   ///< worst section per threshold
  bool degenerate = false;
  std::string note;
};

/// Log-spaced grid of `count` values from lo to hi.
std::vector<double> log_grid(double lo, double hi, int count);

/// Fit of log(sup-section measure) against log(delta). The grid must span two decades.
LojasiewiczFit lojasiewicz_fit(const TrigPotential& v, double E, const BlockStructure& blocks, int j,
                               const std::vector<double>& deltas, int sections = 16,
                               SamplingMethod method = SamplingMethod::Quadrature, std::uint64_t samples = 100000,
                               std::uint64_t seed = 0);

struct NeumannReport {
  double norm = 0.0;
  double bound = 0.0;           ///< 2 / delta
  double worst_decay_ratio = 0.0;  ///< max |G(n,n')| / (2 delta^{-1} e^{-rho |n-n'|})
  bool decay_ok = false;
  bool lambda_ok = false;
};

/// Direct check of the initial-scale bounds on G_Q. Throws PreconditionFailure when x is in
/// X_N, lambda < 2 delta^{-1} (2N+1)^d or the kernel is not e^{-rho r} dominated;
/// InvariantViolation when a bound fails.
NeumannReport neumann_bound_check(const ModelConfig& cfg, const ElementaryRegion& Q, double E, const Phase& x,
                                  double delta);

struct NeumannSeries {
  std::vector<double> residuals;  ///< residuals[k]: max entry of direct - B^{-1} sum_{s<=k} (-A B^{-1})^s
  double contraction = 0.0;       ///< bound for ||A B^{-1}||
  double tail_bound(int k, double delta) const { return 2.0 / delta * std::ldexp(1.0, -k) + 1e-10; }
};

/// Partial sums of the Neumann series for terms = 0..max_terms. Throws PreconditionFailure
/// when the diagonal comes within delta of zero or the contraction bound exceeds 1/2.
NeumannSeries neumann_series_compare(const ModelConfig& cfg, const ElementaryRegion& Q, double E, const Phase& x,
                                     double delta, int max_terms);

}  // namespace qpl
