#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "qpl/lattice.hpp"
#include "qpl/model.hpp"

namespace qpl {

struct EigenvectorFit {
  LatticePoint center;               ///< argmax |psi|
  double rate = 0.0;                 ///< minus the slope of log|psi| against |n - center|; +inf for a delta
  int points_used = 0;
  double participation = 0.0;        ///< (sum psi^2)^2 / sum psi^4
};

struct LocalizationProfile {
  PointSet region;
  Eigen::VectorXd eigenvalues;
  std::vector<EigenvectorFit> fits;
  double max_residual = 0.0;         ///< max ||H psi - E psi|| / ||H||
  double spectral_bound = 0.0;       ///< max|v| + lambda^{-1} sum_r |s(r)|
  bool spectrum_in_bound = false;

  double median_rate() const;
  double median_participation() const;
};

struct LocalizationOptions {
  double noise_floor = 1e-12;  ///< fit only |psi(n)| >= noise_floor * max |psi|
};

/// Eigendecomposition of lambda^{-1} H restricted to the cube [-N, N]^d at phase x, with a
/// decay fit of every eigenvector around its center. Needs |Lambda| <= 20000.
LocalizationProfile localization_profile(const ModelConfig& cfg, int N, const Phase& x,
                                         const LocalizationOptions& opt = {});

/// Decay fit of a single vector indexed by region.
EigenvectorFit fit_eigenvector(const PointSet& region, const Eigen::Ref<const Eigen::VectorXd>& psi,
                               double noise_floor = 1e-12);

/// 0.5 log(lambda) - log 2 - 1.
inline double neumann_rate_floor(double lambda) { return 0.5 * std::log(lambda) - std::log(2.0) - 1.0; }

}  // namespace qpl
