#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpl/lattice.hpp"
#include "qpl/model.hpp"

namespace qpl {

/// Spectral norm. Symmetric input goes through the self-adjoint eigensolver, anything
/// else through the SVD.
template <typename Derived>
typename Derived::RealScalar operator_norm(const Eigen::MatrixBase<Derived>& M) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (M.size() == 0) return 0;
  const Mat A = M;
  if (A.rows() == A.cols() && A.isApprox(A.adjoint(), 1e-14)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues()(0);
}

/// Largest absolute row sum, an upper bound for the spectral norm of a symmetric matrix.
template <typename Derived>
typename Derived::RealScalar schur_test_bound(const Eigen::MatrixBase<Derived>& M) {
  if (M.size() == 0) return 0;
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Largest entry of |A - B|.
template <typename A, typename B>
typename A::RealScalar max_entry_difference(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() == 0) return 0;
  return (a - b).cwiseAbs().maxCoeff();
}

struct GreensMatrix {
  PointSet region;
  double energy = 0.0;
  Phase phase;
  Eigen::MatrixXd G;
  double condition = 0.0;  ///< 1-norm condition estimate of the inverted matrix
  double defect = 0.0;     ///< max |M G - I| after refinement

  double at(const LatticePoint& n, const LatticePoint& m) const { return G(region.index_of(n), region.index_of(m)); }
};

inline constexpr double kSingularCondition = 1e13;
inline constexpr double kDefectTolerance = 1e-8;

/// Inverts a symmetric matrix indexed by region: pivoted LU, conditioning check, one
/// refinement step when the defect is visible, symmetrization.
GreensMatrix invert_restricted(const PointSet& region, const Eigen::MatrixXd& M, double E = 0.0, Phase x = {});

/// G_Lambda(E; x) = (lambda^{-1} H_Lambda(x) - E)^{-1}.
GreensMatrix compute_greens(const ModelConfig& cfg, const PointSet& region, double E, const Phase& x);

struct DecayViolation {
  LatticePoint n;
  LatticePoint m;
  double abs_value = 0.0;
  double allowed = 0.0;
};

struct GoodnessOptions {
  double norm_log_slack = 0.0;   ///< log of the constant in front of e^{sqrt N}; log 2 for the doubled form
  double decay_log_slack = 0.0;  ///< log of the constant in front of e^{-rho_bar r}
  std::optional<LatticePoint> row;  ///< restrict the decay check to pairs (row, n')
  bool check_size = true;        ///< require diam(region) == 2N
  std::size_t max_listed = 64;   ///< violations kept in the report (all are counted)
};

struct GoodnessReport {
  int N = 0;
  double rho_bar = 0.0;
  double norm = 0.0;
  double log_norm = 0.0;
  double log_norm_bound = 0.0;  ///< sqrt(N) + norm slack
  bool norm_ok = false;
  std::size_t violation_count = 0;
  std::vector<DecayViolation> decay_violations;
  double fitted_rate = 0.0;     ///< minus the least-squares slope of log|G| against |n - n'|; NaN if undetermined
  std::size_t pairs_checked = 0;
  bool pass = false;
};

/// Norm bound e^{sqrt N} and decay e^{-rho_bar |n-n'|} for 10|n-n'| >= N, compared in logs.
GoodnessReport goodness(const GreensMatrix& G, int N, double rho_bar, const GoodnessOptions& opt = {});

/// Max entry difference between G_{n+Lambda}(E; x) and G_Lambda(E; x + n omega).
double shift_covariance_check(const ModelConfig& cfg, const PointSet& region, double E, const Phase& x,
                              const LatticePoint& n);

/// Least-squares slope of ys against xs; NaN when xs has fewer than two distinct values.
double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace qpl
