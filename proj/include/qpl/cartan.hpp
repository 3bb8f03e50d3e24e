#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpl/errors.hpp"
#include "qpl/greens.hpp"
#include "qpl/model.hpp"
#include "qpl/sampling.hpp"

namespace qpl {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Indices of [0, n) not in V, ascending.
std::vector<Eigen::Index> complement_indices(Eigen::Index n, const std::vector<Eigen::Index>& V);

template <typename Scalar>
struct SchurResult {
  DenseMatrix<Scalar> S;          ///< T3 - T2^t T1^{-1} T2 on V
  DenseMatrix<Scalar> T1_inv;     ///< inverse of the block on the complement of V
  Scalar T1_inv_norm = 0;
  Scalar T2_norm = 0;
};

/// Schur complement onto V. T1 is the block on the complement of V and must be invertible.
template <typename Derived>
SchurResult<typename Derived::Scalar> schur_complement(const Eigen::MatrixBase<Derived>& T,
                                                       const std::vector<Eigen::Index>& V) {
  using Scalar = typename Derived::Scalar;
  using Mat = DenseMatrix<Scalar>;
  if (T.rows() != T.cols()) throw InputError("schur_complement: matrix is not square");
  for (auto v : V)
    if (v < 0 || v >= T.rows()) throw InputError("schur_complement: index out of range");
  const auto Vc = complement_indices(T.rows(), V);
  const Mat A = T;
  const Mat T1 = A(Vc, Vc), T2 = A(Vc, V), T3 = A(V, V);
  SchurResult<Scalar> out;
  if (Vc.empty()) {
    out.S = T3;
    return out;
  }
  Eigen::PartialPivLU<Mat> lu(T1);
  if (!(lu.rcond() > 1.0 / kSingularCondition))
    throw SingularMatrixError("schur_complement: T1 is singular", lu.rcond() > 0 ? 1.0 / lu.rcond() : INFINITY);
  out.T1_inv = lu.inverse();
  out.S = T3 - T2.transpose() * out.T1_inv * T2;
  out.T1_inv_norm = operator_norm(out.T1_inv);
  out.T2_norm = operator_norm(T2);
  return out;
}

template <typename Scalar>
struct SandwichResult {
  Scalar lhs = 0;          ///< ||S^{-1}||
  Scalar mid = 0;          ///< ||T^{-1}||
  Scalar rhs_factor = 0;   ///< smallest C with ||T^{-1}|| <= C (1 + ||T1^{-1}||)^2 (1 + ||S^{-1}||)
  Scalar T2_norm = 0;
  Scalar block_consistency = 0;  ///< max |T^{-1}(V,V) - S^{-1}|
  bool left_ok = false;
};

template <typename Derived>
SandwichResult<typename Derived::Scalar> sandwich_check(const Eigen::MatrixBase<Derived>& T,
                                                        const std::vector<Eigen::Index>& V) {
  using Scalar = typename Derived::Scalar;
  using Mat = DenseMatrix<Scalar>;
  const Mat A = T;
  Eigen::PartialPivLU<Mat> lu(A);
  if (!(lu.rcond() > 1.0 / kSingularCondition)) throw SingularMatrixError("sandwich_check: T is singular", 1.0 / lu.rcond());
  const Mat Tinv = lu.inverse();
  const auto sc = schur_complement(A, V);
  Eigen::PartialPivLU<Mat> slu(sc.S);
  if (!(slu.rcond() > 1.0 / kSingularCondition))
    throw SingularMatrixError("sandwich_check: S is singular", 1.0 / slu.rcond());
  const Mat Sinv = slu.inverse();
  SandwichResult<Scalar> r;
  r.lhs = operator_norm(Sinv);
  r.mid = operator_norm(Tinv);
  r.T2_norm = sc.T2_norm;
  r.rhs_factor = r.mid / ((1 + sc.T1_inv_norm) * (1 + sc.T1_inv_norm) * (1 + r.lhs));
  r.block_consistency = max_entry_difference(Tinv(V, V), Sinv);
  r.left_ok = r.lhs <= r.mid * (1 + 1e-10);
  return r;
}

template <typename Scalar>
struct DetBoundResult {
  Scalar lhs = 0;      ///< ||S^{-1}||
  Scalar log_rhs = 0;  ///< (M-1) log ||S|| - log |det S|
  bool holds = false;
};

/// ||S^{-1}|| <= ||S||^{M-1} / |det S|, compared in logs.
template <typename Derived>
DetBoundResult<typename Derived::Scalar> det_inverse_bound(const Eigen::MatrixBase<Derived>& S, int M) {
  using Scalar = typename Derived::Scalar;
  using Mat = DenseMatrix<Scalar>;
  if (S.rows() != S.cols() || S.rows() != M) throw InputError("det_inverse_bound: M must equal the matrix dimension");
  const Mat A = S;
  Eigen::PartialPivLU<Mat> lu(A);
  const auto& U = lu.matrixLU();
  Scalar log_det = 0;
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    if (U(i, i) == Scalar(0)) throw SingularMatrixError("det_inverse_bound: det S = 0", INFINITY);
    log_det += std::log(std::abs(U(i, i)));
  }
  DetBoundResult<Scalar> r;
  r.lhs = operator_norm(Mat(lu.inverse()));
  r.log_rhs = (M - 1) * std::log(operator_norm(A)) - log_det;
  r.holds = std::log(r.lhs) <= r.log_rhs + 1e-10;
  return r;
}

// ---------------------------------------------------------------------------------
// Analytic matrix families and the Cartan bad set

struct AnalyticMatrixFamily {
  std::string name;
  int J = 1;             ///< parameter dimension
  double delta = 1.0;    ///< parameter cube [-delta, delta]^J
  double B1 = 1.0;       ///< bound for ||T|| on the complex polydisc of radius delta
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eval;
  int size() const { return static_cast<int>(eval(Eigen::VectorXd::Zero(J)).rows()); }
};

/// T(x) = (x), J = 1.
AnalyticMatrixFamily scalar_family(double delta = 1.0);

/// T(x) = A0 + sum_i x_i A_i with fixed random symmetric A_i of operator norm <= scale.
AnalyticMatrixFamily polynomial_family(int size, int J, double delta, double scale, std::uint64_t seed);

/// T(y) = lambda^{-1} H_Lambda(x with block j moved by y) - E, y in [-delta, delta]^{b_j}.
AnalyticMatrixFamily restricted_operator_family(const ModelConfig& cfg, const PointSet& region, const Phase& x, double E,
                                                int j, double delta);

struct PivotData {
  std::vector<Eigen::Index> V;
  double B2 = 1.0;  ///< max(1, ||(T restricted to the complement of V)^{-1}||) at the anchor
};

/// Pivot data measured at the anchor x = 0.
PivotData pivot_at_anchor(const AnalyticMatrixFamily& family, std::vector<Eigen::Index> V);

/// Finite-difference check of ||d T / d x_i|| <= 4 B1 / delta at the anchor; returns the
/// largest ratio of observed derivative norm to the Cauchy bound.
double cauchy_derivative_ratio(const AnalyticMatrixFamily& family);

struct CartanOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  SamplingMethod method = SamplingMethod::MonteCarlo;
  double B3 = 0.0;       ///< 0 selects 1/epsilon
  double C = 1.0;        ///< calibrated constants of the bound
  double c = 1.0;
};

struct CartanResult {
  double epsilon = 0.0;
  MeasureEstimate empirical;  ///< Lebesgue measure (fraction times delta^J)
  double bound_log = 0.0;     ///< log(C delta^J e^{-c s^{1/J}})
  double s = 0.0;             ///< log(1/epsilon) / (M log(B2 + B3))
  bool small_epsilon_ok = false;  ///< epsilon <= (1 + B1 + B2)^{-10M}
  bool small_bad_set_ok = false;  ///< sampled measure of {||T^{-1}|| >= B3} on [-delta, delta]^J small enough
  bool pass = false;              ///< empirical <= bound (with the configured constants)
};

/// Sampled measure of {x in [-delta/2, delta/2]^J : ||T(x)^{-1}|| >= 1/epsilon}.
CartanResult cartan_bad_measure(const AnalyticMatrixFamily& family, const PivotData& pivot, double epsilon,
                                const CartanOptions& opt = {});

struct CartanCalibration {
  double C = 0.0;
  double c = 0.0;
};

/// Constants making C delta^J e^{-c s^{1/J}} an upper envelope of the observed ladder:
/// c from the log-linear fit (clamped at 0), then the smallest C covering every point.
CartanCalibration calibrate_cartan(const std::vector<CartanResult>& ladder, int J, double delta);

/// Lebesgue measure of Y = {y : |y - x^j| <= sigma, ||G_Lambda(E; (y, x_j^not))|| >= e^{sqrt N}}.
MeasureEstimate cartan_y_measure(const ModelConfig& cfg, const PointSet& region, int N, double E, const Phase& x, int j,
                                 double sigma, std::uint64_t samples, std::uint64_t seed);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace qpl
