#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpl/lattice.hpp"

namespace qpl {

using Phase = Eigen::VectorXd;
using Frequency = Eigen::VectorXd;

/// Block sizes (b_1, ..., b_d); block j of a phase holds b_j torus coordinates.
struct BlockStructure {
  std::vector<int> sizes;

  BlockStructure() = default;
  explicit BlockStructure(std::vector<int> s);
  static BlockStructure ones(int d) { return BlockStructure(std::vector<int>(d, 1)); }

  int dim() const noexcept { return static_cast<int>(sizes.size()); }
  int total() const noexcept;      ///< b
  int max_block() const noexcept;  ///< b_tilde
  int offset(int j) const;         ///< first coordinate of block j
};

/// Reduces every coordinate into [0, 1).
Phase reduce_mod1(Phase x);

/// x + n omega mod 1, block j shifted by n_j times omega-block j.
Phase shift_phase(const Phase& x, const Frequency& omega, const BlockStructure& blocks, const LatticePoint& n);

/// x_j^not: x with block j removed.
Eigen::VectorXd drop_block(const Phase& x, const BlockStructure& blocks, int j);

/// Reassembles a phase from a section x_j^not and block j coordinates theta.
Phase insert_block(const Eigen::VectorXd& section, const Eigen::VectorXd& theta, const BlockStructure& blocks, int j);

/// Golden mean fractional part (sqrt(5) - 1) / 2.
inline constexpr double kGoldenMean = 0.6180339887498949;

// ---------------------------------------------------------------------------------
// Trigonometric polynomials

struct TrigTerm {
  std::vector<int> k;  ///< frequency vector in Z^b
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

/// v(x) = sum over terms of cos_coef cos(2 pi k.x) + sin_coef sin(2 pi k.x).
class TrigPotential {
 public:
  TrigPotential() = default;
  TrigPotential(int num_vars, std::vector<TrigTerm> terms);

  /// cos(2 pi x_1) + ... + cos(2 pi x_b).
  static TrigPotential cosine_sum(int num_vars);
  static TrigPotential constant(int num_vars, double c);

  int num_vars() const noexcept { return vars_; }
  const std::vector<TrigTerm>& terms() const noexcept { return terms_; }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Sum of |coefficients|, an upper bound for sup |v| on the torus.
  double coefficient_sum() const noexcept;
  /// Sum of |coef| cosh(2 pi |k|_1 eta): bound for |v| on the complex strip of width eta.
  double strip_bound(double eta) const noexcept;
  /// True when every term has sin_coef == 0, so v(-x) = v(x).
  bool is_even() const noexcept;

 private:
  int vars_ = 0;
  std::vector<TrigTerm> terms_;
};

struct SectionOscillation {
  int block = 0;
  double min_oscillation = 0.0;   ///< min over sampled sections of (max - min) along block j
  Eigen::VectorXd witness;        ///< section attaining the minimum
  bool nondegenerate = false;
};

struct NondegeneracyReport {
  std::vector<SectionOscillation> blocks;
  double tolerance = 1e-8;
  bool nondegenerate() const noexcept;
};

/// Samples sections x_j^not on a grid and measures how much v varies along block j.
NondegeneracyReport check_nondegeneracy(const TrigPotential& v, const BlockStructure& blocks, int grid);

// ---------------------------------------------------------------------------------
// Toeplitz kernels

enum class KernelFamily { Zero, LaplacianL1, LaplacianSup, ExpDecay, FourierSymbol };

std::string to_string(KernelFamily f);
KernelFamily parse_kernel_family(const std::string& name);

/// Translation-invariant symmetric hopping S(n, n') = s(n - n'), stored on [-R, R]^d.
class ToeplitzKernel {
 public:
  ToeplitzKernel() = default;

  /// S = 0, which decays at any rate rho.
  static ToeplitzKernel zero(int dim, double rho = 1.0);
  static ToeplitzKernel laplacian_l1(int dim, double amplitude = 1.0, double rho = 1.0);
  static ToeplitzKernel laplacian_sup(int dim, double amplitude = 1.0, double rho = 1.0);
  /// s(r) = amplitude e^{-rho |r|} for r != 0, zero on the diagonal. radius <= 0 picks the
  /// smallest R with e^{-rho R} < 1e-14.
  static ToeplitzKernel exp_decay(int dim, double rho, int radius = 0, double amplitude = 1.0);
  /// Kernel given by an explicit offset table; symmetric completion is checked, not assumed.
  static ToeplitzKernel from_table(KernelFamily family, int dim, int radius, double rho,
                                   const std::vector<std::pair<LatticePoint, double>>& entries);

  KernelFamily family() const noexcept { return family_; }
  int dim() const noexcept { return dim_; }
  int radius() const noexcept { return radius_; }
  double rho() const noexcept { return rho_; }

  double operator()(const LatticePoint& r) const noexcept;
  double entry(const LatticePoint& n, const LatticePoint& m) const noexcept { return (*this)(n - m); }

  /// max_r |s(r)| e^{rho |r|}; the decay condition |S(n,n')| <= e^{-rho|n-n'|} holds iff <= 1.
  double go_prefactor() const noexcept { return prefactor_; }
  bool satisfies_go() const noexcept { return prefactor_ <= 1.0 + 1e-12; }
  /// Largest rate rho' with |s(r)| <= e^{-rho' |r|} for all r != 0 and |s(0)| <= 1 (0 if none).
  double decay_certificate() const noexcept;
  /// sum_r |s(r)|, the Schur-test bound for the full kernel.
  double row_sum() const noexcept;

  /// Nonzero offsets with their values, lexicographic.
  std::vector<std::pair<LatticePoint, double>> support() const;

 private:
  void finalize();
  std::size_t slot(const LatticePoint& r) const noexcept;

  KernelFamily family_ = KernelFamily::Zero;
  int dim_ = 0;
  int radius_ = 0;
  double rho_ = 1.0;
  double prefactor_ = 0.0;
  std::vector<double> table_;
};

/// Kernel F(n, n') = Fourier coefficient of s at n - n'. Throws InputError for symbols with
/// sine terms (the kernel would not be symmetric).
ToeplitzKernel dual_kernel_from_symbol(const TrigPotential& symbol, double rho = 0.0);

/// Inverse of dual_kernel_from_symbol: the even trig polynomial with coefficients s(r).
TrigPotential kernel_symbol(const ToeplitzKernel& S);

// ---------------------------------------------------------------------------------
// Model

struct ModelConfig {
  ToeplitzKernel kernel;
  TrigPotential potential;
  BlockStructure blocks;
  double lambda = 2.0;
  Frequency omega;

  int dim() const noexcept { return blocks.dim(); }
  /// Throws InputError on inconsistent structure or lambda <= 1.
  void validate() const;
};

/// v(x + n omega) for every n of the region, in its lexicographic order.
Eigen::VectorXd potential_on(const ModelConfig& cfg, const PointSet& region, const Phase& x);

/// Matrix of lambda^{-1} S restricted to the region (zero diagonal unless s(0) != 0).
Eigen::MatrixXd hopping_matrix(const ToeplitzKernel& S, double lambda, const PointSet& region);

/// lambda^{-1} H_Lambda(x) - E: diagonal v(x + n omega) - E, off-diagonal lambda^{-1} S(n - n').
Eigen::MatrixXd assemble_restricted(const ModelConfig& cfg, const PointSet& region, const Phase& x, double E);

/// Bound C with spec(lambda^{-1} H) in [-C, C]: sup|v| + lambda^{-1} sum|s|.
double spectral_bound(const ModelConfig& cfg);

}  // namespace qpl
