#include "qpl/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "qpl/errors.hpp"

namespace qpl {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------------------------
// Blocks and phases

BlockStructure::BlockStructure(std::vector<int> s) : sizes(std::move(s)) {
  if (sizes.empty() || static_cast<int>(sizes.size()) > kMaxDim) throw InputError("block structure needs 1..4 blocks");
  for (int b : sizes)
    if (b < 1) throw InputError("block sizes must be positive");
}

int BlockStructure::total() const noexcept {
  int s = 0;
  for (int b : sizes) s += b;
  return s;
}

int BlockStructure::max_block() const noexcept {
  return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
}

int BlockStructure::offset(int j) const {
  if (j < 0 || j >= dim()) throw InputError("block index out of range");
  int o = 0;
  for (int i = 0; i < j; ++i) o += sizes[i];
  return o;
}

Phase reduce_mod1(Phase x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] -= std::floor(x[i]);
    if (x[i] >= 1.0) x[i] = 0.0;
  }
  return x;
}

Phase shift_phase(const Phase& x, const Frequency& omega, const BlockStructure& blocks, const LatticePoint& n) {
  if (x.size() != blocks.total() || omega.size() != blocks.total() || n.dim() != blocks.dim())
    throw InputError("shift_phase: block structure mismatch");
  Phase y = x;
  int o = 0;
  for (int j = 0; j < blocks.dim(); ++j) {
    for (int t = 0; t < blocks.sizes[j]; ++t, ++o) {
      const double p = n[j] * omega[o];
      y[o] += std::fma(n[j], omega[o], -std::nearbyint(p));
    }
  }
  return reduce_mod1(std::move(y));
}

Eigen::VectorXd drop_block(const Phase& x, const BlockStructure& blocks, int j) {
  const int o = blocks.offset(j), bj = blocks.sizes[j];
  Eigen::VectorXd s(x.size() - bj);
  s << x.head(o), x.tail(x.size() - o - bj);
  return s;
}

Phase insert_block(const Eigen::VectorXd& section, const Eigen::VectorXd& theta, const BlockStructure& blocks, int j) {
  const int o = blocks.offset(j), bj = blocks.sizes[j];
  if (theta.size() != bj || section.size() != blocks.total() - bj) throw InputError("insert_block: size mismatch");
  Phase x(blocks.total());
  x << section.head(o), theta, section.tail(section.size() - o);
  return x;
}

// ---------------------------------------------------------------------------------
// Trig polynomials

TrigPotential::TrigPotential(int num_vars, std::vector<TrigTerm> terms) : vars_(num_vars), terms_(std::move(terms)) {
  if (num_vars < 1) throw InputError("potential needs at least one variable");
  for (const auto& t : terms_)
    if (static_cast<int>(t.k.size()) != num_vars) throw InputError("potential term has wrong frequency length");
}

TrigPotential TrigPotential::cosine_sum(int num_vars) {
  std::vector<TrigTerm> terms;
  for (int i = 0; i < num_vars; ++i) {
    TrigTerm t{std::vector<int>(num_vars, 0), 1.0, 0.0};
    t.k[i] = 1;
    terms.push_back(t);
  }
  return {num_vars, terms};
}

TrigPotential TrigPotential::constant(int num_vars, double c) {
  return {num_vars, {TrigTerm{std::vector<int>(num_vars, 0), c, 0.0}}};
}

double TrigPotential::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double phase = 0.0;
    for (int i = 0; i < vars_; ++i) phase += t.k[i] * x[i];
    phase = kTwoPi * (phase - std::floor(phase));
    s += t.cos_coef * std::cos(phase);
    if (t.sin_coef != 0.0) s += t.sin_coef * std::sin(phase);
  }
  return s;
}

double TrigPotential::coefficient_sum() const noexcept {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.cos_coef) + std::abs(t.sin_coef);
  return s;
}

double TrigPotential::strip_bound(double eta) const noexcept {
  double s = 0.0;
  for (const auto& t : terms_) {
    int l1 = 0;
    for (int k : t.k) l1 += std::abs(k);
    s += (std::abs(t.cos_coef) + std::abs(t.sin_coef)) * std::cosh(kTwoPi * l1 * eta);
  }
  return s;
}

bool TrigPotential::is_even() const noexcept {
  return std::all_of(terms_.begin(), terms_.end(), [](const TrigTerm& t) { return t.sin_coef == 0.0; });
}

bool NondegeneracyReport::nondegenerate() const noexcept {
  return std::all_of(blocks.begin(), blocks.end(), [](const SectionOscillation& s) { return s.nondegenerate; });
}

namespace {

/// Points of the grid {i/g}^dim, with g reduced so the grid has at most cap points.
std::vector<Eigen::VectorXd> torus_grid(int dim, int grid, int cap) {
  if (dim == 0) return {Eigen::VectorXd(0)};
  int g = grid;
  while (g > 2 && std::pow(static_cast<double>(g), dim) > cap) --g;
  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(dim, 0);
  while (true) {
    Eigen::VectorXd p(dim);
    for (int i = 0; i < dim; ++i) p[i] = static_cast<double>(idx[i]) / g;
    out.push_back(p);
    int i = dim - 1;
    while (i >= 0 && ++idx[i] == g) idx[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

}  // namespace

NondegeneracyReport check_nondegeneracy(const TrigPotential& v, const BlockStructure& blocks, int grid) {
  if (grid < 8) throw InputError("check_nondegeneracy: grid must be >= 8");
  if (v.num_vars() != blocks.total()) throw InputError("check_nondegeneracy: potential/block mismatch");
  NondegeneracyReport rep;
  for (int j = 0; j < blocks.dim(); ++j) {
    const int bj = blocks.sizes[j];
    const auto sections = torus_grid(blocks.total() - bj, grid, 4096);
    const auto thetas = torus_grid(bj, grid, 4096);
    SectionOscillation osc{j, std::numeric_limits<double>::infinity(), {}, false};
    for (const auto& s : sections) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& th : thetas) {
        const double val = v(insert_block(s, th, blocks, j));
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
      if (hi - lo < osc.min_oscillation) {
        osc.min_oscillation = hi - lo;
        osc.witness = s;
      }
    }
    osc.nondegenerate = osc.min_oscillation > rep.tolerance;
    rep.blocks.push_back(std::move(osc));
  }
  return rep;
}

// ---------------------------------------------------------------------------------
// Kernels

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Zero: return "zero";
    case KernelFamily::LaplacianL1: return "laplacian_l1";
    case KernelFamily::LaplacianSup: return "laplacian_sup";
    case KernelFamily::ExpDecay: return "exp_decay";
    case KernelFamily::FourierSymbol: return "fourier_symbol";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
  for (auto f : {KernelFamily::Zero, KernelFamily::LaplacianL1, KernelFamily::LaplacianSup, KernelFamily::ExpDecay,
                 KernelFamily::FourierSymbol})
    if (to_string(f) == name) return f;
  throw InputError("unknown kernel family '" + name + "'");
}

std::size_t ToeplitzKernel::slot(const LatticePoint& r) const noexcept {
  std::size_t off = 0;
  const std::size_t w = 2 * radius_ + 1;
  for (int i = 0; i < dim_; ++i) off = off * w + static_cast<std::size_t>(r[i] + radius_);
  return off;
}

double ToeplitzKernel::operator()(const LatticePoint& r) const noexcept {
  if (r.sup_norm() > radius_) return 0.0;
  return table_[slot(r)];
}

void ToeplitzKernel::finalize() {
  prefactor_ = 0.0;
  for (const auto& [r, val] : support()) {
    if (std::abs(val - (*this)(-r)) > 1e-15 * std::max(1.0, std::abs(val)))
      throw InputError("kernel is not symmetric at offset " + qpl::to_string(r));
    prefactor_ = std::max(prefactor_, std::abs(val) * std::exp(rho_ * r.sup_norm()));
  }
}

namespace {

std::vector<std::pair<LatticePoint, double>> neighbour_entries(int dim, double amplitude, bool sup) {
  std::vector<std::pair<LatticePoint, double>> e;
  for_each_point(Box::cube(LatticePoint(dim), 1), [&](const LatticePoint& r) {
    const bool hit = sup ? r.sup_norm() == 1 : r.l1_norm() == 1;
    if (hit) e.emplace_back(r, amplitude);
  });
  return e;
}

}  // namespace

ToeplitzKernel ToeplitzKernel::from_table(KernelFamily family, int dim, int radius, double rho,
                                          const std::vector<std::pair<LatticePoint, double>>& entries) {
  if (dim < 1 || dim > kMaxDim) throw InputError("kernel dimension must be in [1, 4]");
  if (radius < 0) throw InputError("kernel truncation radius must be >= 0");
  if (!(rho > 0.0)) throw InputError("kernel decay rate rho must be positive");
  ToeplitzKernel k;
  k.family_ = family;
  k.dim_ = dim;
  k.radius_ = radius;
  k.rho_ = rho;
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= 2 * radius + 1;
  k.table_.assign(n, 0.0);
  for (const auto& [r, val] : entries) {
    if (r.dim() != dim) throw InputError("kernel entry has wrong dimension");
    if (r.sup_norm() <= radius) k.table_[k.slot(r)] = val;
  }
  k.finalize();
  return k;
}

ToeplitzKernel ToeplitzKernel::zero(int dim, double rho) { return from_table(KernelFamily::Zero, dim, 0, rho, {}); }

ToeplitzKernel ToeplitzKernel::laplacian_l1(int dim, double amplitude, double rho) {
  return from_table(KernelFamily::LaplacianL1, dim, 1, rho, neighbour_entries(dim, amplitude, false));
}

ToeplitzKernel ToeplitzKernel::laplacian_sup(int dim, double amplitude, double rho) {
  return from_table(KernelFamily::LaplacianSup, dim, 1, rho, neighbour_entries(dim, amplitude, true));
}

ToeplitzKernel ToeplitzKernel::exp_decay(int dim, double rho, int radius, double amplitude) {
  if (!(rho > 0.0)) throw InputError("kernel decay rate rho must be positive");
  if (radius <= 0) radius = static_cast<int>(std::floor(14.0 * std::log(10.0) / rho)) + 1;
  std::vector<std::pair<LatticePoint, double>> e;
  for_each_point(Box::cube(LatticePoint(dim), radius), [&](const LatticePoint& r) {
    if (r.sup_norm() > 0) e.emplace_back(r, amplitude * std::exp(-rho * r.sup_norm()));
  });
  return from_table(KernelFamily::ExpDecay, dim, radius, rho, e);
}

double ToeplitzKernel::decay_certificate() const noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [r, val] : support()) {
    const double a = std::abs(val);
    if (r.sup_norm() == 0) {
      if (a > 1.0) return 0.0;
      continue;
    }
    best = std::min(best, -std::log(a) / r.sup_norm());
  }
  return std::max(best, 0.0);
}

double ToeplitzKernel::row_sum() const noexcept {
  double s = 0.0;
  for (double v : table_) s += std::abs(v);
  return s;
}

std::vector<std::pair<LatticePoint, double>> ToeplitzKernel::support() const {
  std::vector<std::pair<LatticePoint, double>> out;
  if (dim_ == 0) return out;
  for_each_point(Box::cube(LatticePoint(dim_), radius_), [&](const LatticePoint& r) {
    const double v = table_[slot(r)];
    if (v != 0.0) out.emplace_back(r, v);
  });
  return out;
}

ToeplitzKernel dual_kernel_from_symbol(const TrigPotential& symbol, double rho) {
  if (!symbol.is_even()) throw InputError("symbol has sine terms; its dual kernel is not symmetric");
  const int dim = symbol.num_vars();
  std::map<LatticePoint, double> coef;
  int radius = 0;
  for (const auto& t : symbol.terms()) {
    const LatticePoint k(t.k);
    radius = std::max(radius, k.sup_norm());
    if (k.sup_norm() == 0) {
      coef[k] += t.cos_coef;
    } else {
      coef[k] += 0.5 * t.cos_coef;
      coef[-k] += 0.5 * t.cos_coef;
    }
  }
  std::vector<std::pair<LatticePoint, double>> entries(coef.begin(), coef.end());
  ToeplitzKernel probe = ToeplitzKernel::from_table(KernelFamily::FourierSymbol, dim, radius, 1.0, entries);
  if (!(rho > 0.0)) {
    const double cert = probe.decay_certificate();
    rho = (cert > 0.0 && std::isfinite(cert)) ? cert : 1.0;
  }
  return ToeplitzKernel::from_table(KernelFamily::FourierSymbol, dim, radius, rho, entries);
}

TrigPotential kernel_symbol(const ToeplitzKernel& S) {
  std::vector<TrigTerm> terms;
  for (const auto& [r, val] : S.support()) {
    if (r.sup_norm() == 0) terms.push_back({r.to_vector(), val, 0.0});
    else if (-r < r) terms.push_back({r.to_vector(), 2.0 * val, 0.0});
  }
  if (terms.empty()) terms.push_back({std::vector<int>(S.dim(), 0), 0.0, 0.0});
  return {S.dim(), terms};
}

// ---------------------------------------------------------------------------------
// Model and assembly

void ModelConfig::validate() const {
  if (!(lambda > 1.0)) throw InputError("lambda must exceed 1");
  if (blocks.dim() < 1) throw InputError("block structure is empty");
  if (kernel.dim() != blocks.dim()) throw InputError("kernel dimension does not match the number of blocks");
  if (potential.num_vars() != blocks.total()) throw InputError("potential variables do not match sum of block sizes");
  if (omega.size() != blocks.total()) throw InputError("omega length does not match sum of block sizes");
}

Eigen::VectorXd potential_on(const ModelConfig& cfg, const PointSet& region, const Phase& x) {
  Eigen::VectorXd d(region.size());
  for (std::size_t i = 0; i < region.size(); ++i)
    d[static_cast<Eigen::Index>(i)] = cfg.potential(shift_phase(x, cfg.omega, cfg.blocks, region[i]));
  return d;
}

Eigen::MatrixXd hopping_matrix(const ToeplitzKernel& S, double lambda, const PointSet& region) {
  const auto n = static_cast<Eigen::Index>(region.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const double inv = 1.0 / lambda;
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, i) = inv * S(LatticePoint(region.dim()));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const LatticePoint r = region[j] - region[i];
      if (r.sup_norm() > S.radius()) continue;
      const double v = inv * S(r);
      A(i, j) = v;
      A(j, i) = v;
    }
  }
  return A;
}

Eigen::MatrixXd assemble_restricted(const ModelConfig& cfg, const PointSet& region, const Phase& x, double E) {
  if (region.empty()) throw InputError("assemble_restricted: empty region");
  if (region.dim() != cfg.dim()) throw InputError("assemble_restricted: region dimension mismatch");
  Eigen::MatrixXd M = hopping_matrix(cfg.kernel, cfg.lambda, region);
  M.diagonal() += potential_on(cfg, region, x) - Eigen::VectorXd::Constant(M.rows(), E);
  return M;
}

double spectral_bound(const ModelConfig& cfg) {
  return cfg.potential.coefficient_sum() + cfg.kernel.row_sum() / cfg.lambda;
}

}  // namespace qpl
