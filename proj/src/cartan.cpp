#include "qpl/cartan.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace qpl {

std::vector<Eigen::Index> complement_indices(Eigen::Index n, const std::vector<Eigen::Index>& V) {
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (auto v : V) in[static_cast<std::size_t>(v)] = 1;
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

namespace {

double min_abs_eigenvalue(const Eigen::MatrixXd& T) {
  if (T.rows() == 1) return std::abs(T(0, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().minCoeff();
}

Eigen::MatrixXd random_symmetric(int n, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) A(i, k) = g(rng);
  A = 0.5 * (A + A.transpose()).eval();
  return A * (scale / operator_norm(A));
}

}  // namespace

AnalyticMatrixFamily scalar_family(double delta) {
  AnalyticMatrixFamily f;
  f.name = "scalar";
  f.J = 1;
  f.delta = delta;
  f.B1 = std::max(1.0, std::sqrt(2.0) * delta);
  f.eval = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Constant(1, 1, x[0]); };
  return f;
}

AnalyticMatrixFamily polynomial_family(int size, int J, double delta, double scale, std::uint64_t seed) {
  if (size < 1 || J < 1) throw InputError("polynomial_family: size and J must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Eigen::MatrixXd> A;
  for (int i = 0; i <= J; ++i) A.push_back(random_symmetric(size, scale, rng));
  AnalyticMatrixFamily f;
  f.name = "polynomial";
  f.J = J;
  f.delta = delta;
  f.B1 = std::max(1.0, scale * (1.0 + J * std::sqrt(2.0) * delta));
  f.eval = [A, J](const Eigen::VectorXd& x) {
    Eigen::MatrixXd T = A[0];
    for (int i = 0; i < J; ++i) T += x[i] * A[i + 1];
    return T;
  };
  return f;
}

AnalyticMatrixFamily restricted_operator_family(const ModelConfig& cfg, const PointSet& region, const Phase& x, double E,
                                                int j, double delta) {
  const int o = cfg.blocks.offset(j), bj = cfg.blocks.sizes[j];
  AnalyticMatrixFamily f;
  f.name = "restricted_operator";
  f.J = bj;
  f.delta = delta;
  f.B1 = std::max(1.0, cfg.potential.strip_bound(delta) + std::abs(E) + cfg.kernel.row_sum() / cfg.lambda);
  f.eval = [cfg, region, x, E, o, bj](const Eigen::VectorXd& y) {
    Phase moved = x;
    moved.segment(o, bj) += y;
    return assemble_restricted(cfg, region, reduce_mod1(moved), E);
  };
  return f;
}

PivotData pivot_at_anchor(const AnalyticMatrixFamily& family, std::vector<Eigen::Index> V) {
  const Eigen::MatrixXd T = family.eval(Eigen::VectorXd::Zero(family.J));
  PivotData p;
  p.V = std::move(V);
  const auto Vc = complement_indices(T.rows(), p.V);
  if (!Vc.empty()) {
    const Eigen::MatrixXd T1 = T(Vc, Vc);
    const double m = min_abs_eigenvalue(T1);
    if (m == 0.0) throw SingularMatrixError("pivot_at_anchor: restricted block is singular", INFINITY);
    p.B2 = std::max(1.0, 1.0 / m);
  }
  return p;
}

double cauchy_derivative_ratio(const AnalyticMatrixFamily& family) {
  const double h = 1e-6 * family.delta;
  double worst = 0.0;
  for (int i = 0; i < family.J; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(family.J);
    e[i] = h;
    const Eigen::MatrixXd D = (family.eval(e) - family.eval(-e)) / (2 * h);
    worst = std::max(worst, operator_norm(D) / (4.0 * family.B1 / family.delta));
  }
  return worst;
}

CartanResult cartan_bad_measure(const AnalyticMatrixFamily& family, const PivotData& pivot, double epsilon,
                                const CartanOptions& opt) {
  if (!(epsilon > 0.0)) throw InputError("cartan_bad_measure: epsilon must be positive");
  const int J = family.J;
  const double delta = family.delta;
  const double B2 = pivot.B2;
  const double B3 = opt.B3 > 0.0 ? opt.B3 : 1.0 / epsilon;
  const int M = std::max<int>(1, static_cast<int>(pivot.V.size()));

  CartanResult r;
  r.epsilon = epsilon;
  r.small_epsilon_ok = std::log(epsilon) <= -10.0 * M * std::log(1.0 + family.B1 + B2);

  const double vol_half = std::pow(delta, J);
  r.empirical = estimate_fraction(J, opt.samples, opt.seed, opt.method, [&](const Eigen::VectorXd& u) {
    return min_abs_eigenvalue(family.eval((u.array() - 0.5) * delta)) <= epsilon;
  });
  r.empirical.value *= vol_half;
  r.empirical.half_width *= vol_half;

  MeasureEstimate big = estimate_fraction(J, opt.samples, block_seed(opt.seed, 0x5eed), opt.method,
                                          [&](const Eigen::VectorXd& u) {
                                            return min_abs_eigenvalue(family.eval((2.0 * u.array() - 1.0) * delta)) <=
                                                   1.0 / B3;
                                          });
  const double big_measure = big.value * std::pow(2.0 * delta, J);
  const double allowed = std::pow(1e-3, J) * std::pow(J, -J) * vol_half * std::pow(1.0 + family.B1, -J) *
                         std::pow(1.0 + B2, -J);
  r.small_bad_set_ok = big_measure <= allowed;

  r.s = std::log(1.0 / epsilon) / (M * std::log(B2 + B3));
  r.bound_log = std::log(opt.C) + J * std::log(delta) - opt.c * std::pow(std::max(r.s, 0.0), 1.0 / J);
  r.pass = r.empirical.value <= std::exp(r.bound_log);
  return r;
}

CartanCalibration calibrate_cartan(const std::vector<CartanResult>& ladder, int J, double delta) {
  std::vector<double> xs, ys;
  for (const auto& r : ladder)
    if (r.empirical.value > 0.0) {
      xs.push_back(std::pow(std::max(r.s, 0.0), 1.0 / J));
      ys.push_back(-std::log(r.empirical.value / std::pow(delta, J)));
    }
  CartanCalibration cal;
  const double slope = least_squares_slope(xs, ys);
  cal.c = std::isnan(slope) ? 0.0 : std::max(0.0, slope);
  cal.C = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) cal.C = std::max(cal.C, std::exp(-ys[i] + cal.c * xs[i]));
  if (cal.C == 0.0) cal.C = 1.0;
  return cal;
}

MeasureEstimate cartan_y_measure(const ModelConfig& cfg, const PointSet& region, int N, double E, const Phase& x, int j,
                                 double sigma, std::uint64_t samples, std::uint64_t seed) {
  const int o = cfg.blocks.offset(j), bj = cfg.blocks.sizes[j];
  const double threshold = std::exp(-std::sqrt(static_cast<double>(N)));
  MeasureEstimate m = estimate_fraction(bj, samples, seed, SamplingMethod::MonteCarlo, [&](const Eigen::VectorXd& u) {
    Phase moved = x;
    moved.segment(o, bj) += (2.0 * u.array() - 1.0).matrix() * sigma;
    return min_abs_eigenvalue(assemble_restricted(cfg, region, reduce_mod1(moved), E)) <= threshold;
  });
  const double vol = std::pow(2.0 * sigma, bj);
  m.value *= vol;
  m.half_width *= vol;
  return m;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t k = i;
    while (k + 1 < idx.size() && v[idx[k + 1]] == v[idx[i]]) ++k;
    const double avg = 0.5 * (i + k) + 1.0;
    for (std::size_t t = i; t <= k; ++t) r[idx[t]] = avg;
    i = k + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw InputError("spearman: need two equal-length samples");
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n, mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace qpl
