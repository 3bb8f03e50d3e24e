#include "qpl/initial_scale.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qpl/errors.hpp"
#include "qpl/greens.hpp"

namespace qpl {

bool in_bad_set(const SublevelSpec& spec, const BlockStructure& blocks, const Phase& x, int N, const Frequency& omega) {
  if (N < 0) throw InputError("in_bad_set: N must be >= 0");
  bool hit = false;
  for_each_point(Box::cube(LatticePoint(blocks.dim()), N), [&](const LatticePoint& n) {
    if (!hit && spec.contains(shift_phase(x, omega, blocks, n))) hit = true;
  });
  return hit;
}

namespace {

double golden_extremum(const std::function<double(double)>& g, double a, double b, bool maximize) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  auto f = [&](double t) { return maximize ? -g(t) : g(t); };
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double bisect_level(const std::function<double(double)>& g, double a, double b, double level) {
  double fa = g(a) - level;
  for (int it = 0; it < 100 && b - a > 1e-16; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = g(m) - level;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double sublevel_length_1d(const std::function<double(double)>& g, double delta, int grid) {
  if (!(delta > 0.0)) return 0.0;
  std::vector<double> vals(grid + 1);
  for (int i = 0; i <= grid; ++i) vals[i] = g(static_cast<double>(i) / grid);
  std::vector<double> pts;
  pts.reserve(grid + 64);
  for (int i = 0; i <= grid; ++i) pts.push_back(static_cast<double>(i) / grid);
  for (int i = 0; i < grid; ++i) {
    const double prev = vals[(i + grid - 1) % grid], cur = vals[i], next = vals[i + 1];
    const bool is_max = cur >= prev && cur >= next;
    const bool is_min = cur <= prev && cur <= next;
    if (!is_max && !is_min) continue;
    const double lo = (i - 1.0) / grid, hi = (i + 1.0) / grid;
    double t = golden_extremum(g, lo, hi, is_max);
    t -= std::floor(t);
    pts.push_back(t);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> cuts = pts;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (b <= a) continue;
    const double ga = g(a), gb = g(b);
    for (double level : {-delta, delta})
      if ((ga - level) * (gb - level) < 0.0) cuts.push_back(bisect_level(g, a, b, level));
  }
  std::sort(cuts.begin(), cuts.end());
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b <= a) continue;
    if (std::abs(g(0.5 * (a + b))) < delta) len += b - a;
  }
  return len;
}

MeasureEstimate section_measure(const SublevelSpec& spec, const BlockStructure& blocks, int j,
                                const Eigen::VectorXd& section, SamplingMethod method, std::uint64_t samples,
                                std::uint64_t seed) {
  const int bj = blocks.sizes.at(j);
  if (section.size() != blocks.total() - bj) throw InputError("section_measure: section has the wrong dimension");
  MeasureEstimate est;
  est.method = method;
  est.seed = seed;
  if (!(spec.delta > 0.0)) {
    est.samples = samples;
    return est;
  }
  auto at = [&](const Eigen::VectorXd& theta) { return spec.v(insert_block(section, theta, blocks, j)) - spec.E; };

  if (method != SamplingMethod::Quadrature) {
    return estimate_fraction(bj, samples, seed, method, [&](const Eigen::VectorXd& u) {
      return std::abs(at(u)) < spec.delta;
    });
  }
  if (bj == 1) {
    est.value = sublevel_length_1d([&](double t) { return at(Eigen::VectorXd::Constant(1, t)); }, spec.delta);
    est.half_width = 1e-10;
    est.samples = 8192;
    return est;
  }
  if (bj != 2) throw InputError("section_measure: quadrature needs a block of size 1 or 2");
  auto midpoint = [&](int K) {
    double s = 0.0;
    for (int i = 0; i < K; ++i) {
      const double t1 = (i + 0.5) / K;
      s += sublevel_length_1d(
          [&](double t2) {
            Eigen::VectorXd th(2);
            th << t1, t2;
            return at(th);
          },
          spec.delta, 2048);
    }
    return s / K;
  };
  const double fine = midpoint(512), coarse = midpoint(256);
  est.value = fine;
  est.half_width = std::abs(fine - coarse) + 1e-10;
  est.samples = 512ull * 2048ull;
  return est;
}

SupSectionMeasure sup_section_measure(const SublevelSpec& spec, const BlockStructure& blocks, int j, int sections,
                                      SamplingMethod method, std::uint64_t samples, std::uint64_t seed) {
  const int rest = blocks.total() - blocks.sizes.at(j);
  SupSectionMeasure out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int count = rest == 0 ? 1 : std::max(1, sections);
  for (int s = 0; s < count; ++s) {
    Eigen::VectorXd sec(rest);
    for (int i = 0; i < rest; ++i) sec[i] = unif(rng);
    const MeasureEstimate m = section_measure(spec, blocks, j, sec, method, samples, block_seed(seed, s));
    if (s == 0 || m.value > out.worst.value) {
      out.worst = m;
      out.worst_section = sec;
      out.worst_index = s;
    }
  }
  out.sections_sampled = count;
  return out;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw InputError("log_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
  return g;
}

LojasiewiczFit lojasiewicz_fit(const TrigPotential& v, double E, const BlockStructure& blocks, int j,
                               const std::vector<double>& deltas, int sections, SamplingMethod method,
                               std::uint64_t samples, std::uint64_t seed) {
  if (deltas.size() < 2) throw InputError("lojasiewicz_fit: need at least two thresholds");
  const auto [lo, hi] = std::minmax_element(deltas.begin(), deltas.end());
  if (!(*lo > 0.0) || *hi / *lo < 100.0 * (1.0 - 1e-12)) throw InputError("lojasiewicz_fit: delta grid must span two decades");
  LojasiewiczFit fit;
  fit.deltas = deltas;
  std::vector<double> lx, ly;
  for (double d : deltas) {
    const auto sup = sup_section_measure({v, E, d}, blocks, j, sections, method, samples, seed);
    fit.measures.push_back(sup.worst.value);
    fit.half_widths.push_back(sup.worst.half_width);
    fit.section_ids.push_back(sup.worst_index);
    if (sup.worst.value > 0.0) {
      lx.push_back(std::log(d));
      ly.push_back(std::log(sup.worst.value));
    }
  }
  if (lx.size() < 2) {
    fit.degenerate = true;
    fit.note = "fewer than two thresholds with positive measure";
    return fit;
  }
  fit.exponent_a = least_squares_slope(lx, ly);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= lx.size();
  const double intercept = my - fit.exponent_a * mx;
  fit.constant_C = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) ss += std::pow(ly[i] - intercept - fit.exponent_a * lx[i], 2);
  fit.residual = std::sqrt(ss / lx.size());
  if (!(fit.exponent_a > 0.0)) {
    fit.degenerate = true;
    fit.note = "fitted exponent is not positive";
  }
  if (lx.size() < deltas.size()) fit.note = "some thresholds had zero measure";
  return fit;
}

NeumannReport neumann_bound_check(const ModelConfig& cfg, const ElementaryRegion& Q, double E, const Phase& x,
                                  double delta) {
  if (!(delta > 0.0)) throw InputError("neumann_bound_check: delta must be positive");
  const int N = Q.size, d = cfg.dim();
  NeumannReport rep;
  rep.bound = 2.0 / delta;
  rep.lambda_ok = cfg.lambda >= 2.0 / delta * std::pow(2.0 * N + 1.0, d);
  const Phase x0 = shift_phase(x, cfg.omega, cfg.blocks, Q.center);
  if (in_bad_set({cfg.potential, E, delta}, cfg.blocks, x0, N, cfg.omega))
    throw PreconditionFailure("bad_set", "x lies in X_N");
  if (!rep.lambda_ok) throw PreconditionFailure("lambda", "lambda < 2 delta^{-1} (2N+1)^d");
  if (!cfg.kernel.satisfies_go())
    throw PreconditionFailure("kernel_decay", "kernel prefactor " + std::to_string(cfg.kernel.go_prefactor()) +
                                                  " exceeds 1");

  const GreensMatrix G = compute_greens(cfg, Q.points(), E, x);
  rep.norm = operator_norm(G.G);
  if (rep.norm > rep.bound * (1.0 + 1e-12))
    throw InvariantViolation("||G_Q|| = " + std::to_string(rep.norm) + " exceeds 2/delta = " +
                             std::to_string(rep.bound));
  const double rho = cfg.kernel.rho();
  const auto& pts = G.region.points();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double allowed_log = std::log(rep.bound) - rho * sup_distance(pts[i], pts[k]);
      const double a = std::abs(G.G(i, k));
      if (a > 0.0) rep.worst_decay_ratio = std::max(rep.worst_decay_ratio, std::exp(std::log(a) - allowed_log));
    }
  rep.decay_ok = rep.worst_decay_ratio <= 1.0 + 1e-9;
  if (!rep.decay_ok)
    throw InvariantViolation("Green's function decay exceeds 2/delta e^{-rho r} by factor " +
                             std::to_string(rep.worst_decay_ratio));
  return rep;
}

NeumannSeries neumann_series_compare(const ModelConfig& cfg, const ElementaryRegion& Q, double E, const Phase& x,
                                     double delta, int max_terms) {
  if (max_terms < 0) throw InputError("neumann_series_compare: terms must be >= 0");
  const PointSet pts = Q.points();
  const Eigen::VectorXd b = potential_on(cfg, pts, x).array() - E;
  const double gap = b.cwiseAbs().minCoeff();
  if (gap < delta) throw PreconditionFailure("diagonal_gap", "min |v - E| = " + std::to_string(gap) + " < delta");
  const Eigen::MatrixXd A = hopping_matrix(cfg.kernel, cfg.lambda, pts);
  NeumannSeries out;
  out.contraction = schur_test_bound(A) / gap;
  if (out.contraction > 0.5)
    throw PreconditionFailure("contraction", "||A B^{-1}|| bound " + std::to_string(out.contraction) + " > 1/2");

  const GreensMatrix G = compute_greens(cfg, pts, E, x);
  const Eigen::VectorXd binv = b.cwiseInverse();
  const Eigen::MatrixXd X = A * binv.asDiagonal();
  Eigen::MatrixXd term = binv.asDiagonal();
  Eigen::MatrixXd partial = term;
  out.residuals.push_back(max_entry_difference(partial, G.G));
  for (int k = 1; k <= max_terms; ++k) {
    term = -(term * X).eval();
    partial += term;
    out.residuals.push_back(max_entry_difference(partial, G.G));
  }
  return out;
}

}  // namespace qpl
