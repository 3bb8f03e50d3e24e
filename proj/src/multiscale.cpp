#include "qpl/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpl/errors.hpp"

namespace qpl {

ScaleConstants::ScaleConstants(double c3, double c4, int b_tilde) : c3_(c3), c4_(c4), b_tilde_(b_tilde) {
  if (!(c3 > 0.0 && c3 < c4 && c4 < 1.0)) throw InputError("scale constants need 0 < c3 < c4 < 1");
  if (b_tilde < 1) throw InputError("b_tilde must be >= 1");
  c1_ = c3 / (4.0 * b_tilde);
  c2_ = c1_ * c1_ / 2.0;
}

ScaleConstants ScaleConstants::toy(double c1, double c2, double c3) {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw InputError("toy scale constants must be positive");
  ScaleConstants k;
  k.c1_ = c1;
  k.c2_ = c2;
  k.c3_ = c3;
  k.c4_ = std::max(c3, 1.0);
  k.b_tilde_ = 1;
  return k;
}

ScaleStep scale_step(const LogScale& N1, const ScaleConstants& k) {
  ScaleStep s;
  s.N2 = N1.pow(2.0 / k.c1());
  s.N3 = s.N2.pow(k.c2()).exp();
  return s;
}

LogScale schedule_f(const LogScale& x, const ScaleConstants& k) { return x.pow(k.c1()).exp(); }

LogScale schedule_g(const LogScale& x, const ScaleConstants& k) { return x.pow(k.c1()).scale(2.0).exp(); }

LogScale schedule_f_iterate(const LogScale& x, const ScaleConstants& k, int n) {
  LogScale y = x;
  for (int i = 0; i < n; ++i) y = schedule_f(y, k);
  return y;
}

double g_dominates_threshold(double c1) { return 1.0 / std::expm1(std::log(2.0) / c1); }

ScheduleMaps schedule_maps(const LogScale& x, const ScaleConstants& k) {
  ScheduleMaps m;
  m.f = schedule_f(x, k);
  m.g = schedule_g(x, k);
  m.below_threshold = x < LogScale(g_dominates_threshold(k.c1()));
  return m;
}

namespace {

/// Root of an increasing function on [lo, hi] by bisection.
template <typename F>
double bisect_increasing(F h, double lo, double hi) {
  while (h(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

double growth_threshold_log(double c1) {
  auto h = [c1](double t) { return c1 * t - std::log(2.0 * t); };
  const double tmin = 1.0 / c1;
  if (h(tmin) >= 0.0) return 0.0;
  return bisect_increasing(h, tmin, 2.0 * tmin);
}

RhoSequence rho_sequence(double rho, const LogScale& N_start, double degrade_constant, const ScaleConstants& k,
                         int steps) {
  if (!(degrade_constant >= 0.0)) throw InputError("rho_sequence: degrade constant must be >= 0");
  if (steps < 1) throw InputError("rho_sequence: need at least one step");
  RhoSequence out;
  LogScale y = N_start;
  double acc = 0.0;
  for (int j = 1; j <= steps; ++j) {
    const LogScale logy = y.pow(k.c1());  // log f(y) = y^{c1}
    y = logy.exp();
    const double ly = logy.to_double();
    const double term = degrade_constant == 0.0 ? 0.0 : degrade_constant * std::exp(-0.5 * ly);
    out.terms.push_back(term);
    acc += term;
    out.rho.push_back(0.8 * rho - acc);
  }
  if (degrade_constant == 0.0) {
    out.tail_bound = 0.0;
  } else {
    const double q = out.terms.back() / degrade_constant;
    const bool growing = y.log() >= LogScale(growth_threshold_log(k.c1()));
    if (growing && q < 1.0) {
      const double q2 = q * q;
      out.tail_bound = degrade_constant * q2 / (1.0 - q2);
    } else {
      out.tail_bound = std::numeric_limits<double>::infinity();
    }
  }
  out.infimum = out.rho.back() - out.tail_bound;
  out.above_half = out.infimum >= 0.5 * rho;
  return out;
}

double power_sum(double a, double b, double p) {
  if (!(a >= 1.0) || b < a) return 0.0;
  if (a > 1e15) {
    const double tail = std::isinf(a) ? 0.0 : std::pow(a, 1 - p) / (p - 1);
    const double upper = !std::isfinite(b) || b > 1e300 ? 0.0 : std::pow(b, 1 - p) / (p - 1);
    return tail - upper;
  }
  a = std::ceil(a);
  const bool infinite = !std::isfinite(b) || b > 1e300;
  if (!infinite) b = std::floor(b);
  constexpr double kDirect = 100000.0;
  const double direct_end = infinite ? a + kDirect - 1 : std::min(b, a + kDirect - 1);
  double s = 0.0;
  for (double n = direct_end; n >= a; n -= 1.0) s += std::pow(n, -p);
  if (!infinite && direct_end >= b) return s;
  const double c = direct_end + 1.0;
  auto f = [p](double x) { return std::pow(x, -p); };
  auto f1 = [p](double x) { return -p * std::pow(x, -p - 1); };
  auto f3 = [p](double x) { return -p * (p + 1) * (p + 2) * std::pow(x, -p - 3); };
  double em = std::pow(c, 1 - p) / (p - 1) + 0.5 * f(c) - f1(c) / 12.0 + f3(c) / 720.0;
  if (!infinite) em += -std::pow(b, 1 - p) / (p - 1) + 0.5 * f(b) + f1(b) / 12.0 - f3(b) / 720.0;
  return s + em;
}

LogScale omega_threshold(const ScaleConstants& k) {
  const double c1 = k.c1(), c3 = k.c3();
  auto h = [c1, c3](double t) { return std::log(c3 / 5.0) + c1 * t - std::log(t); };
  const double tmin = 1.0 / c1;
  if (h(tmin) >= 0.0) return LogScale(1.0);
  const double t = bisect_increasing(h, tmin, 2.0 * tmin);
  if (t > 700.0) return LogScale::from_log(t);
  double N = std::ceil(std::exp(t));
  auto ok = [c1, c3](double n) { return c3 * std::pow(n, c1) >= 5.0 * std::log(n); };
  while (N > 1.0 && ok(N - 1.0)) N -= 1.0;
  while (!ok(N)) N += 1.0;
  return LogScale(N);
}

OmegaBudget omega_budget(const std::vector<std::pair<LogScale, LogScale>>& ranges, const ScaleConstants& k) {
  OmegaBudget b;
  b.threshold = omega_threshold(k);
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& [lo, hi] : ranges) {
    if (hi < lo) continue;
    if (lo < b.threshold && b.comparison_ok) {
      b.comparison_ok = false;
      b.flagged = "range starting at " + lo.to_string() + " lies below the threshold " + b.threshold.to_string();
    }
    const double a = lo.to_double();
    const double z = hi.to_double();
    b.excluded += power_sum(std::max(1.0, a), z);
    smallest = std::min(smallest, a);
  }
  b.tail_bound = std::isfinite(smallest) ? power_sum(std::max(1.0, smallest), INFINITY) : 0.0;
  return b;
}

InitialLambda initial_lambda(const LogScale& N_bar, int d) {
  if (d < 1) throw InputError("initial_lambda: d must be >= 1");
  const double N = N_bar.to_double();
  InitialLambda out;
  out.log_lambda_min = std::log(4.0) + std::sqrt(N) + d * std::log(2.0 * N + 1.0);
  out.log_delta = std::log(0.5) - std::sqrt(N);
  out.lambda_min = LogScale::from_log(out.log_lambda_min);
  out.delta = std::exp(out.log_delta);
  return out;
}

std::vector<LedgerRow> property_ledger(double rho, const LogScale& N_start, double degrade_constant,
                                       const ScaleConstants& k, int steps) {
  const RhoSequence rs = rho_sequence(rho, N_start, degrade_constant, k, steps);
  std::vector<LedgerRow> rows;
  LogScale N = N_start;
  for (int i = 0; i <= steps; ++i) {
    LedgerRow r;
    r.step = i;
    r.N = N;
    r.rho = i == 0 ? 0.8 * rho : rs.rho[i - 1];
    r.measure_exponent = N.pow(k.c1());
    r.omega_excluded = power_sum(std::max(1.0, N.to_double()), INFINITY);
    rows.push_back(r);
    N = schedule_f(N, k);
  }
  return rows;
}

HitCount hit_count(const ModelConfig& cfg, const SublevelSpec& spec, const Phase& x, int N, int N1) {
  const int d = cfg.dim();
  if (N < 1 || N1 < 0) throw InputError("hit_count: need N >= 1 and N1 >= 0");
  const int inner = ceil_power(N, 1.0 / (10.0 * d));
  const Box outer = Box::cube(LatticePoint(d), N + N1);
  const PointSet grid = PointSet::from_box(outer);
  std::vector<char> in_x(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    in_x[i] = spec.contains(shift_phase(x, cfg.omega, cfg.blocks, grid[i])) ? 1 : 0;

  HitCount h;
  h.N = N;
  for_each_point(Box::cube(LatticePoint(d), N), [&](const LatticePoint& k) {
    if (k.sup_norm() <= inner) return;
    ++h.cap;
    bool hit = false;
    for_each_point(Box::cube(k, N1), [&](const LatticePoint& p) {
      if (!hit && in_x[static_cast<std::size_t>(grid.index_of(p))]) hit = true;
    });
    h.count += hit ? 1 : 0;
  });
  return h;
}

HitScan hit_count_scan(const ModelConfig& cfg, const SublevelSpec& spec, const Phase& x, int N_lo, int N_hi, int N1) {
  if (N_hi < N_lo) throw InputError("hit_count_scan: empty range");
  HitScan s;
  int zeros = 0;
  for (int N = N_lo; N <= N_hi; ++N) {
    s.counts.push_back(hit_count(cfg, spec, x, N, N1));
    zeros += s.counts.back().count == 0 ? 1 : 0;
  }
  s.zero_fraction = static_cast<double>(zeros) / static_cast<double>(s.counts.size());
  return s;
}

}  // namespace qpl
