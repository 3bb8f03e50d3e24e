#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qpl/initial_scale.hpp"
#include "qpl/log_scale.hpp"
#include "qpl/model.hpp"

namespace qpl {

/// c3 < c4 in (0,1), b_tilde >= 1; c1 = c3 / (4 b_tilde), c2 = c1^2 / 2.
class ScaleConstants {
 public:
  ScaleConstants(double c3, double c4, int b_tilde);
  /// Explicit c1, c2 for toy schedules (c3, c4 set to c1-compatible placeholders).
  static ScaleConstants toy(double c1, double c2, double c3 = 1.0);

  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }
  double c3() const noexcept { return c3_; }
  double c4() const noexcept { return c4_; }
  int b_tilde() const noexcept { return b_tilde_; }

 private:
  ScaleConstants() = default;
  double c1_ = 0, c2_ = 0, c3_ = 0, c4_ = 0;
  int b_tilde_ = 1;
};

struct ScaleStep {
  LogScale N2;  ///< N1^{2/c1}
  LogScale N3;  ///< e^{N2^{c2}}
};

ScaleStep scale_step(const LogScale& N1, const ScaleConstants& k);

/// f(x) = e^{x^{c1}}.
LogScale schedule_f(const LogScale& x, const ScaleConstants& k);
/// g(x) = f(x)^2.
LogScale schedule_g(const LogScale& x, const ScaleConstants& k);
/// f applied n times.
LogScale schedule_f_iterate(const LogScale& x, const ScaleConstants& k, int n);

struct ScheduleMaps {
  LogScale f;
  LogScale g;
  bool below_threshold = false;  ///< x below the point where g(x) >= f(x+1) starts to hold
};

ScheduleMaps schedule_maps(const LogScale& x, const ScaleConstants& k);

/// 1 / (2^{1/c1} - 1): g(x) >= f(x+1) exactly when x is at least this value.
double g_dominates_threshold(double c1);

/// Smallest t = log y such that f(y') >= y'^2 for every y' >= y, i.e. e^{c1 t} >= 2t past
/// the minimum of c1 t - log(2t).
double growth_threshold_log(double c1);

struct RhoSequence {
  std::vector<double> rho;     ///< rho_1 .. rho_steps
  std::vector<double> terms;   ///< degrade / sqrt(f^{(j)}(N_start))
  double tail_bound = 0.0;     ///< bound for the terms after the last one
  double infimum = 0.0;        ///< last rho minus the tail bound
  bool above_half = false;     ///< infimum >= rho/2
};

RhoSequence rho_sequence(double rho, const LogScale& N_start, double degrade_constant, const ScaleConstants& k,
                         int steps);

/// sum_{N=a}^{b} N^{-p} for integers 1 <= a <= b; b = +inf allowed. Direct summation up to a
/// cutoff, Euler-Maclaurin beyond it.
double power_sum(double a, double b, double p = 5.0);

struct OmegaBudget {
  double excluded = 0.0;             ///< sum over the ranges of N^{-5}
  double tail_bound = 0.0;           ///< sum_{N >= smallest start} N^{-5}
  LogScale threshold;                ///< minimal N from which c3 N^{c1} >= 5 log N holds for good
  bool comparison_ok = true;         ///< every range starts at or above the threshold
  std::string flagged;               ///< first range failing the comparison
};

/// Ranges [lo, hi] of scales, hi may be a LogScale beyond the double range (treated as +inf
/// for the sum).
OmegaBudget omega_budget(const std::vector<std::pair<LogScale, LogScale>>& ranges, const ScaleConstants& k);

/// Minimal N with c3 N^{c1} >= 5 log N for all N' >= N.
LogScale omega_threshold(const ScaleConstants& k);

struct InitialLambda {
  double log_lambda_min = 0.0;  ///< log 4 + sqrt(N_bar) + d log(2 N_bar + 1)
  double log_delta = 0.0;       ///< log(1/2) - sqrt(N_bar)
  LogScale lambda_min;
  double delta = 0.0;
};

InitialLambda initial_lambda(const LogScale& N_bar, int d);

struct LedgerRow {
  int step = 0;
  LogScale N;
  double rho = 0.0;
  LogScale measure_exponent;  ///< N^{c1}; the measure target is e^{-N^{c1}}
  double omega_excluded = 0.0;
};

/// Per-scale records N_i = f^{(i)}(N_start), rho_i, e^{-N_i^{c1}} and sum_{N >= N_i} N^{-5}.
std::vector<LedgerRow> property_ledger(double rho, const LogScale& N_start, double degrade_constant,
                                       const ScaleConstants& k, int steps);

struct HitCount {
  int N = 0;
  long count = 0;
  long cap = 0;  ///< |Lambda \ bar Lambda|
};

/// Counts k in [-N,N]^d minus the inner cube of radius ceil(N^{1/(10d)}) with x + k omega in
/// X_{N1}.
HitCount hit_count(const ModelConfig& cfg, const SublevelSpec& spec, const Phase& x, int N, int N1);

struct HitScan {
  std::vector<HitCount> counts;
  double zero_fraction = 0.0;
};

HitScan hit_count_scan(const ModelConfig& cfg, const SublevelSpec& spec, const Phase& x, int N_lo, int N_hi, int N1);

}  // namespace qpl
