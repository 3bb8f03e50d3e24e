#include "qpl/gluing.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <numbers>

#include "qpl/errors.hpp"

namespace qpl {

double resolvent_residual(const ModelConfig& cfg, const PointSet& lambda1, const PointSet& lambda2, double E,
                          const Phase& x) {
  if (lambda1.empty() || lambda2.empty()) throw InputError("resolvent_residual: empty piece");
  if (!lambda1.intersect(lambda2).empty()) throw InputError("resolvent_residual: pieces overlap");
  const PointSet whole = lambda1.unite(lambda2);
  const Eigen::MatrixXd M = assemble_restricted(cfg, whole, x, E);
  const GreensMatrix G = invert_restricted(whole, M, E, x);
  const GreensMatrix G1 = compute_greens(cfg, lambda1, E, x);
  const GreensMatrix G2 = compute_greens(cfg, lambda2, E, x);

  const auto n = M.rows();
  std::vector<Eigen::Index> idx1, idx2;
  for (const auto& p : lambda1) idx1.push_back(whole.index_of(p));
  for (const auto& p : lambda2) idx2.push_back(whole.index_of(p));
  Eigen::MatrixXd G12 = Eigen::MatrixXd::Zero(n, n);
  G12(idx1, idx1) = G1.G;
  G12(idx2, idx2) = G2.G;
  Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(n, n);
  Gamma(idx1, idx2) = M(idx1, idx2);
  Gamma(idx2, idx1) = M(idx2, idx1);

  const Eigen::MatrixXd rhs = G12 - G12 * Gamma * G.G;
  return max_entry_difference(G.G, rhs);
}

double window_tail_sum(double rho, int d) {
  if (!(rho > 0.0)) throw InputError("window_tail_sum: rho must be positive");
  double s = 0.0;
  for (int j = 0;; ++j) {
    const double term = std::pow(2.0 * j + 1.0, d) * std::exp(-0.5 * rho * j);
    s += term;
    if (term < 1e-18 && 0.5 * rho * j > d) break;
  }
  return s;
}

PasteBound ml_condition(int M0, int M1, double lambda, double rho, int d) {
  if (M0 < 1 || M1 < M0) throw InputError("ml_condition: need 1 <= M0 <= M1");
  if (!(rho > 0.0)) throw InputError("ml_condition: rho must be positive");
  if (!(lambda > 1.0)) throw InputError("lambda must exceed 1");
  const double log_tail = std::log(window_tail_sum(rho, d));
  PasteBound b;
  double worst = -std::numeric_limits<double>::infinity();
  for (int M = M0; M <= M1; ++M) {
    const double lv = std::log(2.0) - std::log(lambda) + std::sqrt(static_cast<double>(M)) + d * std::log(2.0 * M + 1.0) -
                      0.15 * rho * M + log_tail;
    if (lv > worst) {
      worst = lv;
      b.worst_M = M;
    }
  }
  b.ml_margin = std::exp(worst);
  b.feasible = worst <= std::log(0.5);
  b.bound_log = std::log(4.0) + d * std::log(2.0 * M1 + 1.0) + std::sqrt(static_cast<double>(M1));
  return b;
}

int scale_of(const PointSet& region) { return std::max(1, diameter(region) / 2); }

// ---------------------------------------------------------------------------------
// Window covers

int WindowCover::min_size() const {
  int m = INT_MAX;
  for (const auto& w : windows) m = std::min(m, w.size);
  return m;
}

int WindowCover::max_size() const {
  int m = 0;
  for (const auto& w : windows) m = std::max(m, w.size);
  return m;
}

std::optional<std::string> WindowCover::first_violation() const {
  if (windows.size() != domain.size()) return "cover has " + std::to_string(windows.size()) + " windows for " +
                                              std::to_string(domain.size()) + " points";
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const auto& k = domain[i];
    const auto& w = windows[i];
    if (!w.contains(k)) return "point " + to_string(k) + " is not in its window";
    for (const auto& p : w.points())
      if (!domain.contains(p)) return "window of " + to_string(k) + " leaves the domain at " + to_string(p);
    for (const auto& p : domain)
      if (!w.contains(p) && 2 * sup_distance(k, p) < w.size)
        return "point " + to_string(k) + " is closer than M/2 to the rest of the domain at " + to_string(p);
  }
  return std::nullopt;
}

WindowCover build_cover(const PointSet& domain, int M) {
  WindowCover c{domain, {}};
  c.windows.reserve(domain.size());
  for (const auto& k : domain) {
    auto w = find_window(k, domain, M);
    if (!w) throw PreconditionFailure("cover", "no window of size " + std::to_string(M) + " at " + to_string(k));
    c.windows.push_back(*w);
  }
  return c;
}

namespace {

void require_rate(double rho_bar, double lo, double hi, const char* what) {
  if (rho_bar < lo - 1e-12 || rho_bar > hi + 1e-12)
    throw PreconditionFailure("rate_range", std::string("rho_bar = ") + std::to_string(rho_bar) + " outside " + what);
}

void require_decay_kernel(const ModelConfig& cfg) {
  if (!cfg.kernel.satisfies_go())
    throw PreconditionFailure("kernel_decay", "kernel prefactor " + std::to_string(cfg.kernel.go_prefactor()) +
                                                  " exceeds 1 at rho = " + std::to_string(cfg.kernel.rho()));
}

/// Checks the window of every point: norm and row decay, each with constant factor
/// e^{slack}.
std::size_t check_windows(const ModelConfig& cfg, const WindowCover& cover, double E, const Phase& x, double rho_bar,
                          double slack) {
  std::size_t checked = 0;
  for (std::size_t i = 0; i < cover.domain.size(); ++i) {
    const auto& k = cover.domain[i];
    const auto& w = cover.windows[i];
    const GreensMatrix GW = compute_greens(cfg, w.points(), E, x);
    GoodnessOptions opt;
    opt.norm_log_slack = slack;
    opt.decay_log_slack = slack;
    opt.row = k;
    const GoodnessReport rep = goodness(GW, w.size, rho_bar, opt);
    if (!rep.norm_ok)
      throw PreconditionFailure("window_norm", "window at " + to_string(k) + " has log norm " +
                                                   std::to_string(rep.log_norm) + " > " +
                                                   std::to_string(rep.log_norm_bound));
    if (rep.violation_count > 0)
      throw PreconditionFailure("window_decay", "window at " + to_string(k) + " violates decay at " +
                                                    to_string(rep.decay_violations.front().m));
    ++checked;
  }
  return checked;
}

}  // namespace

PasteResult paste_norm(const ModelConfig& cfg, const PointSet& region, double E, const Phase& x,
                       const WindowCover& cover, double rho_bar, const PasteOptions& opt) {
  if (region.empty()) throw InputError("paste_norm: empty region");
  const int N = opt.N > 0 ? opt.N : scale_of(region);
  const double rho = cfg.kernel.rho();
  require_rate(rho_bar, rho / 2, rho, "[rho/2, rho]");
  require_decay_kernel(cfg);
  if (diameter(region) > 2 * N + 1) throw PreconditionFailure("diameter", "diam(Lambda) exceeds 2N+1");
  if (!(cover.domain == region)) throw PreconditionFailure("cover", "cover domain differs from Lambda");
  if (auto bad = cover.first_violation()) throw PreconditionFailure("cover", *bad);
  const int M0 = cover.min_size(), M1 = cover.max_size();
  if (M1 > N) throw PreconditionFailure("window_size", "M1 exceeds N");

  PasteResult res;
  res.ml = ml_condition(M0, M1, cfg.lambda, rho, cfg.dim());
  if (!res.ml.feasible)
    throw PreconditionFailure("paste_margin", "margin " + std::to_string(res.ml.ml_margin) + " > 1/2 at M = " +
                                                  std::to_string(res.ml.worst_M));
  res.log_m0_condition = M0 >= std::pow(std::log(static_cast<double>(N)), 2);
  res.windows_checked = check_windows(cfg, cover, E, x, rho_bar, std::numbers::ln2);
  res.bound_log = res.ml.bound_log;
  res.empirical_norm = operator_norm(compute_greens(cfg, region, E, x).G);
  res.certified = true;
  if (std::log(res.empirical_norm) > res.bound_log)
    throw InvariantViolation("pasted norm " + std::to_string(res.empirical_norm) + " exceeds certified bound e^" +
                             std::to_string(res.bound_log));
  return res;
}

DecayPropagation propagate_decay(const ModelConfig& cfg, const PointSet& region, const PointSet& excluded, double E,
                                 const Phase& x, const WindowCover& cover, int M0, double rho_bar,
                                 double degrade_constant, const PropagateOptions& opt) {
  if (region.empty()) throw InputError("propagate_decay: empty region");
  if (M0 < 1) throw InputError("propagate_decay: M0 must be >= 1");
  const int N = opt.N > 0 ? opt.N : scale_of(region);
  const int d = cfg.dim();
  const double rho = cfg.kernel.rho();
  require_rate(rho_bar, rho / 2, 0.8 * rho, "[rho/2, 4 rho/5]");
  require_decay_kernel(cfg);
  if (diameter(region) > 2 * N + 1) throw PreconditionFailure("diameter", "diam(Lambda) exceeds 2N+1");
  if (!excluded.empty()) {
    if (!excluded.subset_of(region)) throw PreconditionFailure("excluded", "excluded set leaves Lambda");
    const double cap = std::pow(static_cast<double>(N), 1.0 / (2.0 * d));
    if (diameter(excluded) > cap + 1e-12)
      throw PreconditionFailure("diam_excluded", "diam(Lambda1) = " + std::to_string(diameter(excluded)) +
                                                     " exceeds N^{1/(2d)} = " + std::to_string(cap));
  }
  if (!(cover.domain == region.minus(excluded)))
    throw PreconditionFailure("cover", "cover domain differs from Lambda \\ Lambda1");
  if (auto bad = cover.first_violation()) throw PreconditionFailure("cover", *bad);
  if (cover.min_size() < M0) throw PreconditionFailure("window_size", "a window is smaller than M0");
  check_windows(cfg, cover, E, x, rho_bar, 0.0);

  const GreensMatrix G = compute_greens(cfg, region, E, x);
  DecayPropagation out;
  out.norm = operator_norm(G.G);
  if (std::log(out.norm) > std::sqrt(static_cast<double>(N)))
    throw PreconditionFailure("norm", "||G_Lambda|| = " + std::to_string(out.norm) + " exceeds e^{sqrt N}");
  out.log_m0_condition = M0 >= std::pow(std::log(static_cast<double>(N)), 2);
  out.effective_rate = rho_bar - degrade_constant / std::sqrt(static_cast<double>(M0));
  out.observed_rate = std::numeric_limits<double>::infinity();

  const auto& pts = region.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const int r = sup_distance(pts[i], pts[j]);
      if (10 * r < N) continue;
      ++out.pairs_checked;
      const double a = std::abs(G.G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      if (a == 0.0) continue;
      const double la = std::log(a);
      out.observed_rate = std::min(out.observed_rate, -la / r);
      if (la > -out.effective_rate * r) {
        ++out.violation_count;
        if (out.violations.size() < opt.max_listed)
          out.violations.push_back({pts[i], pts[j], a, std::exp(-out.effective_rate * r)});
      }
    }
  }
  return out;
}

}  // namespace qpl
