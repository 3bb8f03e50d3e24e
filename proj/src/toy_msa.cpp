#include "qpl/toy_msa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qpl/cartan.hpp"
#include "qpl/errors.hpp"
#include "qpl/gluing.hpp"
#include "qpl/sampling.hpp"

namespace qpl {

std::string to_string(StageStatus s) {
  switch (s) {
    case StageStatus::Pass: return "pass";
    case StageStatus::Fail: return "fail";
    case StageStatus::Skipped: return "skipped";
    case StageStatus::Invariant: return "invariant";
  }
  return "unknown";
}

const std::vector<std::string>& toy_stage_names() {
  static const std::vector<std::string> names{"geometry", "windows", "cartan", "propagate",
                                              "paste",    "final",   "goodness"};
  return names;
}

std::vector<std::pair<Phase, double>> grid_cells(const std::vector<Phase>& xs, const std::vector<double>& Es) {
  std::vector<std::pair<Phase, double>> cells;
  cells.reserve(xs.size() * Es.size());
  for (const auto& x : xs)
    for (double E : Es) cells.emplace_back(x, E);
  return cells;
}

namespace {

std::string window_key(const ElementaryRegion& w) {
  std::string k = to_string(w.center) + "/" + std::to_string(w.size);
  if (w.carve) k += "/" + to_string(*w.carve);
  return k;
}

struct SiteData {
  const GeometryEntry* geo = nullptr;
  PointSet outer;
  WindowCover cover;  ///< cover of outer \ inner at size N1
  bool have_cover = false;
};

class CellRunner {
 public:
  CellRunner(const ModelConfig& cfg, const ToyOptions& opt, double rho_bar, const ElementaryRegion& Q,
             const std::vector<GeometryEntry>& geometry, bool geometry_ok)
      : cfg_(cfg), opt_(opt), rho_bar_(rho_bar), Q_(Q), geometry_(geometry), geometry_ok_(geometry_ok) {}

  void run(std::size_t cell, const Phase& x, double E, std::vector<StageRecord>& out, CellOutcome& outcome) {
    cell_ = cell;
    x_ = x;
    E_ = E;
    out_ = &out;
    outcome.x = x;
    outcome.E = E;
    outcome.paste_bound_log = std::numeric_limits<double>::quiet_NaN();
    outcome_ = &outcome;

    geometry_stage();
    const bool sites_ok = prepare_sites();
    windows_stage(sites_ok);
    cartan_stage(sites_ok);
    const double rate1 = propagate_stage(sites_ok);
    paste_stage(sites_ok, rate1);
    const double rate2 = final_stage(sites_ok, rate1);
    goodness_stage(rate2);

    outcome.all_pass = outcome.first_failure.empty();
  }

 private:
  StageRecord& record(const std::string& stage) {
    StageRecord r;
    r.cell = cell_;
    r.x = x_;
    r.E = E_;
    r.stage = stage;
    out_->push_back(std::move(r));
    return out_->back();
  }

  void finish(StageRecord& r, StageStatus s, std::string condition = {}, std::string detail = {}) {
    r.status = s;
    r.condition = std::move(condition);
    r.detail = std::move(detail);
    if (s != StageStatus::Pass && outcome_->first_failure.empty()) outcome_->first_failure = r.stage;
    if (s == StageStatus::Invariant) outcome_->invariant_violated = true;
  }

  void geometry_stage() {
    auto& r = record("geometry");
    std::size_t relaxed = 0, infeasible = 0, verifier = 0;
    std::string first, first_cond;
    for (const auto& g : geometry_) {
      relaxed += g.relaxed ? 1 : 0;
      infeasible += g.pair ? 0 : 1;
      verifier += g.verifier.empty() ? 0 : 1;
      if (first.empty() && (!g.violated.empty() || !g.verifier.empty())) {
        const std::string& msg = g.violated.empty() ? g.verifier.front() : g.violated;
        first_cond = msg.substr(0, msg.find(':'));
        first = "n = " + to_string(g.n) + ": " + msg;
      }
    }
    r.metrics = {{"sites", static_cast<double>(geometry_.size())},
                 {"relaxed", static_cast<double>(relaxed)},
                 {"infeasible", static_cast<double>(infeasible)},
                 {"verifier_failures", static_cast<double>(verifier)}};
    if (geometry_ok_) finish(r, StageStatus::Pass);
    else finish(r, StageStatus::Fail, first_cond, first);
  }

  bool prepare_sites() {
    sites_.clear();
    bool ok = true;
    for (const auto& g : geometry_) {
      SiteData s;
      s.geo = &g;
      if (g.pair) {
        s.outer = g.pair->outer.points();
        try {
          s.cover = build_cover(s.outer.minus(g.pair->inner), opt_.scales.N1);
          s.have_cover = true;
        } catch (const PreconditionFailure&) {
          ok = false;
        }
      } else {
        ok = false;
      }
      sites_.push_back(std::move(s));
    }
    return ok;
  }

  void windows_stage(bool sites_ok) {
    auto& r = record("windows");
    if (!sites_ok) return finish(r, StageStatus::Skipped, "geometry", "no region pair for some site");
    std::map<std::string, bool> seen;
    std::size_t bad = 0;
    std::string first;
    double worst_log_norm = -std::numeric_limits<double>::infinity();
    for (const auto& s : sites_) {
      for (const auto& w : s.cover.windows) {
        const std::string key = window_key(w);
        if (seen.count(key)) continue;
        bool good = false;
        try {
          const GreensMatrix G = compute_greens(cfg_, w.points(), E_, x_);
          const GoodnessReport rep = goodness(G, w.size, rho_bar_);
          worst_log_norm = std::max(worst_log_norm, rep.log_norm);
          good = rep.pass;
        } catch (const SingularMatrixError&) {
          good = false;
        }
        seen[key] = good;
        if (!good) {
          ++bad;
          if (first.empty()) first = "window " + key;
        }
      }
    }
    r.metrics = {{"windows", static_cast<double>(seen.size())},
                 {"bad_windows", static_cast<double>(bad)},
                 {"worst_log_norm", worst_log_norm}};
    if (bad == 0) finish(r, StageStatus::Pass);
    else finish(r, StageStatus::Fail, "window_goodness", first + " is not good at scale N1");
  }

  void cartan_stage(bool sites_ok) {
    auto& r = record("cartan");
    if (!sites_ok) return finish(r, StageStatus::Skipped, "geometry", "no region pair for some site");
    const int j = opt_.phase_block;
    const int bj = cfg_.blocks.sizes.at(static_cast<std::size_t>(j));
    const double rho = cfg_.kernel.rho();
    const double sigma = std::max(std::exp(-rho * opt_.scales.N1), 0.5 * std::pow(1e4, -1.0 / bj));
    std::size_t norm_fail = 0, measure_fail = 0;
    double worst_fraction = 0.0, worst_ratio = 0.0;
    std::string first_cond, first;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const auto& s = sites_[i];
      const auto& pair = *s.geo->pair;
      const int Nt = pair.outer.size;
      const double log_eps = -std::sqrt(static_cast<double>(Nt));
      try {
        const double norm = operator_norm(compute_greens(cfg_, s.outer, E_, x_).G);
        if (std::log(norm) > -log_eps) {
          ++norm_fail;
          if (first.empty()) {
            first_cond = "region_norm";
            first = "||G|| = " + std::to_string(norm) + " above e^{sqrt N} at n = " + to_string(s.geo->n);
          }
        }
        const AnalyticMatrixFamily fam = restricted_operator_family(cfg_, s.outer, x_, E_, j, 2.0 * sigma);
        std::vector<Eigen::Index> V;
        for (const auto& p : pair.inner) V.push_back(s.outer.index_of(p));
        const PivotData piv = pivot_at_anchor(fam, V);
        CartanOptions co;
        co.samples = opt_.cartan_samples;
        co.seed = block_seed(opt_.seed, cell_ * 1000003ULL + i);
        const CartanResult cr = cartan_bad_measure(fam, piv, std::exp(log_eps), co);
        const double fraction = cr.empirical.value / std::pow(2.0 * sigma, bj);
        const double target = std::exp(-std::pow(static_cast<double>(Nt), 1.0 / (3.0 * bj)));
        worst_fraction = std::max(worst_fraction, fraction);
        worst_ratio = std::max(worst_ratio, fraction / target);
        if (fraction > target) {
          ++measure_fail;
          if (first.empty()) {
            first_cond = "bad_measure";
            first = "sampled fraction " + std::to_string(fraction) + " above e^{-N^{1/(3b)}} at n = " +
                    to_string(s.geo->n);
          }
        }
      } catch (const SingularMatrixError& e) {
        ++norm_fail;
        if (first.empty()) {
          first_cond = "singular";
          first = e.what();
        }
      }
    }
    r.metrics = {{"sigma", sigma},
                 {"norm_failures", static_cast<double>(norm_fail)},
                 {"measure_failures", static_cast<double>(measure_fail)},
                 {"worst_fraction", worst_fraction},
                 {"worst_fraction_over_target", worst_ratio}};
    if (norm_fail + measure_fail == 0) finish(r, StageStatus::Pass);
    else finish(r, StageStatus::Fail, first_cond, first);
  }

  /// Propagated rate; on a failed hypothesis the nominal rate rho_bar - C / sqrt(N1), so
  /// the later stages still check their own hypotheses on the computed Green's functions.
  double propagate_stage(bool sites_ok) {
    auto& r = record("propagate");
    const double nominal = rho_bar_ - opt_.degrade_constant / std::sqrt(static_cast<double>(opt_.scales.N1));
    if (!sites_ok) {
      finish(r, StageStatus::Skipped, "geometry", "no region pair for some site");
      return std::numeric_limits<double>::quiet_NaN();
    }
    double rate = std::numeric_limits<double>::infinity();
    double observed = std::numeric_limits<double>::infinity();
    std::size_t violations = 0, pairs = 0, failed = 0;
    std::string first_cond, first;
    for (const auto& s : sites_) {
      const auto& pair = *s.geo->pair;
      PropagateOptions po;
      po.N = pair.outer.size;
      try {
        const DecayPropagation dp = propagate_decay(cfg_, s.outer, pair.inner, E_, x_, s.cover, opt_.scales.N1,
                                                    rho_bar_, opt_.degrade_constant, po);
        rate = std::min(rate, dp.effective_rate);
        observed = std::min(observed, dp.observed_rate);
        violations += dp.violation_count;
        pairs += dp.pairs_checked;
      } catch (const PreconditionFailure& e) {
        if (failed++ == 0) {
          first_cond = e.condition();
          first = "n = " + to_string(s.geo->n) + ": " + e.what();
        }
      } catch (const SingularMatrixError& e) {
        if (failed++ == 0) {
          first_cond = "singular";
          first = e.what();
        }
      }
    }
    r.metrics = {{"nominal_rate", nominal},
                 {"observed_rate", observed},
                 {"pairs_checked", static_cast<double>(pairs)},
                 {"violations", static_cast<double>(violations)},
                 {"sites_failed", static_cast<double>(failed)}};
    if (violations > 0) {
      finish(r, StageStatus::Invariant, "decay", std::to_string(violations) + " pairs exceed the propagated decay");
      return nominal;
    }
    if (failed > 0) {
      finish(r, StageStatus::Fail, first_cond, first);
      return nominal;
    }
    finish(r, StageStatus::Pass);
    return std::min(rate, nominal);
  }

  WindowCover site_cover() const {
    WindowCover c{Q_.points(), {}};
    for (const auto& s : sites_) c.windows.push_back(s.geo->pair->outer);
    return c;
  }

  void paste_stage(bool sites_ok, double rate1) {
    auto& r = record("paste");
    if (!sites_ok || std::isnan(rate1)) return finish(r, StageStatus::Skipped, "propagate", "no propagated rate");
    PasteOptions po;
    po.N = opt_.scales.N;
    try {
      const PasteResult pr = paste_norm(cfg_, Q_.points(), E_, x_, site_cover(), rate1, po);
      outcome_->glued_norm = pr.empirical_norm;
      outcome_->paste_bound_log = pr.bound_log;
      r.metrics = {{"ml_margin", pr.ml.ml_margin},
                   {"bound_log", pr.bound_log},
                   {"empirical_norm", pr.empirical_norm},
                   {"log_m0_condition", pr.log_m0_condition ? 1.0 : 0.0}};
      finish(r, StageStatus::Pass);
    } catch (const PreconditionFailure& e) {
      finish(r, StageStatus::Fail, e.condition(), e.what());
    } catch (const InvariantViolation& e) {
      finish(r, StageStatus::Invariant, "paste_bound", e.what());
    } catch (const SingularMatrixError& e) {
      finish(r, StageStatus::Fail, "singular", e.what());
    }
  }

  double final_stage(bool sites_ok, double rate1) {
    auto& r = record("final");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!sites_ok || std::isnan(rate1)) {
      finish(r, StageStatus::Skipped, "propagate", "no propagated rate");
      return nan;
    }
    const WindowCover cover = site_cover();
    PropagateOptions po;
    po.N = opt_.scales.N;
    try {
      const DecayPropagation dp = propagate_decay(cfg_, Q_.points(), PointSet{}, E_, x_, cover, cover.min_size(), rate1,
                                                  opt_.degrade_constant, po);
      r.metrics = {{"effective_rate", dp.effective_rate},
                   {"observed_rate", dp.observed_rate},
                   {"norm", dp.norm},
                   {"violations", static_cast<double>(dp.violation_count)}};
      if (dp.violation_count > 0) {
        finish(r, StageStatus::Invariant, "decay",
               std::to_string(dp.violation_count) + " pairs exceed the propagated decay");
        return nan;
      }
      finish(r, StageStatus::Pass);
      return dp.effective_rate;
    } catch (const PreconditionFailure& e) {
      finish(r, StageStatus::Fail, e.condition(), e.what());
    } catch (const SingularMatrixError& e) {
      finish(r, StageStatus::Fail, "singular", e.what());
    }
    return nan;
  }

  void goodness_stage(double rate2) {
    auto& r = record("goodness");
    const double rate = std::isnan(rate2) ? rho_bar_ : rate2;
    outcome_->final_rate = rate;
    try {
      const GreensMatrix G = compute_greens(cfg_, Q_.points(), E_, x_);
      const GoodnessReport rep = goodness(G, opt_.scales.N, rate);
      if (outcome_->glued_norm == 0.0) outcome_->glued_norm = rep.norm;
      outcome_->good = rep.pass;
      r.metrics = {{"rate", rate},
                   {"norm", rep.norm},
                   {"log_norm_bound", rep.log_norm_bound},
                   {"fitted_rate", rep.fitted_rate},
                   {"violations", static_cast<double>(rep.violation_count)}};
      if (rep.pass) finish(r, StageStatus::Pass);
      else finish(r, StageStatus::Fail, rep.norm_ok ? "decay" : "norm", "G_{Q_N} is not good at the final rate");
    } catch (const SingularMatrixError& e) {
      outcome_->good = false;
      finish(r, StageStatus::Fail, "singular", e.what());
    }
  }

  const ModelConfig& cfg_;
  const ToyOptions& opt_;
  double rho_bar_;
  const ElementaryRegion& Q_;
  const std::vector<GeometryEntry>& geometry_;
  bool geometry_ok_;

  std::size_t cell_ = 0;
  Phase x_;
  double E_ = 0.0;
  std::vector<StageRecord>* out_ = nullptr;
  CellOutcome* outcome_ = nullptr;
  std::vector<SiteData> sites_;
};

}  // namespace

int default_outer_size(int N, int N1) { return std::max(N, 8 * N1); }

ToyTrace toy_msa_run(const ModelConfig& cfg, const ToyOptions& opt, const std::vector<Phase>& xs,
                     const std::vector<double>& Es) {
  cfg.validate();
  const int d = cfg.dim();
  const auto& sc = opt.scales;
  if (d > 2) throw InputError("toy_msa_run: d must be <= 2");
  if (sc.N1 < 1 || sc.N < sc.N1) throw InputError("toy_msa_run: need 1 <= N1 <= N");
  if (sc.N > 64) throw InputError("toy_msa_run: N must be <= 64 for dense inversion");
  const int N_bar = sc.N_bar > 0 ? sc.N_bar : default_outer_size(sc.N, sc.N1);
  if (opt.phase_block < 0 || opt.phase_block >= static_cast<int>(cfg.blocks.sizes.size()))
    throw InputError("toy_msa_run: phase block out of range");

  ToyTrace t;
  t.options = opt;
  t.rho_bar = opt.rho_bar > 0.0 ? opt.rho_bar : 0.8 * cfg.kernel.rho();
  t.target = std::exp(-std::pow(static_cast<double>(sc.N), opt.c1));

  const ElementaryRegion Q{LatticePoint(d), sc.N, std::nullopt};
  GeometryParams gp;
  gp.inner_exponent = sc.inner_exponent;
  const PointSet Qpts = Q.points();
  t.geometry.resize(Qpts.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < Qpts.size(); ++i) {
    GeometryEntry g;
    g.n = Qpts[i];
    AdjustResult a = adjust_region(g.n, Q, N_bar, sc.N1, gp);
    g.violated = a.violated;
    if (a.pair) {
      g.pair = std::move(a.pair);
    } else if (a.relaxed && opt.relax_geometry) {
      g.pair = std::move(a.relaxed);
      g.relaxed = true;
    }
    if (g.pair && opt.verify_geometry) g.verifier = verify_region_pair(g.n, Q, N_bar, sc.N1, *g.pair, gp);
    t.geometry[i] = std::move(g);
  }
  t.geometry_ok = std::all_of(t.geometry.begin(), t.geometry.end(), [](const GeometryEntry& g) {
    return g.violated.empty() && g.verifier.empty() && g.pair && !g.relaxed;
  });

  const auto cells = grid_cells(xs, Es);
  std::vector<std::vector<StageRecord>> per_cell(cells.size());
  t.cells.resize(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellRunner runner(cfg, opt, t.rho_bar, Q, t.geometry, t.geometry_ok);
    runner.run(c, cells[c].first, cells[c].second, per_cell[c], t.cells[c]);
  }
  std::size_t bad = 0;
  t.all_pass = !cells.empty();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto& r : per_cell[c]) t.records.push_back(std::move(r));
    bad += t.cells[c].good ? 0 : 1;
    t.all_pass = t.all_pass && t.cells[c].all_pass;
    t.invariant_violated = t.invariant_violated || t.cells[c].invariant_violated;
  }
  t.bad_fraction = cells.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(cells.size());
  return t;
}

}  // namespace qpl
