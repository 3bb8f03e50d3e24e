#include "qpl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>

#include "qpl/cartan.hpp"
#include "qpl/errors.hpp"
#include "qpl/gluing.hpp"
#include "qpl/greens.hpp"
#include "qpl/initial_scale.hpp"
#include "qpl/localization.hpp"
#include "qpl/multiscale.hpp"
#include "qpl/sampling.hpp"
#include "qpl/toy_msa.hpp"

namespace qpl {

const std::vector<std::string>& experiment_tags() {
  static const std::vector<std::string> tags{"goodness-scan", "ldt-scan",  "neumann-check",        "cartan-sweep",
                                             "msa-toy",       "schedule-table", "hit-count", "localization-profile",
                                             "calibrate-decay"};
  return tags;
}

std::vector<Phase> phase_grid(int num_vars, int count) {
  if (num_vars < 1 || count < 1) throw InputError("phase_grid: need positive sizes");
  std::vector<Phase> xs;
  for (int i = 0; i < count; ++i) {
    Phase x(num_vars);
    for (int c = 0; c < num_vars; ++c) x[c] = static_cast<double>(i) / count + c * 0.25 * kGoldenMean;
    xs.push_back(reduce_mod1(x));
  }
  return xs;
}

std::vector<double> energy_grid(const ModelConfig& cfg, int count) {
  if (count < 1) throw InputError("energy_grid: need a positive count");
  const double C = 1.1 * spectral_bound(cfg);
  if (count == 1) return {0.0};
  std::vector<double> Es(count);
  for (int i = 0; i < count; ++i) Es[i] = -C + 2.0 * C * i / (count - 1);
  return Es;
}

Phase random_phase(int num_vars, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Phase x(num_vars);
  for (int i = 0; i < num_vars; ++i) x[i] = u(rng);
  return x;
}

std::vector<SampledInstance> sample_instances(const ModelConfig& cfg, int count, std::uint64_t seed, int max_tries,
                                              const std::function<bool(const Phase&, double)>& admissible,
                                              EnergyBand band) {
  const double lo = band.lo, hi = band.hi > 0.0 ? band.hi : spectral_bound(cfg);
  if (hi < lo || lo < 0.0) throw InputError("sample_instances: bad energy band");
  const int b = cfg.blocks.total();
  std::vector<std::optional<SampledInstance>> found(static_cast<std::size_t>(std::max(count, 0)));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(block_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SampledInstance s;
    s.x = Phase(b);
    for (int c = 0; c < b; ++c) s.x[c] = u(rng);
    for (s.tries = 1; s.tries <= max_tries; ++s.tries) {
      const double mag = lo + (hi - lo) * u(rng);
      s.E = u(rng) < 0.5 ? -mag : mag;
      if (admissible(s.x, s.E)) {
        found[static_cast<std::size_t>(i)] = s;
        break;
      }
    }
  }
  std::vector<SampledInstance> out;
  for (auto& f : found)
    if (f) out.push_back(std::move(*f));
  return out;
}

// ---------------------------------------------------------------------------------
// Calibration

Json DecayCalibration::to_json() const {
  std::vector<double> rates, lambdas;
  for (const auto& p : points) {
    rates.push_back(p.observed_rate);
    lambdas.push_back(p.lambda);
  }
  return {{"kernel_family", "exp_decay"},
          {"rho", options.rho},
          {"rho_bar", options.rho_bar > 0.0 ? options.rho_bar : 0.8 * options.rho},
          {"energy_band", {options.band.lo, options.band.hi}},
          {"lambdas", options.lambdas},
          {"N", options.N},
          {"M", options.M},
          {"samples_per_lambda", options.samples_per_lambda},
          {"seed", options.seed},
          {"safety", options.safety},
          {"admissible_points", points.size()},
          {"min_observed_rate", rates.empty() ? Json(nullptr) : Json(*std::min_element(rates.begin(), rates.end()))},
          {"worst_gap", worst_gap}};
}

DecayCalibration calibrate_degrade_constant(const CalibrationOptions& opt) {
  if (opt.N < opt.M || opt.M < 1) throw InputError("calibration: need 1 <= M <= N");
  DecayCalibration cal;
  cal.options = opt;
  const double rho_bar = opt.rho_bar > 0.0 ? opt.rho_bar : 0.8 * opt.rho;
  const PointSet Q = PointSet::from_box(Box::cube(LatticePoint(1), opt.N));
  const WindowCover cover = build_cover(Q, opt.M);
  for (std::size_t li = 0; li < opt.lambdas.size(); ++li) {
    ModelConfig cfg;
    cfg.kernel = ToeplitzKernel::exp_decay(1, opt.rho);
    cfg.potential = TrigPotential::cosine_sum(1);
    cfg.blocks = BlockStructure::ones(1);
    cfg.lambda = opt.lambdas[li];
    cfg.omega = Frequency::Constant(1, kGoldenMean);
    cfg.validate();
    std::map<std::pair<double, double>, double> rates;
    const auto inst = sample_instances(cfg, opt.samples_per_lambda, block_seed(opt.seed, li), 50,
                                       [&](const Phase& x, double E) {
                                         try {
                                           const auto dp = propagate_decay(cfg, Q, PointSet{}, E, x, cover, opt.M,
                                                                           rho_bar, 0.0, {opt.N, 0});
#pragma omp critical(calibration_rates)
                                           rates[{x[0], E}] = dp.observed_rate;
                                           return true;
                                         } catch (const PreconditionFailure&) {
                                           return false;
                                         } catch (const SingularMatrixError&) {
                                           return false;
                                         }
                                       },
                                       opt.band);
    for (const auto& s : inst) cal.points.push_back({cfg.lambda, s.x, s.E, rates.at({s.x[0], s.E})});
  }
  for (const auto& p : cal.points)
    cal.worst_gap = std::max(cal.worst_gap, std::sqrt(static_cast<double>(opt.M)) * (rho_bar - p.observed_rate));
  cal.degrade_constant = opt.safety * cal.worst_gap;
  return cal;
}

namespace {

template <typename T>
T param(const Json& p, const char* key, T fallback) {
  if (!p.contains(key) || p.at(key).is_null()) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("parameter '") + key + "': " + e.what());
  }
}

/// Number or array of numbers.
std::vector<double> param_list(const Json& p, const char* key, std::vector<double> fallback) {
  if (!p.contains(key) || p.at(key).is_null()) return fallback;
  const Json& v = p.at(key);
  if (v.is_number()) return {v.get<double>()};
  try {
    return v.get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("parameter '") + key + "': " + e.what());
  }
}

Phase param_phase(const Json& p, const char* key, int b, Phase fallback) {
  const auto v = param_list(p, key, {});
  if (v.empty()) return fallback;
  if (static_cast<int>(v.size()) != b) throw InputError(std::string("parameter '") + key + "' needs " +
                                                        std::to_string(b) + " coordinates");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), b);
}

class Artifacts {
 public:
  explicit Artifacts(const ExperimentSpec& spec, ExperimentOutcome& out) : dir_(spec.out_dir), out_(out) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    const std::string path = (std::filesystem::path(dir_) / name).string();
    std::ofstream f(path);
    if (!f) throw InputError("cannot write '" + path + "'");
    f.precision(17);
    out_.artifacts.push_back(path);
    return f;
  }

  void json(const std::string& name, const Json& j) { open(name) << j.dump(2) << '\n'; }

 private:
  std::string dir_;
  ExperimentOutcome& out_;
};

std::vector<double> energies_from(const Json& p, const ModelConfig& cfg, int default_count) {
  auto Es = param_list(p, "E", {});
  if (Es.empty()) Es = energy_grid(cfg, param(p, "E_count", default_count));
  return Es;
}

// ---------------------------------------------------------------------------------

ExperimentOutcome goodness_scan(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  const auto& cfg = s.model;
  const int N = param(s.params, "N", 20);
  const double rho_bar = param(s.params, "rho_bar", 0.8 * cfg.kernel.rho());
  const auto xs = phase_grid(cfg.blocks.total(), param(s.params, "x_count", 32));
  const auto Es = energies_from(s.params, cfg, 32);
  const ElementaryRegion Q{LatticePoint(cfg.dim()), N, std::nullopt};
  const PointSet pts = Q.points();
  const std::string region_id = pts.hash();
  const auto cells = grid_cells(xs, Es);

  struct Row {
    GoodnessReport rep;
    bool singular = false;
    std::vector<double> profile;  ///< max log|G| at each distance r
  };
  std::vector<Row> rows(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < cells.size(); ++c) {
    Row& r = rows[c];
    try {
      const GreensMatrix G = compute_greens(cfg, pts, cells[c].second, cells[c].first);
      r.rep = goodness(G, N, rho_bar);
      r.profile.assign(static_cast<std::size_t>(2 * N + 1), -std::numeric_limits<double>::infinity());
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i; j < pts.size(); ++j) {
          const auto d = static_cast<std::size_t>(sup_distance(pts[i], pts[j]));
          const double a = std::abs(G.G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
          if (a > 0.0) r.profile[d] = std::max(r.profile[d], std::log(a));
        }
    } catch (const SingularMatrixError&) {
      r.singular = true;
    }
  }

  auto f = art.open("goodness.csv");
  CsvWriter w(f, {"x", "E", "N", "region_id", "norm", "fitted_rate", "verdict"});
  auto fd = art.open("decay.csv");
  CsvWriter wd(fd, {"x", "E", "N", "r", "log_abs_g"});
  std::size_t good = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& r = rows[c];
    const std::string x = phase_to_cell(cells[c].first);
    const std::string verdict = r.singular ? "singular" : (r.rep.pass ? "good" : "bad");
    good += verdict == "good" ? 1 : 0;
    w.row(x, cells[c].second, N, region_id, r.singular ? std::nan("") : r.rep.norm,
          r.singular ? std::nan("") : r.rep.fitted_rate, verdict);
    for (std::size_t d = 0; d < r.profile.size(); ++d) wd.row(x, cells[c].second, N, static_cast<int>(d), r.profile[d]);
  }
  out.summary = {{"rows", w.rows()}, {"good", good}, {"rho_bar", rho_bar}, {"N", N}, {"region", region_to_json(Q)}};
  art.json("goodness_summary.json", out.summary);
  return out;
}

ExperimentOutcome ldt_scan(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  const auto& cfg = s.model;
  const int j = param(s.params, "j", 0);
  auto deltas = param_list(s.params, "deltas", {});
  if (deltas.empty())
    deltas = log_grid(param(s.params, "delta_lo", 1e-4), param(s.params, "delta_hi", 1e-1),
                      param(s.params, "delta_count", 13));
  const int sections = param(s.params, "sections", 16);
  const auto method = parse_sampling_method(param<std::string>(s.params, "method", "quadrature"));
  const auto samples = param<std::uint64_t>(s.params, "samples", 100000);
  const auto Es = param_list(s.params, "E", {0.0});
  Json fits = Json::array();
  for (std::size_t i = 0; i < Es.size(); ++i) {
    const LojasiewiczFit fit =
        lojasiewicz_fit(cfg.potential, Es[i], cfg.blocks, j, deltas, sections, method, samples, s.seed);
    auto f = art.open("ldt_" + std::to_string(i) + ".csv");
    CsvWriter w(f, {"delta", "j", "section_id", "measure", "half_width"});
    for (std::size_t k = 0; k < fit.deltas.size(); ++k)
      w.row(fit.deltas[k], j, fit.section_ids[k], fit.measures[k], fit.half_widths[k]);
    Json fj = to_json(fit);
    fj["E"] = Es[i];
    fj["j"] = j;
    fj["csv"] = "ldt_" + std::to_string(i) + ".csv";
    art.json("ldt_" + std::to_string(i) + ".json", fj);
    fits.push_back({{"E", Es[i]}, {"C", fit.constant_C}, {"a", fit.exponent_a}, {"residual", fit.residual}});
  }
  out.summary = {{"fits", fits}};
  return out;
}

ExperimentOutcome neumann_check(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  const auto& cfg = s.model;
  const int N = param(s.params, "N", 5);
  const double delta = param(s.params, "delta", 0.1);
  const int samples = param(s.params, "samples", 500);
  const int max_terms = param(s.params, "max_terms", 12);
  const int series_instances = param(s.params, "series_instances", 10);
  const ElementaryRegion Q{LatticePoint(cfg.dim()), N, std::nullopt};
  const double C = spectral_bound(cfg);

  struct Row {
    Phase x;
    double E = 0.0;
    bool excluded = false;
    NeumannReport rep;
    std::string violation;
  };
  std::vector<Row> rows(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < samples; ++i) {
    Row& r = rows[static_cast<std::size_t>(i)];
    std::mt19937_64 rng(block_seed(s.seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    r.x = Phase(cfg.blocks.total());
    for (Eigen::Index c = 0; c < r.x.size(); ++c) r.x[c] = u(rng);
    r.E = -C + 2.0 * C * u(rng);
    r.excluded = in_bad_set({cfg.potential, r.E, delta}, cfg.blocks, r.x, N, cfg.omega);
    if (r.excluded) continue;
    try {
      r.rep = neumann_bound_check(cfg, Q, r.E, r.x, delta);
    } catch (const InvariantViolation& e) {
      r.violation = e.what();
    }
  }

  auto f = art.open("neumann.csv");
  CsvWriter w(f, {"x", "E", "excluded", "norm", "bound", "worst_decay_ratio", "verdict"});
  std::size_t checked = 0, violations = 0;
  std::vector<std::size_t> admissible;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string verdict = r.excluded ? "excluded" : (r.violation.empty() ? "pass" : "violation");
    if (!r.excluded) {
      ++checked;
      admissible.push_back(i);
    }
    violations += r.violation.empty() ? 0 : 1;
    w.row(phase_to_cell(r.x), r.E, r.excluded ? 1 : 0, r.rep.norm, 2.0 / delta, r.rep.worst_decay_ratio, verdict);
  }

  auto fs = art.open("neumann_series.csv");
  CsvWriter ws(fs, {"instance", "k", "residual", "tail_bound"});
  double worst_ratio = 0.0;
  int series_done = 0;
  for (std::size_t idx : admissible) {
    if (series_done >= series_instances) break;
    const auto& r = rows[idx];
    try {
      const NeumannSeries ns = neumann_series_compare(cfg, Q, r.E, r.x, delta, max_terms);
      for (std::size_t k = 0; k < ns.residuals.size(); ++k) {
        ws.row(static_cast<int>(idx), static_cast<int>(k), ns.residuals[k], ns.tail_bound(static_cast<int>(k), delta));
        if (k > 0 && ns.residuals[k - 1] > 1e-13)
          worst_ratio = std::max(worst_ratio, ns.residuals[k] / ns.residuals[k - 1]);
      }
      ++series_done;
    } catch (const PreconditionFailure&) {
    }
  }
  out.summary = {{"samples", samples},       {"checked", checked},        {"violations", violations},
                 {"series_instances", series_done}, {"worst_series_ratio", worst_ratio}, {"N", N},
                 {"delta", delta}};
  art.json("neumann_summary.json", out.summary);
  if (violations > 0) out.exit_code = 3;
  return out;
}

ExperimentOutcome cartan_sweep(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  const auto& cfg = s.model;
  const std::string family = param<std::string>(s.params, "family", "scalar");
  const auto eps = param_list(s.params, "epsilons", {1e-2, 1e-3, 1e-4});
  CartanOptions co;
  co.samples = param<std::uint64_t>(s.params, "samples", 100000);
  co.seed = s.seed;
  co.method = parse_sampling_method(param<std::string>(s.params, "method", "monte_carlo"));

  AnalyticMatrixFamily fam;
  std::vector<Eigen::Index> V;
  if (family == "scalar") {
    fam = scalar_family(param(s.params, "delta", 1.0));
    V = {0};
  } else if (family == "polynomial") {
    fam = polynomial_family(param(s.params, "size", 6), param(s.params, "J", 1), param(s.params, "delta", 1.0),
                            param(s.params, "scale", 1.0), s.seed);
    V = {0};
  } else if (family == "restricted") {
    const int size = param(s.params, "size", 30);
    std::vector<LatticePoint> pts;
    for (int i = 0; i < size; ++i) {
      LatticePoint p(cfg.dim());
      p[0] = i;
      pts.push_back(p);
    }
    const PointSet region(pts);
    const Phase x = param_phase(s.params, "x", cfg.blocks.total(), random_phase(cfg.blocks.total(), s.seed));
    fam = restricted_operator_family(cfg, region, x, param(s.params, "E", 0.0), param(s.params, "j", 0),
                                     param(s.params, "delta", 0.05));
    const auto pivot = param_list(s.params, "pivot", {});
    if (pivot.empty()) {
      // Pivot on the site where the anchor diagonal is closest to zero.
      const Eigen::MatrixXd T = fam.eval(Eigen::VectorXd::Zero(fam.J));
      Eigen::Index k = 0;
      T.diagonal().cwiseAbs().minCoeff(&k);
      V = {k};
    } else {
      for (double v : pivot) V.push_back(static_cast<Eigen::Index>(v));
    }
  } else {
    throw InputError("cartan-sweep: unknown family '" + family + "'");
  }
  const PivotData piv = pivot_at_anchor(fam, V);
  std::vector<CartanResult> ladder;
  for (double e : eps) ladder.push_back(cartan_bad_measure(fam, piv, e, co));
  const CartanCalibration cal = calibrate_cartan(ladder, fam.J, fam.delta);

  auto f = art.open("cartan.csv");
  CsvWriter w(f, {"epsilon", "empirical", "half_width", "bound_log"});
  std::vector<double> logs, emp;
  for (const auto& r : ladder) {
    const double bound_log = std::log(cal.C) + fam.J * std::log(fam.delta) - cal.c * std::pow(std::max(r.s, 0.0), 1.0 / fam.J);
    w.row(r.epsilon, r.empirical.value, r.empirical.half_width, bound_log);
    logs.push_back(std::log(1.0 / r.epsilon));
    emp.push_back(r.empirical.value);
  }
  out.summary = {{"family", fam.name},
                 {"J", fam.J},
                 {"delta", fam.delta},
                 {"B1", fam.B1},
                 {"B2", piv.B2},
                 {"C", cal.C},
                 {"c", cal.c},
                 {"spearman", ladder.size() >= 2 ? Json(spearman(logs, emp)) : Json(nullptr)}};
  art.json("cartan.json", out.summary);
  return out;
}

ExperimentOutcome msa_toy(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  const auto& cfg = s.model;
  ToyOptions opt;
  opt.scales.N1 = param(s.params, "N1", 4);
  opt.scales.N_bar = param(s.params, "N_bar", 0);
  opt.rho_bar = param(s.params, "rho_bar", 0.0);
  opt.c1 = param(s.params, "c1", 0.01);
  opt.cartan_samples = param<std::uint64_t>(s.params, "cartan_samples", 128);
  opt.seed = s.seed;
  std::string degrade_note = "parameter";
  if (s.params.contains("degrade_constant")) {
    opt.degrade_constant = param(s.params, "degrade_constant", 0.0);
  } else {
    try {
      opt.degrade_constant = degrade_constant_for(load_degrade_table(default_degrade_path()), cfg.kernel.family());
      degrade_note = "calibration table";
    } catch (const InputError& e) {
      degrade_note = std::string("0 (") + e.what() + ")";
    }
  }
  auto Ns = param_list(s.params, "N", {24.0});
  const auto xs = phase_grid(cfg.blocks.total(), param(s.params, "x_count", 4));
  const auto Es = energies_from(s.params, cfg, 4);

  auto f = art.open("trace.jsonl");
  Json per_N = Json::array();
  Json smallest = nullptr;
  for (double Nd : Ns) {
    opt.scales.N = static_cast<int>(Nd);
    const ToyTrace t = toy_msa_run(cfg, opt, xs, Es);
    for (const auto& r : t.records) {
      Json j = to_json(r);
      j["N"] = opt.scales.N;
      f << j.dump() << '\n';
    }
    Json cells = Json::array();
    for (const auto& c : t.cells)
      cells.push_back({{"x", phase_to_cell(c.x)},
                       {"E", c.E},
                       {"all_pass", c.all_pass},
                       {"first_failure", c.first_failure},
                       {"good", c.good},
                       {"final_rate", c.final_rate},
                       {"glued_norm", c.glued_norm},
                       {"paste_bound_log", std::isfinite(c.paste_bound_log) ? Json(c.paste_bound_log) : Json(nullptr)}});
    per_N.push_back({{"N", opt.scales.N},
                     {"geometry_ok", t.geometry_ok},
                     {"all_pass", t.all_pass},
                     {"bad_fraction", t.bad_fraction},
                     {"target", t.target},
                     {"rho_bar", t.rho_bar},
                     {"cells", cells}});
    if (t.all_pass && smallest.is_null()) smallest = opt.scales.N;
    if (t.invariant_violated) out.exit_code = 3;
  }
  out.summary = {{"N1", opt.scales.N1},
                 {"degrade_constant", opt.degrade_constant},
                 {"degrade_source", degrade_note},
                 {"c1", opt.c1},
                 {"smallest_passing_N", smallest},
                 {"runs", per_N}};
  art.json("msa_summary.json", out.summary);
  return out;
}

ExperimentOutcome schedule_table(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  const ScaleConstants k(param(s.params, "c3", 0.04), param(s.params, "c4", 0.2), param(s.params, "b_tilde", 1));
  const double rho = param(s.params, "rho", 1.0);
  const double degrade = param(s.params, "degrade_constant", 1.0);
  const int steps = param(s.params, "steps", 6);
  const LogScale N_start(param(s.params, "N_start", 100.0));
  const auto rows = property_ledger(rho, N_start, degrade, k, steps);
  auto f = art.open("schedule.csv");
  CsvWriter w(f, {"step", "N", "rho", "measure_exponent", "omega_excluded"});
  for (const auto& r : rows) w.row(r.step, r.N.to_string(), r.rho, r.measure_exponent.to_string(), r.omega_excluded);
  const RhoSequence rs = rho_sequence(rho, N_start, degrade, k, steps);
  const InitialLambda il =
      initial_lambda(LogScale(param(s.params, "N_bar", 100.0)), param(s.params, "d", std::max(1, s.model.dim())));
  out.summary = {{"c1", k.c1()},
                 {"c2", k.c2()},
                 {"c3", k.c3()},
                 {"c4", k.c4()},
                 {"b_tilde", k.b_tilde()},
                 {"g_dominates_threshold", g_dominates_threshold(k.c1())},
                 {"growth_threshold_log", growth_threshold_log(k.c1())},
                 {"omega_threshold", omega_threshold(k).to_string()},
                 {"rho_infimum", rs.infimum},
                 {"rho_tail_bound", rs.tail_bound},
                 {"rho_above_half", rs.above_half},
                 {"log_lambda_min", il.log_lambda_min},
                 {"initial_delta", il.delta}};
  art.json("schedule.json", out.summary);
  return out;
}

ExperimentOutcome hit_count_exp(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  const auto& cfg = s.model;
  const SublevelSpec spec{cfg.potential, param(s.params, "E", 0.0), param(s.params, "delta", 1e-3)};
  const Phase x = param_phase(s.params, "x", cfg.blocks.total(), random_phase(cfg.blocks.total(), s.seed));
  const HitScan scan = hit_count_scan(cfg, spec, x, param(s.params, "N_lo", 10), param(s.params, "N_hi", 60),
                                      param(s.params, "N1", 2));
  auto f = art.open("hit_count.csv");
  CsvWriter w(f, {"N", "count", "cap"});
  for (const auto& h : scan.counts) w.row(h.N, h.count, h.cap);
  out.summary = {{"zero_fraction", scan.zero_fraction}, {"x", phase_to_cell(x)}};
  art.json("hit_count.json", out.summary);
  return out;
}

ExperimentOutcome localization_exp(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  const int N = param(s.params, "N", 100);
  const int b = s.model.blocks.total();
  const Phase x = param_phase(s.params, "x", b, Phase::Zero(b));
  LocalizationOptions lo;
  lo.noise_floor = param(s.params, "noise_floor", 1e-12);
  const LocalizationProfile p = localization_profile(s.model, N, x, lo);
  auto f = art.open("localization.csv");
  CsvWriter w(f, {"index", "eigenvalue", "center", "rate", "participation", "points_used"});
  for (std::size_t i = 0; i < p.fits.size(); ++i)
    w.row(static_cast<int>(i), p.eigenvalues[static_cast<Eigen::Index>(i)], point_to_cell(p.fits[i].center),
          p.fits[i].rate, p.fits[i].participation, p.fits[i].points_used);
  out.summary = {{"N", N},
                 {"lambda", s.model.lambda},
                 {"median_rate", p.median_rate()},
                 {"rate_floor", neumann_rate_floor(s.model.lambda)},
                 {"median_participation", p.median_participation()},
                 {"max_residual", p.max_residual},
                 {"spectral_bound", p.spectral_bound},
                 {"spectrum_in_bound", p.spectrum_in_bound}};
  const auto lambdas = param_list(s.params, "lambdas", {});
  if (!lambdas.empty()) {
    auto fl = art.open("localization_ladder.csv");
    CsvWriter wl(fl, {"lambda", "median_rate", "rate_floor"});
    double prev = -std::numeric_limits<double>::infinity();
    bool increasing = true;
    for (double lam : lambdas) {
      ModelConfig c = s.model;
      c.lambda = lam;
      const double m = localization_profile(c, N, x, lo).median_rate();
      wl.row(lam, m, neumann_rate_floor(lam));
      increasing = increasing && m > prev;
      prev = m;
    }
    out.summary["ladder_increasing"] = increasing;
  }
  if (p.max_residual > 1e-8) out.exit_code = 3;
  art.json("localization.json", out.summary);
  return out;
}

ExperimentOutcome calibrate_decay(const ExperimentSpec& s) {
  ExperimentOutcome out;
  Artifacts art(s, out);
  CalibrationOptions opt;
  opt.rho = param(s.params, "rho", opt.rho);
  opt.lambdas = param_list(s.params, "lambdas", opt.lambdas);
  opt.N = param(s.params, "N", opt.N);
  opt.M = param(s.params, "M", opt.M);
  opt.samples_per_lambda = param(s.params, "samples_per_lambda", opt.samples_per_lambda);
  opt.safety = param(s.params, "safety", opt.safety);
  opt.rho_bar = param(s.params, "rho_bar", opt.rho_bar);
  opt.seed = s.seed;
  const DecayCalibration cal = calibrate_degrade_constant(opt);

  auto f = art.open("calibration.csv");
  CsvWriter w(f, {"lambda", "x", "E", "observed_rate"});
  for (const auto& p : cal.points) w.row(p.lambda, phase_to_cell(p.x), p.E, p.observed_rate);

  const std::string table_path =
      param<std::string>(s.params, "table", (std::filesystem::path(s.out_dir) / "degrade_constants.json").string());
  DegradeTable table;
  if (std::filesystem::exists(table_path)) table = load_degrade_table(table_path);
  table.by_family["exp_decay"] = {cal.degrade_constant, cal.to_json()};
  save_degrade_table(table, table_path);
  out.artifacts.push_back(table_path);
  out.summary = cal.to_json();
  out.summary["degrade_constant"] = cal.degrade_constant;
  return out;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  set_thread_count(spec.threads);
  if (spec.tag != "calibrate-decay" && spec.tag != "schedule-table") spec.model.validate();
  if (spec.tag == "goodness-scan") return goodness_scan(spec);
  if (spec.tag == "ldt-scan") return ldt_scan(spec);
  if (spec.tag == "neumann-check") return neumann_check(spec);
  if (spec.tag == "cartan-sweep") return cartan_sweep(spec);
  if (spec.tag == "msa-toy") return msa_toy(spec);
  if (spec.tag == "schedule-table") return schedule_table(spec);
  if (spec.tag == "hit-count") return hit_count_exp(spec);
  if (spec.tag == "localization-profile") return localization_exp(spec);
  if (spec.tag == "calibrate-decay") return calibrate_decay(spec);
  throw InputError("unknown experiment '" + spec.tag + "'");
}

}  // namespace qpl
