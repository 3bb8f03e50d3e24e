#include "qpl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "qpl/errors.hpp"

namespace qpl {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

TrigPotential potential_from_json(const Json& j, int num_vars) {
  if (j.is_string()) {
    if (j.get<std::string>() == "cosine_sum") return TrigPotential::cosine_sum(num_vars);
    throw InputError("unknown potential '" + j.get<std::string>() + "'");
  }
  if (!j.contains("terms") || !j.at("terms").is_array()) throw InputError("potential.terms must be an array");
  std::vector<TrigTerm> terms;
  for (const auto& t : j.at("terms")) {
    TrigTerm term;
    if (!t.contains("k")) throw InputError("potential term without 'k'");
    term.k = t.at("k").get<std::vector<int>>();
    term.cos_coef = get_or(t, "cos", 0.0);
    term.sin_coef = get_or(t, "sin", 0.0);
    terms.push_back(std::move(term));
  }
  const int vars = terms.empty() ? num_vars : static_cast<int>(terms.front().k.size());
  return TrigPotential(vars, std::move(terms));
}

Json potential_to_json(const TrigPotential& v) {
  Json terms = Json::array();
  for (const auto& t : v.terms()) terms.push_back({{"k", t.k}, {"cos", t.cos_coef}, {"sin", t.sin_coef}});
  return {{"terms", terms}};
}

}  // namespace

ModelConfig model_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  if (!j.contains("kernel")) throw InputError("config lacks 'kernel'");
  const Json& k = j.at("kernel");

  ModelConfig cfg;
  if (j.contains("blocks")) cfg.blocks = BlockStructure(j.at("blocks").get<std::vector<int>>());
  else cfg.blocks = BlockStructure::ones(get_or(k, "dim", 1));
  const int d = cfg.blocks.dim();
  const int b = cfg.blocks.total();

  const KernelFamily fam = parse_kernel_family(get_or<std::string>(k, "family", "exp_decay"));
  const double rho = get_or(k, "rho", 1.0);
  const double amp = get_or(k, "amplitude", 1.0);
  const int radius = get_or(k, "truncation_radius", 0);
  switch (fam) {
    case KernelFamily::Zero: cfg.kernel = ToeplitzKernel::zero(d, rho); break;
    case KernelFamily::LaplacianL1: cfg.kernel = ToeplitzKernel::laplacian_l1(d, amp, rho); break;
    case KernelFamily::LaplacianSup: cfg.kernel = ToeplitzKernel::laplacian_sup(d, amp, rho); break;
    case KernelFamily::ExpDecay: cfg.kernel = ToeplitzKernel::exp_decay(d, rho, radius, amp); break;
    case KernelFamily::FourierSymbol:
      if (!k.contains("symbol")) throw InputError("fourier_symbol kernel needs 'symbol'");
      cfg.kernel = dual_kernel_from_symbol(potential_from_json(k.at("symbol"), d), rho);
      break;
  }

  cfg.potential = j.contains("potential") ? potential_from_json(j.at("potential"), b) : TrigPotential::cosine_sum(b);
  cfg.lambda = get_or(j, "lambda", 0.0);
  if (!j.contains("omega") || (j.at("omega").is_string() && j.at("omega").get<std::string>() == "golden")) {
    cfg.omega = Frequency::Constant(b, kGoldenMean);
  } else {
    const auto w = j.at("omega").get<std::vector<double>>();
    cfg.omega = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  }
  cfg.validate();
  return cfg;
}

Json model_to_json(const ModelConfig& cfg) {
  Json k{{"family", to_string(cfg.kernel.family())},
         {"rho", cfg.kernel.rho()},
         {"truncation_radius", cfg.kernel.radius()}};
  if (cfg.kernel.family() == KernelFamily::FourierSymbol) k["symbol"] = potential_to_json(kernel_symbol(cfg.kernel));
  std::vector<double> w(cfg.omega.data(), cfg.omega.data() + cfg.omega.size());
  return {{"kernel", k},
          {"potential", potential_to_json(cfg.potential)},
          {"blocks", cfg.blocks.sizes},
          {"lambda", cfg.lambda},
          {"omega", w}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Json to_json(const LatticePoint& p) { return p.to_vector(); }

LatticePoint point_from_json(const Json& j) { return LatticePoint(j.get<std::vector<int>>()); }

Json region_to_json(const ElementaryRegion& r) {
  Json j{{"center", to_json(r.center)}, {"size", r.size}, {"points_hash", r.points().hash()}};
  j["carve"] = r.carve ? Json(to_string(*r.carve)) : Json(nullptr);
  return j;
}

ElementaryRegion region_from_json(const Json& j) {
  ElementaryRegion r;
  r.center = point_from_json(j.at("center"));
  r.size = j.at("size").get<int>();
  if (j.contains("carve") && !j.at("carve").is_null()) r.carve = parse_sign_pattern(j.at("carve").get<std::string>());
  if (j.contains("points_hash") && j.at("points_hash").get<std::string>() != r.points().hash())
    throw InputError("region points_hash does not match its description");
  return r;
}

Json to_json(const GoodnessReport& r) {
  Json v = Json::array();
  for (const auto& e : r.decay_violations)
    v.push_back({{"n", to_json(e.n)}, {"m", to_json(e.m)}, {"abs_value", e.abs_value}, {"allowed", e.allowed}});
  return {{"N", r.N},
          {"rho_bar", r.rho_bar},
          {"norm", r.norm},
          {"log_norm", r.log_norm},
          {"log_norm_bound", r.log_norm_bound},
          {"norm_ok", r.norm_ok},
          {"violation_count", r.violation_count},
          {"decay_violations", v},
          {"fitted_rate", std::isfinite(r.fitted_rate) ? Json(r.fitted_rate) : Json(nullptr)},
          {"pairs_checked", r.pairs_checked},
          {"pass", r.pass}};
}

Json to_json(const LojasiewiczFit& f) {
  return {{"C", f.constant_C},  {"a", f.exponent_a}, {"residual", f.residual}, {"deltas", f.deltas},
          {"measures", f.measures}, {"half_widths", f.half_widths}, {"section_ids", f.section_ids},
          {"degenerate", f.degenerate}, {"note", f.note}};
}

Json to_json(const MeasureEstimate& m) {
  return {{"value", m.value},
          {"half_width", m.half_width},
          {"samples", m.samples},
          {"method", to_string(m.method)},
          {"seed", m.seed}};
}

Json to_json(const StageRecord& r) {
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = std::isfinite(v) ? Json(v) : Json(format_double(v));
  std::vector<double> x(r.x.data(), r.x.data() + r.x.size());
  return {{"cell", r.cell},
          {"x", x},
          {"E", r.E},
          {"stage", r.stage},
          {"status", to_string(r.status)},
          {"condition", r.condition},
          {"detail", r.detail},
          {"metrics", metrics}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), width_(header.size()) {
  if (header.empty()) throw InputError("CsvWriter: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::write(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw InputError("CsvWriter: row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
  ++rows_;
}

std::string phase_to_cell(const Phase& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? " " : "") + format_double(x[i]);
  return s;
}

std::string point_to_cell(const LatticePoint& p) {
  std::string s;
  for (int i = 0; i < p.dim(); ++i) s += (i ? " " : "") + std::to_string(p[i]);
  return s;
}

std::string default_degrade_path() { return std::string(QPL_DATA_DIR) + "/degrade_constants.json"; }

DegradeTable load_degrade_table(const std::string& path) {
  const Json j = read_json_file(path);
  DegradeTable t;
  t.version = get_or(j, "version", 1);
  if (!j.contains("constants") || !j.at("constants").is_object())
    throw InputError("'" + path + "' lacks a 'constants' object");
  for (const auto& [fam, e] : j.at("constants").items()) {
    parse_kernel_family(fam);
    DegradeEntry d;
    d.degrade_constant = e.at("degrade_constant").get<double>();
    if (e.contains("calibration")) d.calibration = e.at("calibration");
    t.by_family[fam] = std::move(d);
  }
  return t;
}

void save_degrade_table(const DegradeTable& t, const std::string& path) {
  Json c = Json::object();
  for (const auto& [fam, e] : t.by_family) c[fam] = {{"degrade_constant", e.degrade_constant}, {"calibration", e.calibration}};
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << Json{{"version", t.version}, {"constants", c}}.dump(2) << '\n';
}

double degrade_constant_for(const DegradeTable& t, KernelFamily family) {
  const auto it = t.by_family.find(to_string(family));
  if (it == t.by_family.end()) throw InputError("no calibrated degrade constant for kernel family " + to_string(family));
  return it->second.degrade_constant;
}

}  // namespace qpl
