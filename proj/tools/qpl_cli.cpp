#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpl/errors.hpp"
#include "qpl/experiments.hpp"
#include "qpl/io.hpp"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  int threads = 0;
  std::vector<std::string> params;
};

/// "key=value" with value parsed as JSON, falling back to a plain string.
void apply_param(qpl::Json& params, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw qpl::InputError("--param expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
  const qpl::Json parsed = qpl::Json::parse(value, nullptr, false);
  params[key] = parsed.is_discarded() ? qpl::Json(value) : parsed;
}

int run(const std::string& tag, const Flags& f) {
  qpl::ExperimentSpec spec;
  spec.tag = tag;
  spec.seed = f.seed;
  spec.out_dir = f.out;
  spec.threads = f.threads;
  if (!f.config.empty()) {
    const qpl::Json cfg = qpl::read_json_file(f.config);
    spec.model = qpl::model_from_json(cfg.contains("model") ? cfg.at("model") : cfg);
    if (cfg.contains("params")) spec.params = cfg.at("params");
  } else if (tag != "schedule-table" && tag != "calibrate-decay") {
    throw qpl::InputError(tag + " needs --config");
  }
  for (const auto& kv : f.params) apply_param(spec.params, kv);

  const qpl::ExperimentOutcome out = qpl::run_experiment(spec);
  for (const auto& a : out.artifacts) std::cerr << "wrote " << a << '\n';
  std::cout << out.summary.dump(2) << '\n';
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-periodic operator laboratory"};
  app.require_subcommand(1);
  Flags flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& tag : qpl::experiment_tags()) {
    auto* sub = app.add_subcommand(tag, "run the " + tag + " experiment");
    sub->add_option("--config", flags.config, "model config JSON (optionally with a 'params' object)");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--threads", flags.threads, "OpenMP threads (0 keeps the default)");
    sub->add_option("--param", flags.params, "experiment parameter key=json-value (repeatable)");
    subs[tag] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  std::string tag;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) tag = name;

  try {
    return run(tag, flags);
  } catch (const qpl::InputError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << app.get_subcommand(tag)->help();
    return 1;
  } catch (const qpl::PreconditionFailure& e) {
    std::cerr << "hypothesis not met (" << e.condition() << "): " << e.what() << '\n';
    return 2;
  } catch (const qpl::SingularMatrixError& e) {
    std::cerr << "singular restricted matrix: " << e.what() << '\n';
    return 2;
  } catch (const qpl::InvariantViolation& e) {
    std::cerr << "certified bound violated: " << e.what() << '\n';
    return 3;
  }
}
