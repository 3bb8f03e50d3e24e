#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpl/errors.hpp"
#include "qpl/experiments.hpp"
#include "qpl/localization.hpp"
#include "support.hpp"

using namespace qpl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qpl_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

long line_count(const fs::path& p) {
  std::ifstream in(p);
  long n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

ModelConfig model(const std::string& family, double rho, double lambda) {
  return model_from_json({{"kernel", {{"family", family}, {"dim", 1}, {"rho", rho}}}, {"lambda", lambda}});
}

ExperimentOutcome run(const std::string& tag, const ModelConfig& m, Json params, const fs::path& dir,
                      std::uint64_t seed = 1) {
  ExperimentSpec s;
  s.tag = tag;
  s.model = m;
  s.params = std::move(params);
  s.seed = seed;
  s.out_dir = dir.string();
  return run_experiment(s);
}

}  // namespace

TEST_SUITE("experiments_cli") {
  TEST_CASE("experiment tags") {
    const auto& tags = experiment_tags();
    CHECK(tags.size() == 9);
    CHECK(std::find(tags.begin(), tags.end(), "goodness-scan") != tags.end());
    CHECK_THROWS_AS(run("no-such-tag", model("exp_decay", 1.0, 10.0), Json::object(), fresh_dir("tag")), InputError);
  }

  TEST_CASE("goodness scan covers the full grid") {
    const fs::path dir = fresh_dir("goodness");
    const auto out = run("goodness-scan", model("exp_decay", 1.0, 10.0), {{"N", 20}}, dir);
    CHECK(out.exit_code == 0);
    CHECK(out.summary.at("rows") == 1024);
    CHECK(line_count(dir / "goodness.csv") == 1025);
    CHECK(first_line(dir / "goodness.csv") == "x,E,N,region_id,norm,fitted_rate,verdict");
    CHECK(first_line(dir / "decay.csv") == "x,E,N,r,log_abs_g");
    const Json j = read_json_file((dir / "goodness_summary.json").string());
    for (const char* k : {"rows", "good", "rho_bar", "N", "region"}) CHECK(j.contains(k));
  }

  TEST_CASE("artifacts are deterministic") {
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    const Json p{{"N", 6}, {"x_count", 4}, {"E_count", 4}};
    run("goodness-scan", model("exp_decay", 1.0, 10.0), p, a, 5);
    run("goodness-scan", model("exp_decay", 1.0, 10.0), p, b, 5);
    for (const char* f : {"goodness.csv", "decay.csv", "goodness_summary.json"}) CHECK(slurp(a / f) == slurp(b / f));

    const Json h{{"N_lo", 10}, {"N_hi", 20}};
    run("hit-count", model("exp_decay", 1.0, 10.0), h, a, 9);
    run("hit-count", model("exp_decay", 1.0, 10.0), h, b, 9);
    CHECK(slurp(a / "hit_count.csv") == slurp(b / "hit_count.csv"));
  }

  TEST_CASE("neumann check passes on a strongly coupled model") {
    const fs::path dir = fresh_dir("neumann");
    const auto out =
        run("neumann-check", model("exp_decay", 3.0, 220.0), {{"samples", 50}, {"series_instances", 2}}, dir);
    CHECK(out.exit_code == 0);
    CHECK(out.summary.at("violations") == 0);
    CHECK(first_line(dir / "neumann.csv") == "x,E,excluded,norm,bound,worst_decay_ratio,verdict");
    CHECK(first_line(dir / "neumann_series.csv") == "instance,k,residual,tail_bound");
    const Json j = read_json_file((dir / "neumann_summary.json").string());
    for (const char* k : {"samples", "checked", "violations", "series_instances", "worst_series_ratio", "N", "delta"})
      CHECK(j.contains(k));
  }

  TEST_CASE("ldt and cartan artifacts") {
    const fs::path dir = fresh_dir("ldt");
    run("ldt-scan", model("exp_decay", 1.0, 10.0), {{"samples", 2000}, {"delta_count", 4}, {"sections", 4}}, dir);
    CHECK(first_line(dir / "ldt_0.csv") == "delta,j,section_id,measure,half_width");
    const Json l = read_json_file((dir / "ldt_0.json").string());
    for (const char* k : {"C", "a", "residual", "deltas", "measures", "csv"}) CHECK(l.contains(k));

    run("cartan-sweep", model("exp_decay", 1.0, 10.0), {{"samples", 20000}}, dir);
    CHECK(first_line(dir / "cartan.csv") == "epsilon,empirical,half_width,bound_log");
    CHECK(read_json_file((dir / "cartan.json").string()).at("family") == "scalar");
  }

  TEST_CASE("schedule and hit count artifacts") {
    const fs::path dir = fresh_dir("schedule");
    const auto out = run("schedule-table", ModelConfig{}, Json::object(), dir);
    CHECK(out.exit_code == 0);
    CHECK(first_line(dir / "schedule.csv") == "step,N,rho,measure_exponent,omega_excluded");
    CHECK(read_json_file((dir / "schedule.json").string()).at("c1") == doctest::Approx(0.01));

    run("hit-count", model("exp_decay", 1.0, 10.0), {{"N_lo", 10}, {"N_hi", 14}}, dir);
    CHECK(first_line(dir / "hit_count.csv") == "N,count,cap");
    CHECK(line_count(dir / "hit_count.csv") == 6);
    CHECK(read_json_file((dir / "hit_count.json").string()).contains("zero_fraction"));
  }

  TEST_CASE("toy pipeline artifacts") {
    const fs::path dir = fresh_dir("toy");
    const Json p{{"N1", 1}, {"N", {16}}, {"x_count", 2}, {"E", {1.4}}, {"cartan_samples", 16}};
    const auto out = run("msa-toy", model("zero", 10.0, 220.0), p, dir);
    CHECK(out.exit_code != 3);
    const Json j = read_json_file((dir / "msa_summary.json").string());
    CHECK(j.contains("N1"));
    std::ifstream in(dir / "trace.jsonl");
    std::string line;
    long records = 0;
    while (std::getline(in, line)) {
      const Json r = Json::parse(line);
      for (const char* k : {"cell", "x", "E", "stage", "status", "condition", "detail", "metrics"}) CHECK(r.contains(k));
      ++records;
    }
    CHECK(records > 0);
  }

  TEST_CASE("localization of a decoupled system") {
    const ModelConfig m = model("zero", 1.0, 10.0);
    const LocalizationProfile p = localization_profile(m, 20, Phase::Zero(1));
    for (const auto& f : p.fits) {
      CHECK(f.participation == doctest::Approx(1.0));
      CHECK(std::isinf(f.rate));
    }
    CHECK(p.spectrum_in_bound);

    const fs::path dir = fresh_dir("localization");
    const auto out = run("localization-profile", model("laplacian_l1", 1.0, 100.0), {{"N", 30}}, dir);
    CHECK(out.exit_code == 0);
    CHECK(first_line(dir / "localization.csv") == "index,eigenvalue,center,rate,participation,points_used");
    const Json j = read_json_file((dir / "localization.json").string());
    for (const char* k : {"N", "lambda", "median_rate", "rate_floor", "median_participation", "max_residual"})
      CHECK(j.contains(k));
  }

  TEST_CASE("decay calibration writes a loadable table") {
    const fs::path dir = fresh_dir("calibrate");
    const auto out = run("calibrate-decay", ModelConfig{},
                         {{"lambdas", {220.0}}, {"samples_per_lambda", 3}, {"N", 12}}, dir);
    CHECK(out.exit_code == 0);
    CHECK(first_line(dir / "calibration.csv") == "lambda,x,E,observed_rate");
    const DegradeTable t = load_degrade_table((dir / "degrade_constants.json").string());
    CHECK(degrade_constant_for(t, KernelFamily::ExpDecay) >= 0.0);
    CHECK(out.summary.at("energy_band").size() == 2);
  }

  TEST_CASE("degrade table round trip") {
    DegradeTable t;
    t.by_family["exp_decay"] = DegradeEntry{0.75, Json{{"note", "test"}}};
    const fs::path dir = fresh_dir("table");
    save_degrade_table(t, (dir / "t.json").string());
    const DegradeTable back = load_degrade_table((dir / "t.json").string());
    CHECK(degrade_constant_for(back, KernelFamily::ExpDecay) == 0.75);
    CHECK_THROWS_AS(degrade_constant_for(back, KernelFamily::LaplacianL1), InputError);
    CHECK_THROWS_AS(load_degrade_table((dir / "missing.json").string()), InputError);

    const DegradeTable shipped = load_degrade_table(default_degrade_path());
    CHECK(degrade_constant_for(shipped, KernelFamily::ExpDecay) >= 0.0);
  }

  TEST_CASE("csv and number formatting") {
    std::ostringstream os;
    CsvWriter w(os, {"a", "b"});
    w.write({"1", "2"});
    CHECK_THROWS_AS(w.write({"1"}), InputError);
    CHECK(os.str() == "a,b\n1,2\n");
    CHECK(w.rows() == 1);
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(format_double(NAN) == "nan");
    CHECK(std::stod(format_double(0.1)) == 0.1);
  }

  TEST_CASE("sample grids") {
    const auto xs = phase_grid(2, 4);
    REQUIRE(xs.size() == 4);
    CHECK(xs[1][0] == doctest::Approx(0.25));
    const ModelConfig m = model("exp_decay", 1.0, 10.0);
    const auto Es = energy_grid(m, 5);
    CHECK(Es.size() == 5);
    CHECK(Es.front() == doctest::Approx(-Es.back()));
    CHECK(random_phase(3, 11) == random_phase(3, 11));
    const auto inst = sample_instances(m, 10, 3, 50, [](const Phase&, double E) { return E > 0; }, kNeumannBand);
    for (const auto& s : inst) {
      CHECK(s.E >= 1.15);
      CHECK(s.E <= 1.5);
    }
    CHECK_THROWS_AS(sample_instances(m, 1, 3, 5, [](const Phase&, double) { return true; }, EnergyBand{2.0, 1.0}),
                    InputError);
  }
}
