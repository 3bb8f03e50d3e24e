#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qpl/io.hpp"
#include "qpl/model.hpp"

namespace qpl {

struct ExperimentSpec {
  std::string tag;
  ModelConfig model;
  Json params = Json::object();  ///< experiment grids and knobs, see the README tables
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 0;
};

struct ExperimentOutcome {
  int exit_code = 0;  ///< 0 pass, 2 hypothesis not met, 3 certified bound violated
  std::vector<std::string> artifacts;
  Json summary = Json::object();
};

const std::vector<std::string>& experiment_tags();

/// Dispatches on spec.tag and writes the artifacts into spec.out_dir. Unknown tags and bad
/// parameters raise InputError.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

/// count phases x_i with every coordinate (i / count + c * 0.25 kGoldenMean) mod 1 for
/// coordinate c.
std::vector<Phase> phase_grid(int num_vars, int count);

/// count energies spanning the spectral bound plus 10% on both sides.
std::vector<double> energy_grid(const ModelConfig& cfg, int count);

/// Uniform phase in [0,1)^b from a 64-bit seed.
Phase random_phase(int num_vars, std::uint64_t seed);

struct SampledInstance {
  Phase x;
  double E = 0.0;
  int tries = 0;  ///< energies drawn before the predicate held
};

/// Energies with |E| uniform in [lo, hi] and a random sign; hi = 0 takes the spectral bound.
struct EnergyBand {
  double lo = 0.0;
  double hi = 0.0;
};

/// For sample i, draws x from block_seed(seed, i) and energies from the band until
/// admissible(x, E) holds, at most max_tries times. Samples that never become admissible
/// are dropped.
std::vector<SampledInstance> sample_instances(const ModelConfig& cfg, int count, std::uint64_t seed, int max_tries,
                                              const std::function<bool(const Phase&, double)>& admissible,
                                              EnergyBand band = {});

/// |E| in [1.15, 1.5]: off the range of cos by more than delta = 0.1, so x + n omega avoids
/// the sublevel set on boxes of any length, and size-5 windows have norm below e^{sqrt 5}.
inline constexpr EnergyBand kNeumannBand{1.15, 1.5};

struct CalibrationOptions {
  double rho = 3.0;
  std::vector<double> lambdas{5.0, 10.0, 20.0, 50.0, 220.0};
  int N = 24;
  int M = 5;
  int samples_per_lambda = 40;
  double rho_bar = 0.0;   ///< 0 takes 4 rho / 5
  EnergyBand band = kNeumannBand;
  double safety = 1.5;
  std::uint64_t seed = 7;
};

struct CalibrationPoint {
  double lambda = 0.0;
  Phase x;
  double E = 0.0;
  double observed_rate = 0.0;
};

struct DecayCalibration {
  CalibrationOptions options;
  std::vector<CalibrationPoint> points;
  double worst_gap = 0.0;          ///< max sqrt(M) (rho_bar - observed_rate), floored at 0
  double degrade_constant = 0.0;   ///< safety * worst_gap
  Json to_json() const;
};

/// Sweep over lambda of exp_decay models on Q_N with a size-M cover and no excluded set.
DecayCalibration calibrate_degrade_constant(const CalibrationOptions& opt);

}  // namespace qpl
