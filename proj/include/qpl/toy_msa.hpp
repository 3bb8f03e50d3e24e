#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qpl/greens.hpp"
#include "qpl/lattice.hpp"
#include "qpl/model.hpp"

namespace qpl {

struct ToyScales {
  int N1 = 4;      ///< window scale
  int N = 24;      ///< Q_N = [-N, N]^d
  int N_bar = 0;   ///< outer size before shrinking; 0 takes default_outer_size(N, N1)
  double inner_exponent = 0.0;  ///< 0 takes 1/(10d)
};

struct ToyOptions {
  ToyScales scales;
  double rho_bar = 0.0;            ///< starting rate; 0 takes 4 rho / 5
  double degrade_constant = 0.0;
  double c1 = 0.01;                ///< bad-set target e^{-N^{c1}}
  int phase_block = 0;             ///< block j perturbed in the Cartan stage
  std::uint64_t cartan_samples = 128;
  std::uint64_t seed = 0;
  bool verify_geometry = true;
  bool relax_geometry = true;      ///< continue with pairs failing only the inner diameter cap
};

enum class StageStatus { Pass, Fail, Skipped, Invariant };

std::string to_string(StageStatus s);

struct StageRecord {
  std::size_t cell = 0;
  Phase x;
  double E = 0.0;
  std::string stage;
  StageStatus status = StageStatus::Skipped;
  std::string condition;  ///< failed hypothesis or check, empty on pass
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;
};

struct CellOutcome {
  Phase x;
  double E = 0.0;
  bool all_pass = false;
  std::string first_failure;      ///< stage name, empty when all pass
  bool good = false;              ///< final goodness at size N
  double final_rate = 0.0;
  double glued_norm = 0.0;        ///< direct ||G_{Q_N}||
  double paste_bound_log = 0.0;   ///< NaN when the paste stage did not certify
  bool invariant_violated = false;
};

struct GeometryEntry {
  LatticePoint n;
  std::optional<RegionPair> pair;
  bool relaxed = false;
  std::string violated;
  std::vector<std::string> verifier;  ///< verify_region_pair findings
};

struct ToyTrace {
  ToyOptions options;
  double rho_bar = 0.0;
  std::vector<GeometryEntry> geometry;
  bool geometry_ok = false;
  std::vector<StageRecord> records;
  std::vector<CellOutcome> cells;
  double bad_fraction = 0.0;
  double target = 0.0;            ///< e^{-N^{c1}}
  bool all_pass = false;
  bool invariant_violated = false;
};

/// max(N, 8 N1): below 8 N1 a site at a corner of Q_N has no outer region, since the
/// region must sit inside n + [-N_bar, N_bar]^d and have size at least 4 N1.
int default_outer_size(int N, int N1);

/// Stage names in pipeline order.
const std::vector<std::string>& toy_stage_names();

/// Runs region adjustment, window goodness, the Cartan stage, decay propagation off the
/// inner sets, pasting over Q_N, propagation on Q_N and the final goodness check on every
/// (x, E) cell. Stage failures are recorded in the trace. Requires N <= 64, d <= 2.
ToyTrace toy_msa_run(const ModelConfig& cfg, const ToyOptions& opt, const std::vector<Phase>& xs,
                     const std::vector<double>& Es);

/// Every cell of the grid xs x Es, x outer.
std::vector<std::pair<Phase, double>> grid_cells(const std::vector<Phase>& xs, const std::vector<double>& Es);

}  // namespace qpl
