#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpl/greens.hpp"
#include "qpl/initial_scale.hpp"
#include "qpl/lattice.hpp"
#include "qpl/model.hpp"
#include "qpl/toy_msa.hpp"

namespace qpl {

using Json = nlohmann::json;

/// Model from a config object with keys kernel {family, rho, truncation_radius, amplitude,
/// symbol}, potential {terms: [{k, cos, sin}]} or "cosine_sum", blocks, lambda, omega
/// (array or "golden"). Missing blocks default to ones(d) with d from kernel.dim or 1.
ModelConfig model_from_json(const Json& j);
Json model_to_json(const ModelConfig& cfg);

/// Reads a JSON file; InputError naming the path on failure.
Json read_json_file(const std::string& path);

Json to_json(const LatticePoint& p);
LatticePoint point_from_json(const Json& j);

/// {center, size, carve, points_hash}; carve is null for a cube.
Json region_to_json(const ElementaryRegion& r);
ElementaryRegion region_from_json(const Json& j);

Json to_json(const GoodnessReport& r);
Json to_json(const LojasiewiczFit& f);
Json to_json(const MeasureEstimate& m);
/// One JSON-lines record of a toy pipeline trace.
Json to_json(const StageRecord& r);

/// Shortest round-trip decimal form of a double; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double v);

/// Comma-separated writer with a fixed header; every row must match the header width.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  template <typename... Ts>
  void row(const Ts&... cells) {
    std::vector<std::string> v{cell(cells)...};
    write(v);
  }
  void write(const std::vector<std::string>& cells);
  std::size_t rows() const noexcept { return rows_; }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ostream& out_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

/// Space-separated coordinates, the CSV form of a phase or lattice point.
std::string phase_to_cell(const Phase& x);
std::string point_to_cell(const LatticePoint& p);

struct DegradeEntry {
  double degrade_constant = 0.0;
  Json calibration;  ///< sweep record: rho, lambdas, seeds, observed rates, safety factor
};

struct DegradeTable {
  int version = 1;
  std::map<std::string, DegradeEntry> by_family;
};

/// Default location of the committed calibration table.
std::string default_degrade_path();
DegradeTable load_degrade_table(const std::string& path);
void save_degrade_table(const DegradeTable& t, const std::string& path);
/// Constant for the kernel family; InputError when the table lacks it.
double degrade_constant_for(const DegradeTable& t, KernelFamily family);

}  // namespace qpl
