#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "m4bram/dse.hpp"
#include "m4bram/hetero_dla.hpp"
#include "m4bram/layer.hpp"

namespace m4bram {

/// A labelled engine configuration, e.g. "DP-M4S".
struct ConfigSpec {
  std::string label;
  ArchKind arch = ArchKind::PlainBram;
  Pumping pumping = Pumping::Synchronous;
  bool use_dsp = true;
  std::vector<int> n_i_allowed{1, 2, 4};
};

ConfigSpec dla_config();
/// "DLA", "DP-M4S", "SY-M4S", "SY-M4L", "DP-M4L", "1DA", "2SA".
ConfigSpec config_by_label(const std::string& label);

/// Memoized search so scenario points sharing a baseline search it once.
class ScenarioRunner {
public:
  explicit ScenarioRunner(SearchOptions options = {}) : options_(std::move(options)) {}

  const SearchResult& best(const NetworkDesc& net, const FpgaTarget& target,
                           const EngineSetup& setup, const std::vector<int>& n_i_allowed);
  const SearchResult& best(const NetworkDesc& net, const FpgaTarget& target,
                           const ConfigSpec& cfg, const PrecisionConfig& p);
  [[nodiscard]] std::size_t searches_run() const { return memo_.size(); }

private:
  SearchOptions options_;
  std::map<std::string, SearchResult> memo_;
};

struct ScenarioRow {
  std::string network;
  std::string fpga;
  std::string config;
  std::string baseline;
  /// Scenario-specific point label: n_i set, 8-bit filter ratio, or empty.
  std::string variant;
  int w_bits = 8;
  int a_bits = 8;
  std::int64_t latency = 0;
  std::int64_t baseline_latency = 0;
  double speedup = 0; ///< baseline_latency / latency
  double stall_share = 0;
  ResourceUsage usage;
  TilingConfig tiling;
};

struct ScenarioReport {
  std::string id;
  std::vector<ScenarioRow> rows;

  [[nodiscard]] std::string csv() const;
};

/// Ids: "act-sweep", "bramac-compare", "ablation", "iso-area", "mixed-weights".
struct Scenario {
  std::string id;
  std::vector<std::string> networks;
  /// act-sweep, iso-area: activation bits. bramac-compare, ablation: uniform
  /// weight and activation bits. mixed-weights: activation bits.
  std::vector<int> precisions;
  /// mixed-weights only: 8-bit filter ratios.
  std::vector<double> ratios;
  /// Replaces the scenario's default FPGA (iso-area uses it as the base die).
  std::optional<FpgaTarget> fpga;
};

const std::vector<std::string>& scenario_ids();
Scenario default_scenario(const std::string& id);

/// Errors from a scenario point are rethrown with the point in the message.
ScenarioReport run_scenario(const Scenario& s, ScenarioRunner& runner);

/// Writes `<dir>/<id>.csv` through a temporary file and a rename.
std::filesystem::path write_report(const ScenarioReport& report, const std::filesystem::path& dir);

/// Writes `text` to `path` via `path.tmp` and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Geometric mean; throws on an empty or non-positive input.
double geomean(const std::vector<double>& v);

} // namespace m4bram
