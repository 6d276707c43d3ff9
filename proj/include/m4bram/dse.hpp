#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "m4bram/engine_perf.hpp"
#include "m4bram/hetero_dla.hpp"
#include "m4bram/layer.hpp"

namespace m4bram {

struct FpgaTarget {
  std::string name;
  int logic_blocks = 0;
  int dsp_blocks = 0;
  int m20k_blocks = 0;
  double area_fraction_logic = 0; ///< percent of core area
  double area_fraction_dsp = 0;
  double area_fraction_m20k = 0;

  void validate() const;

  static FpgaTarget gx400();
  static FpgaTarget gx650();
};

/// JSON object with the FpgaTarget field names.
FpgaTarget load_fpga(const std::filesystem::path& path);
/// "gx400", "gx650", or a path to a JSON file.
FpgaTarget fpga_by_name(const std::string& name_or_path);

/// Per-block areas normalized so one plain M20K is 1.
struct AreaModel {
  double unit_logic = 0;
  double unit_dsp = 0;
  double unit_m20k = 1;

  [[nodiscard]] double bram_block_area(ArchKind arch) const {
    return unit_m20k * (1.0 + profile(arch).m20k_area_overhead);
  }
};

AreaModel unit_areas(const FpgaTarget& target);

/// Extra area of converting every M20K to `arch`, in DSP blocks.
double cim_overhead_in_dsps(const FpgaTarget& target, ArchKind arch);
/// Same overhead as a percentage of the FPGA core area.
double core_area_increase_percent(const FpgaTarget& target, ArchKind arch);

struct ResourceUsage {
  int dsp_blocks = 0;
  int bram_blocks = 0; ///< every block used, CIM or not
  int cim_blocks = 0;
  int filter_blocks = 0;
  int buffer_blocks = 0;
  double area = 0;

  [[nodiscard]] bool fits(const FpgaTarget& t) const {
    return dsp_blocks <= t.dsp_blocks && bram_blocks <= t.m20k_blocks;
  }
};

/// Double-buffered input/output tile storage, worst layer.
int buffer_blocks(const NetworkDesc& net, const TilingConfig& t, const PrecisionConfig& p);

ResourceUsage resource_usage(const TilingConfig& t, const EngineSetup& setup, int buffers,
                             const AreaModel& area);
ResourceUsage resource_usage(const NetworkDesc& net, const TilingConfig& t,
                             const EngineSetup& setup, const AreaModel& area);

/// perf * (perf / area)
double objective(double perf, double area);

struct SearchOptions {
  std::vector<int> n_i_allowed{1, 2, 4};
  AreaModel area = unit_areas(FpgaTarget::gx650());
  /// Evaluate every candidate and keep them all for a CSV dump.
  bool keep_candidates = false;
  /// Upper limits on the tiling grid.
  int max_pq_vec = 16;
  int max_r_vec = 4;
};

struct Candidate {
  TilingConfig tiling;
  ResourceUsage usage;
  bool feasible = false;
  bool evaluated = false;
  double perf = 0;
  double score = 0;
  std::int64_t latency = 0;
};

struct SearchResult {
  TilingConfig tiling;
  PerfReport report;
  ResourceUsage usage;
  double perf = 0;
  double score = 0;
  std::int64_t candidates_total = 0;
  std::int64_t candidates_evaluated = 0;
  std::vector<Candidate> candidates;
};

/// Exhaustive search over power-of-two tilings and n_i, maximizing
/// objective(). The CIM block count is not free: BPEs compute on the blocks
/// that store the tile's filters, so each tiling offers either that many CIM
/// blocks or none (pure DSP). Candidates are visited in order of their score
/// upper bound and the search stops once no remaining bound can win.
/// setup.use_dsp is cleared when the target has no DSP blocks.
SearchResult search(const NetworkDesc& net, const FpgaTarget& target, EngineSetup setup,
                    const SearchOptions& options = {});

std::string candidates_csv(const SearchResult& r);

/// Splits every layer's filters into an 8-bit group (round(R*K) filters) and a
/// 4-bit group. Layers left with no filters in a group are dropped from it.
std::pair<NetworkDesc, NetworkDesc> split_filters(const NetworkDesc& net, double ratio_8bit);

/// The first `fraction` of the target's blocks, area shares scaled alike.
FpgaTarget partition_target(const FpgaTarget& target, double fraction);

using Searcher =
    std::function<SearchResult(const NetworkDesc&, const FpgaTarget&, const EngineSetup&)>;

struct MixedResult {
  PerfReport report;
  double fraction_8bit = 0; ///< share of the FPGA given to the 8-bit group
  SearchResult group8;
  SearchResult group4;
};

/// Two filter groups on a split FPGA, each with its own tiling, running side
/// by side; a layer finishes when both groups do. Every fraction in
/// `fractions` is tried and the lowest total latency wins. R=0 and R=1 run a
/// single group on the whole target. `base` supplies arch, pumping and
/// activation precision; weight bits are set per group.
MixedResult intra_layer_mixed_weights(const NetworkDesc& net, double ratio_8bit,
                                      const FpgaTarget& target, const EngineSetup& base,
                                      const std::vector<double>& fractions,
                                      const Searcher& searcher);

} // namespace m4bram
