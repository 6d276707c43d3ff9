#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "m4bram/dsp_packing.hpp"
#include "m4bram/engine_perf.hpp"
#include "m4bram/layer.hpp"
#include "m4bram/precision.hpp"

namespace m4bram {

struct TilingConfig {
  int c_vec = 1;
  int k_vec = 1;
  int r_vec = 1;
  int p_vec = 1;
  int q_vec = 1;
  /// Fraction of each tile's Q columns given to the BPEs. Unset means the
  /// split is chosen per tile to equalize the two engines.
  std::optional<double> q_split_bpe;
  int n_i = 1;
  /// CIM blocks running BPE work. 0 disables the BPE engine.
  int m4bram_blocks_used = 0;
  /// Informational; filled in by resource accounting.
  int dsp_blocks_used = 0;

  void validate() const;

  friend bool operator==(const TilingConfig&, const TilingConfig&) = default;
};

struct Tile {
  int k0 = 0, c0 = 0, p0 = 0, q0 = 0, r0 = 0, s0 = 0;
  int k = 0, c = 0, p = 0, q = 0, r = 0, s = 0;
  [[nodiscard]] std::int64_t macs() const {
    return std::int64_t{k} * c * p * q * r * s;
  }
};

/// Tiles of identical extent, with multiplicity.
struct TileClass {
  int k = 0, c = 0, p = 0, q = 0, r = 0, s = 0;
  std::int64_t count = 0;
  [[nodiscard]] std::int64_t macs() const {
    return std::int64_t{k} * c * p * q * r * s;
  }
};

/// Explicit tile list; the filter window is tiled by r_vec along R and S.
std::vector<Tile> tile_layer(const LayerShape& layer, const TilingConfig& t);
std::vector<TileClass> tile_classes(const LayerShape& layer, const TilingConfig& t);

struct MemoryParams {
  double bytes_per_cycle = 1 << 20;
};

/// Everything about the accelerator except its tiling.
struct EngineSetup {
  ArchKind arch = ArchKind::M4BRAM_S;
  Pumping pumping = Pumping::Synchronous;
  PrecisionConfig precision;
  DspModel dsp = DspModel::intel();
  MemoryParams mem;
  bool use_dsp = true;
  /// Replaces the profile's per-readout DSP stall when set.
  std::optional<int> readout_stall_override;
};

struct LayerPerf {
  std::string name;
  std::int64_t macs = 0;
  std::int64_t bpe_macs = 0;
  std::int64_t dsp_macs = 0;
  std::int64_t compute_cycles = 0;
  std::int64_t bpe_cycles = 0;
  std::int64_t dsp_cycles = 0;
  std::int64_t dsp_stall_cycles = 0;
  std::int64_t load_cycles = 0;
  std::int64_t store_cycles = 0;
  std::int64_t latency = 0;
  double bpe_utilization = 1.0;
  double dsp_utilization = 1.0;
  std::int64_t tile_count = 0;
};

struct PerfReport {
  std::string network;
  std::vector<LayerPerf> layers;
  std::int64_t total_latency = 0;
  std::int64_t total_stall = 0;
  std::int64_t total_macs = 0;

  [[nodiscard]] double stall_share() const {
    return total_latency ? static_cast<double>(total_stall) / total_latency : 0.0;
  }
  /// baseline latency / this latency
  [[nodiscard]] double speedup_over(const PerfReport& baseline) const {
    return static_cast<double>(baseline.total_latency) / static_cast<double>(total_latency);
  }
};

/// DSP blocks needed for a k_vec x c_vec multiplier array under the packing.
int dsp_blocks_for(const TilingConfig& t, const EngineSetup& setup);

LayerPerf simulate_layer(const LayerShape& layer, const TilingConfig& t, const EngineSetup& setup);
PerfReport simulate_network(const NetworkDesc& net, const TilingConfig& t,
                            const EngineSetup& setup);

/// Lower bound on network latency used to prune searches.
double latency_lower_bound(const NetworkDesc& net, const TilingConfig& t,
                           const EngineSetup& setup);

std::string perf_csv(const PerfReport& report);

/// Per-layer stack of two filter groups running side by side: each layer's
/// latency is the slower group.
PerfReport combine_parallel(const PerfReport& a, const PerfReport& b, const std::string& name);

} // namespace m4bram
