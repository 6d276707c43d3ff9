#pragma once

#include <string>
#include <vector>

#include "m4bram/dsp_packing.hpp"
#include "m4bram/precision.hpp"
#include "m4bram/rational.hpp"

namespace m4bram {

enum class ArchKind { M4BRAM_S, M4BRAM_L, BRAMAC_1DA, BRAMAC_2SA, PlainBram, CCB, CoMeFa_D, CoMeFa_A };

struct ArchitectureProfile {
  ArchKind kind;
  std::string name;
  int dummy_arrays;
  int dummy_rows;
  int dummy_cols;
  std::vector<int> n_i_options;
  int ports_occupied_in_cim;
  double m20k_area_overhead;
  bool allows_dsp_access_during_cim;
  bool supports_double_pumping;
  bool transposed_layout;
  bool mixed_precision;
  /// CCB and CoMeFa rows are metadata only.
  bool instantiable;

  [[nodiscard]] bool is_m4bram() const {
    return kind == ArchKind::M4BRAM_S || kind == ArchKind::M4BRAM_L;
  }
  [[nodiscard]] bool is_bramac() const {
    return kind == ArchKind::BRAMAC_1DA || kind == ArchKind::BRAMAC_2SA;
  }
  [[nodiscard]] bool computes() const { return is_m4bram() || is_bramac(); }
};

const ArchitectureProfile& profile(ArchKind kind);

/// All eight rows: the five named engines and the three metadata-only rows.
const std::vector<ArchitectureProfile>& architecture_table();

/// Throws UnsupportedProfileError for metadata-only profiles.
void require_instantiable(const ArchitectureProfile& p);

struct EngineRate {
  Rational macs_per_cycle;
  int mac2_period_cycles = 0;
  int readout_stall_cycles = 0;
};

int mac2_period(const Variant& variant, int act_bits);

EngineRate m4bram_peak_rate(const Variant& variant, const PrecisionConfig& p);

/// Weights multiplied by one activation in a 160-column BRAMAC array.
int bramac_weights_per_array(int precision_bits);

EngineRate bramac_peak_rate(const ArchitectureProfile& profile, int precision_bits);
/// Rejects weight/activation precision mismatches.
EngineRate bramac_peak_rate(const ArchitectureProfile& profile, const PrecisionConfig& p);

EngineRate dsp_engine_rate(int dsp_blocks, const PrecisionConfig& p, const DspModel& dsp);

/// Per-block geometry the tile simulator needs: lane slots, MAC2 period, and
/// what a finished dot product costs.
struct BlockEngine {
  int n_w = 0;
  int n_i = 0;
  int period = 1;
  /// Cycles the DSP loses per readout (M4BRAM only).
  int dsp_stall_per_readout = 0;
  /// Cycles the engine itself spends on each readout (BRAMAC: both ports busy).
  int engine_cycles_per_readout = 0;
};

/// Engine geometry for a compute profile. `pumping` is ignored by BRAMAC
/// (1DA is always double-pumped, 2SA synchronous).
BlockEngine block_engine(const ArchitectureProfile& profile, Pumping pumping,
                         const PrecisionConfig& p, int n_i);

std::string arch_csv_table();

} // namespace m4bram
