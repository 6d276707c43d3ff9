#pragma once

#include <cstdint>
#include <string>

#include "m4bram/precision.hpp"

namespace m4bram {

enum class Vendor { Intel, Xilinx };

/// One hard multiplier: signed A port, B port (unsigned when activations are
/// unsigned), signed P_C-bit result.
struct DspModel {
  std::string name = "intel";
  int op_a_bits = 18;
  int op_b_bits = 18;
  int result_bits = 37;
  int multipliers_per_block = 2;
  int guard_bits = 0;

  void validate() const;

  static DspModel intel(int guard_bits = 0);
  static DspModel xilinx(int guard_bits = 0);
};

/// Field layout chosen for a packing. Weights go to port A and activations to
/// port B. In the default layout weights sit at `spacing` and activations at
/// m*spacing; transposed puts activations at `spacing` and weights at n*spacing.
struct PackingLayout {
  int m = 1;
  int n = 1;
  int spacing = 0;
  bool transposed = false;

  [[nodiscard]] int factor() const { return m * n; }
  [[nodiscard]] int weight_stride() const { return transposed ? n * spacing : spacing; }
  [[nodiscard]] int act_stride() const { return transposed ? spacing : m * spacing; }
};

/// Largest m*n packing that fits the ports exactly. Ties prefer more
/// activations per multiply (larger n), then the default layout.
PackingLayout best_packing(const PrecisionConfig& p, const DspModel& dsp);

/// True when the layout fits the port and result ranges for all operand values.
bool packing_fits(const PrecisionConfig& p, const PackingLayout& layout, const DspModel& dsp);

int packing_factor(const PrecisionConfig& p, const DspModel& dsp);

double dsp_utilization(const PrecisionConfig& p, const DspModel& dsp);

/// Bit-level oracle. Packs operands, truncates them to the port widths,
/// multiplies, truncates to P_C, and extracts every field with sign correction.
/// Exhaustive when m*P_W + n*P_I <= 24 bits, otherwise `trials` seeded samples.
bool verify_packing(const PrecisionConfig& p, const PackingLayout& layout, const DspModel& dsp,
                    std::uint64_t seed = 1, long trials = 1'000'000);

/// Default-layout convenience form.
bool verify_packing(const PrecisionConfig& p, int m, int n, const DspModel& dsp,
                    std::uint64_t seed = 1, long trials = 1'000'000);

} // namespace m4bram
