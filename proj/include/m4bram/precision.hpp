#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace m4bram {

/// Weight/activation precision pair that every model is parameterized by.
/// Activations default to unsigned (post-ReLU feature maps).
struct PrecisionConfig {
  int weight_bits = 8;
  int act_bits = 8;
  bool act_signed = false;

  /// Throws PrecisionError unless weight_bits is 2, 4 or 8 and act_bits is 2..8.
  void validate() const;

  friend bool operator==(const PrecisionConfig&, const PrecisionConfig&) = default;
};

/// Convenience constructor that validates.
PrecisionConfig make_precision(int weight_bits, int act_bits, bool act_signed = false);

enum class VariantKind { S, L };
enum class Pumping { Synchronous, DoublePumped };

/// M4BRAM flavour: dummy-array size (S = 7x32, L = 7x64) and BPE clocking.
struct Variant {
  VariantKind kind = VariantKind::S;
  Pumping pumping = Pumping::Synchronous;

  [[nodiscard]] int dummy_rows() const { return 7; }
  [[nodiscard]] int dummy_cols() const { return kind == VariantKind::S ? 32 : 64; }
  /// Width of the weight slice each BPE receives from the shuffler.
  [[nodiscard]] int slice_bits() const { return kind == VariantKind::S ? 8 : 16; }
  /// Accumulator row images read out per block (one 32-bit word each).
  [[nodiscard]] int readout_words() const { return kind == VariantKind::S ? 4 : 8; }

  friend bool operator==(const Variant&, const Variant&) = default;
};

std::string to_string(const Variant& v);

/// (N_W, N_I): weights sharing one activation, activations sharing one weight.
struct ParallelismConfig {
  int n_w = 1;
  int n_i = 1;

  friend bool operator==(const ParallelismConfig&, const ParallelismConfig&) = default;
};

/// Weight lanes per BPE: 8/weight_bits for S, 16/weight_bits for L.
int lanes_per_bpe(const Variant& variant, int weight_bits);

/// The three duplication settings {(4L,1), (2L,2), (L,4)}, ascending n_i.
std::vector<ParallelismConfig> parallelism_options(const Variant& variant, int weight_bits);

void validate_weight_bits(int weight_bits);
void validate_act_bits(int act_bits);

} // namespace m4bram
