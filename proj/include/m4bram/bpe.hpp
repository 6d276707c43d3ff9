#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "m4bram/precision.hpp"

namespace m4bram {

enum class AccumulatorMode { Wide, Faithful };

enum class PartialRow { Zero, W1, W2, W1W2 };

std::string to_string(PartialRow r);

struct Mac2Result {
  std::vector<std::int64_t> values; ///< accumulator contents after the operation
  std::vector<bool> overflowed;
};

/// One bit position of a row-wise MAC2.
struct TraceEntry {
  int t = 0;
  PartialRow row = PartialRow::Zero;
  int shift = 0;
  bool inverted = false; ///< partial sum went through the INV row (signed MSB)
};

std::string to_string(const TraceEntry& e);

struct Mac2Trace {
  Mac2Result result;
  std::vector<TraceEntry> trace;
};

/// One in-BRAM processing element. Lane 0 is the least-significant weight
/// field of a slice.
class Bpe {
public:
  Bpe(Variant variant, int weight_bits, AccumulatorMode mode = AccumulatorMode::Wide);

  /// Slices are `slice_width` bits wide: 8 for S, 16 for L.
  void load_weights(std::uint32_t w1_slice, std::uint32_t w2_slice, int slice_width);

  Mac2Result mac2(std::int64_t i1, std::int64_t i2, int act_bits, bool act_signed,
                  bool accumulate);
  Mac2Trace mac2_rowwise(std::int64_t i1, std::int64_t i2, int act_bits, bool act_signed,
                         bool accumulate);

  void clear_accumulator();

  [[nodiscard]] const Variant& variant() const { return variant_; }
  [[nodiscard]] int weight_bits() const { return weight_bits_; }
  [[nodiscard]] int lanes() const { return lanes_; }
  [[nodiscard]] int acc_width_bits() const { return acc_width_; }
  [[nodiscard]] AccumulatorMode mode() const { return mode_; }
  [[nodiscard]] bool loaded() const { return loaded_; }

  [[nodiscard]] const std::vector<std::int64_t>& row_zero() const { return row_zero_; }
  [[nodiscard]] const std::vector<std::int64_t>& row_w1() const { return row_w1_; }
  [[nodiscard]] const std::vector<std::int64_t>& row_w2() const { return row_w2_; }
  [[nodiscard]] const std::vector<std::int64_t>& row_w1w2() const { return row_w1w2_; }
  [[nodiscard]] const std::vector<std::int64_t>& row_inv() const { return row_inv_; }
  [[nodiscard]] const std::vector<std::int64_t>& row_acc() const { return row_acc_; }

  /// Accumulator row as stored in the dummy array: lanes packed low to high,
  /// each wrapped to acc_width_bits. 32 bits for S, 64 for L.
  [[nodiscard]] std::uint64_t accumulator_image() const;

private:
  const std::vector<std::int64_t>& row(PartialRow r) const;
  Mac2Result commit(const std::vector<std::int64_t>& products, bool accumulate);
  void check_ready(std::int64_t i1, std::int64_t i2, int act_bits, bool act_signed) const;

  Variant variant_;
  int weight_bits_;
  int lanes_;
  int acc_width_;
  AccumulatorMode mode_;
  bool loaded_ = false;
  std::vector<std::int64_t> row_zero_, row_w1_, row_w2_, row_w1w2_, row_inv_, row_acc_;
};

/// Two's-complement range check for an activation operand.
void check_activation(std::int64_t value, int act_bits, bool act_signed);

/// Sign-extends the low `bits` of `raw`.
std::int64_t sign_extend(std::uint64_t raw, int bits);

/// Wraps `v` to a `bits`-wide two's-complement value.
std::int64_t wrap_to_width(std::int64_t v, int bits);

} // namespace m4bram
