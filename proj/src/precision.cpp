#include "m4bram/precision.hpp"

#include "m4bram/error.hpp"

namespace m4bram {

void validate_weight_bits(int weight_bits) {
  if (weight_bits != 2 && weight_bits != 4 && weight_bits != 8) {
    throw PrecisionError("weight precision must be 2, 4 or 8 bits, got " +
                         std::to_string(weight_bits));
  }
}

void validate_act_bits(int act_bits) {
  if (act_bits < 2 || act_bits > 8) {
    throw PrecisionError("activation precision must be 2..8 bits, got " +
                         std::to_string(act_bits));
  }
}

void PrecisionConfig::validate() const {
  validate_weight_bits(weight_bits);
  validate_act_bits(act_bits);
}

PrecisionConfig make_precision(int weight_bits, int act_bits, bool act_signed) {
  PrecisionConfig p{weight_bits, act_bits, act_signed};
  p.validate();
  return p;
}

std::string to_string(const Variant& v) {
  std::string s = v.pumping == Pumping::DoublePumped ? "DP-" : "SY-";
  s += v.kind == VariantKind::S ? "M4S" : "M4L";
  return s;
}

int lanes_per_bpe(const Variant& variant, int weight_bits) {
  validate_weight_bits(weight_bits);
  return variant.slice_bits() / weight_bits;
}

std::vector<ParallelismConfig> parallelism_options(const Variant& variant, int weight_bits) {
  const int lanes = lanes_per_bpe(variant, weight_bits);
  return {{4 * lanes, 1}, {2 * lanes, 2}, {lanes, 4}};
}

} // namespace m4bram
