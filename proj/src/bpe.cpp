#include "m4bram/bpe.hpp"

#include <sstream>

#include "m4bram/error.hpp"

namespace m4bram {

std::string to_string(PartialRow r) {
  switch (r) {
  case PartialRow::Zero:
    return "zero";
  case PartialRow::W1:
    return "w1";
  case PartialRow::W2:
    return "w2";
  case PartialRow::W1W2:
    return "w1+w2";
  }
  return "?";
}

std::string to_string(const TraceEntry& e) {
  std::ostringstream os;
  os << '(' << e.t << ", " << to_string(e.row) << (e.inverted ? " inv" : "") << ", " << e.shift
     << ')';
  return os.str();
}

std::int64_t sign_extend(std::uint64_t raw, int bits) {
  const std::uint64_t mask = bits >= 64 ? ~0ull : (1ull << bits) - 1;
  raw &= mask;
  if (bits < 64 && (raw >> (bits - 1)) & 1ull) {
    raw |= ~mask;
  }
  return static_cast<std::int64_t>(raw);
}

std::int64_t wrap_to_width(std::int64_t v, int bits) {
  return sign_extend(static_cast<std::uint64_t>(v), bits);
}

void check_activation(std::int64_t value, int act_bits, bool act_signed) {
  validate_act_bits(act_bits);
  const std::int64_t lo = act_signed ? -(std::int64_t{1} << (act_bits - 1)) : 0;
  const std::int64_t hi =
      act_signed ? (std::int64_t{1} << (act_bits - 1)) - 1 : (std::int64_t{1} << act_bits) - 1;
  if (value < lo || value > hi) {
    throw RangeError("activation " + std::to_string(value) + " not representable in " +
                     std::to_string(act_bits) + (act_signed ? " signed" : " unsigned") +
                     " bits");
  }
}

Bpe::Bpe(Variant variant, int weight_bits, AccumulatorMode mode)
    : variant_(variant), weight_bits_(weight_bits), lanes_(lanes_per_bpe(variant, weight_bits)),
      acc_width_(variant.dummy_cols() / lanes_), mode_(mode) {
  for (auto* r : {&row_zero_, &row_w1_, &row_w2_, &row_w1w2_, &row_inv_, &row_acc_}) {
    r->assign(lanes_, 0);
  }
}

void Bpe::load_weights(std::uint32_t w1_slice, std::uint32_t w2_slice, int slice_width) {
  if (slice_width != variant_.slice_bits()) {
    throw GeometryError("weight slice is " + std::to_string(slice_width) + " bits, BPE expects " +
                        std::to_string(variant_.slice_bits()));
  }
  const std::uint32_t limit = 1u << slice_width;
  if (w1_slice >= limit || w2_slice >= limit) {
    throw GeometryError("weight slice has bits beyond its width");
  }
  for (int l = 0; l < lanes_; ++l) {
    const int shift = l * weight_bits_;
    row_zero_[l] = 0;
    row_w1_[l] = sign_extend(w1_slice >> shift, weight_bits_);
    row_w2_[l] = sign_extend(w2_slice >> shift, weight_bits_);
    row_w1w2_[l] = row_w1_[l] + row_w2_[l];
    row_inv_[l] = 0;
  }
  loaded_ = true;
}

void Bpe::clear_accumulator() { row_acc_.assign(lanes_, 0); }

void Bpe::check_ready(std::int64_t i1, std::int64_t i2, int act_bits, bool act_signed) const {
  check_activation(i1, act_bits, act_signed);
  check_activation(i2, act_bits, act_signed);
  if (!loaded_) {
    throw StateError("MAC2 issued before weights were loaded");
  }
}

Mac2Result Bpe::commit(const std::vector<std::int64_t>& products, bool accumulate) {
  Mac2Result out;
  out.values.resize(lanes_);
  out.overflowed.assign(lanes_, false);
  for (int l = 0; l < lanes_; ++l) {
    const std::int64_t exact = (accumulate ? row_acc_[l] : 0) + products[l];
    if (mode_ == AccumulatorMode::Faithful) {
      row_acc_[l] = wrap_to_width(exact, acc_width_);
      out.overflowed[l] = row_acc_[l] != exact;
    } else {
      row_acc_[l] = exact;
    }
    out.values[l] = row_acc_[l];
  }
  return out;
}

Mac2Result Bpe::mac2(std::int64_t i1, std::int64_t i2, int act_bits, bool act_signed,
                     bool accumulate) {
  check_ready(i1, i2, act_bits, act_signed);
  std::vector<std::int64_t> products(lanes_);
  for (int l = 0; l < lanes_; ++l) {
    products[l] = row_w1_[l] * i1 + row_w2_[l] * i2;
  }
  return commit(products, accumulate);
}

const std::vector<std::int64_t>& Bpe::row(PartialRow r) const {
  switch (r) {
  case PartialRow::W1:
    return row_w1_;
  case PartialRow::W2:
    return row_w2_;
  case PartialRow::W1W2:
    return row_w1w2_;
  case PartialRow::Zero:
    break;
  }
  return row_zero_;
}

Mac2Trace Bpe::mac2_rowwise(std::int64_t i1, std::int64_t i2, int act_bits, bool act_signed,
                            bool accumulate) {
  check_ready(i1, i2, act_bits, act_signed);
  const auto u1 = static_cast<std::uint64_t>(i1);
  const auto u2 = static_cast<std::uint64_t>(i2);
  std::vector<std::int64_t> p(lanes_, 0);
  Mac2Trace out;
  out.trace.reserve(act_bits);
  for (int t = 0; t < act_bits; ++t) {
    const unsigned sel = ((u1 >> t) & 1u) | (((u2 >> t) & 1u) << 1);
    const auto r = static_cast<PartialRow>(sel);
    const bool msb_negative = act_signed && t == act_bits - 1;
    const auto& src = row(r);
    for (int l = 0; l < lanes_; ++l) {
      std::int64_t partial = src[l];
      if (msb_negative) {
        row_inv_[l] = -partial;
        partial = row_inv_[l];
      }
      p[l] += partial * (std::int64_t{1} << t);
    }
    out.trace.push_back({t, r, t, msb_negative});
  }
  out.result = commit(p, accumulate);
  return out;
}

std::uint64_t Bpe::accumulator_image() const {
  std::uint64_t image = 0;
  const std::uint64_t mask = acc_width_ >= 64 ? ~0ull : (1ull << acc_width_) - 1;
  for (int l = 0; l < lanes_; ++l) {
    image |= (static_cast<std::uint64_t>(row_acc_[l]) & mask) << (l * acc_width_);
  }
  return image;
}

} // namespace m4bram
