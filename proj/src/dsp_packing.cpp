#include "m4bram/dsp_packing.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <tuple>
#include <random>
#include <vector>

#include "m4bram/error.hpp"

namespace m4bram {

namespace {

using i128 = __int128;

constexpr int kMaxFields = 16;

i128 pow2(int k) { return static_cast<i128>(1) << k; }

struct Range {
  i128 lo;
  i128 hi;
};

Range weight_range(int bits) { return {-pow2(bits - 1), pow2(bits - 1) - 1}; }

Range act_range(int bits, bool is_signed) {
  if (is_signed) {
    return {-pow2(bits - 1), pow2(bits - 1) - 1};
  }
  return {0, pow2(bits) - 1};
}

bool within_signed(const Range& r, int bits) {
  return r.lo >= -pow2(bits - 1) && r.hi <= pow2(bits - 1) - 1;
}

bool within_unsigned(const Range& r, int bits) { return r.lo >= 0 && r.hi <= pow2(bits) - 1; }

Range packed_range(Range field, int count, int stride) {
  Range r{0, 0};
  for (int i = 0; i < count; ++i) {
    r.lo += field.lo * pow2(i * stride);
    r.hi += field.hi * pow2(i * stride);
  }
  return r;
}

void check_operand_widths(const PrecisionConfig& p, const DspModel& dsp) {
  dsp.validate();
  if (p.weight_bits < 1 || p.act_bits < 1) {
    throw PrecisionError("operand widths must be positive");
  }
}

} // namespace

void DspModel::validate() const {
  if (op_a_bits < 8 || op_b_bits < 8) {
    throw ConfigError("DSP operand ports must be at least 8 bits");
  }
  if (result_bits < op_a_bits + op_b_bits) {
    throw ConfigError("DSP result width must cover the full product");
  }
  if (guard_bits < 0) {
    throw ConfigError("guard bits must be non-negative");
  }
  if (multipliers_per_block < 1) {
    throw ConfigError("a DSP block needs at least one multiplier");
  }
}

DspModel DspModel::intel(int guard_bits) { return {"intel", 18, 18, 37, 2, guard_bits}; }

DspModel DspModel::xilinx(int guard_bits) { return {"xilinx", 25, 18, 48, 1, guard_bits}; }

bool packing_fits(const PrecisionConfig& p, const PackingLayout& layout, const DspModel& dsp) {
  if (layout.m < 1 || layout.n < 1) {
    return false;
  }
  const int field = p.weight_bits + p.act_bits;
  if (layout.factor() > 1 && layout.spacing < field) {
    return false;
  }
  const int ws = layout.weight_stride();
  const int as = layout.act_stride();
  if ((layout.m - 1) * ws > 100 || (layout.n - 1) * as > 100) {
    return false;
  }
  const Range a = packed_range(weight_range(p.weight_bits), layout.m, ws);
  const Range b = packed_range(act_range(p.act_bits, p.act_signed), layout.n, as);
  if (!within_signed(a, dsp.op_a_bits)) {
    return false;
  }
  if (p.act_signed ? !within_signed(b, dsp.op_b_bits) : !within_unsigned(b, dsp.op_b_bits)) {
    return false;
  }
  const std::array<i128, 4> corners{a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  const Range prod{*std::min_element(corners.begin(), corners.end()),
                   *std::max_element(corners.begin(), corners.end())};
  return within_signed(prod, dsp.result_bits);
}

namespace {

PackingLayout search_packing(const PrecisionConfig& p, const DspModel& dsp) {
  const int spacing = p.weight_bits + p.act_bits + dsp.guard_bits;
  PackingLayout best{1, 1, spacing, false};
  if (!packing_fits(p, best, dsp)) {
    throw PrecisionError("operands of " + std::to_string(p.weight_bits) + "x" +
                         std::to_string(p.act_bits) + " bits do not fit the " + dsp.name +
                         " multiplier");
  }
  for (int m = 1; m <= kMaxFields; ++m) {
    for (int n = 1; m * n <= kMaxFields; ++n) {
      for (bool transposed : {false, true}) {
        const PackingLayout cand{m, n, spacing, transposed};
        if (!packing_fits(p, cand, dsp)) {
          continue;
        }
        const bool better = cand.factor() > best.factor() ||
                            (cand.factor() == best.factor() && cand.n > best.n);
        if (better) {
          best = cand;
        }
      }
    }
  }
  return best;
}

} // namespace

PackingLayout best_packing(const PrecisionConfig& p, const DspModel& dsp) {
  check_operand_widths(p, dsp);
  using Key = std::tuple<int, int, bool, int, int, int, int>;
  static std::mutex mu;
  static std::map<Key, PackingLayout> cache;
  const Key key{p.weight_bits, p.act_bits,      p.act_signed,   dsp.op_a_bits,
                dsp.op_b_bits, dsp.result_bits, dsp.guard_bits};
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) {
      return it->second;
    }
  }
  const PackingLayout best = search_packing(p, dsp);
  std::lock_guard lock(mu);
  cache.emplace(key, best);
  return best;
}

int packing_factor(const PrecisionConfig& p, const DspModel& dsp) {
  return best_packing(p, dsp).factor();
}

double dsp_utilization(const PrecisionConfig& p, const DspModel& dsp) {
  const int n = packing_factor(p, dsp);
  return static_cast<double>(n) * p.weight_bits * p.act_bits /
         (static_cast<double>(dsp.op_a_bits) * dsp.op_b_bits);
}

namespace {

i128 wrap_signed(i128 v, int bits) {
  const i128 mod = pow2(bits);
  i128 r = v % mod;
  if (r < 0) {
    r += mod;
  }
  return r >= pow2(bits - 1) ? r - mod : r;
}

i128 wrap_unsigned(i128 v, int bits) {
  const i128 mod = pow2(bits);
  i128 r = v % mod;
  return r < 0 ? r + mod : r;
}

struct FieldSlot {
  int pos;
  int wi;
  int aj;
};

class PackingOracle {
public:
  PackingOracle(const PrecisionConfig& p, const PackingLayout& layout, const DspModel& dsp)
      : p_(p), layout_(layout), dsp_(dsp) {
    for (int i = 0; i < layout.m; ++i) {
      for (int j = 0; j < layout.n; ++j) {
        slots_.push_back({i * layout.weight_stride() + j * layout.act_stride(), i, j});
      }
    }
    std::sort(slots_.begin(), slots_.end(),
              [](const FieldSlot& x, const FieldSlot& y) { return x.pos < y.pos; });
    for (std::size_t k = 1; k < slots_.size(); ++k) {
      if (slots_[k].pos == slots_[k - 1].pos) {
        overlapping_ = true;
      }
    }
  }

  [[nodiscard]] bool overlapping() const { return overlapping_; }

  bool check(const std::vector<i128>& w, const std::vector<i128>& a) const {
    i128 pa = 0;
    for (int i = 0; i < layout_.m; ++i) {
      pa += w[i] * pow2(i * layout_.weight_stride());
    }
    i128 pb = 0;
    for (int j = 0; j < layout_.n; ++j) {
      pb += a[j] * pow2(j * layout_.act_stride());
    }
    pa = wrap_signed(pa, dsp_.op_a_bits);
    pb = p_.act_signed ? wrap_signed(pb, dsp_.op_b_bits) : wrap_unsigned(pb, dsp_.op_b_bits);
    i128 rest = wrap_signed(pa * pb, dsp_.result_bits);

    int base = 0;
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      const FieldSlot& s = slots_[k];
      rest /= pow2(s.pos - base); // lower bits are already zero
      base = s.pos;
      const i128 expect = w[s.wi] * a[s.aj];
      i128 got;
      if (k + 1 < slots_.size()) {
        const int width = slots_[k + 1].pos - s.pos;
        got = wrap_signed(rest, width);
      } else {
        got = rest;
      }
      if (got != expect) {
        return false;
      }
      rest -= got;
    }
    return true;
  }

private:
  PrecisionConfig p_;
  PackingLayout layout_;
  DspModel dsp_;
  std::vector<FieldSlot> slots_;
  bool overlapping_ = false;
};

} // namespace

bool verify_packing(const PrecisionConfig& p, const PackingLayout& layout, const DspModel& dsp,
                    std::uint64_t seed, long trials) {
  if (layout.m < 1 || layout.n < 1) {
    throw ConfigError("packing counts must be at least 1");
  }
  const PackingOracle oracle(p, layout, dsp);
  if (oracle.overlapping()) {
    return false;
  }
  const Range wr = weight_range(p.weight_bits);
  const Range ar = act_range(p.act_bits, p.act_signed);
  std::vector<i128> w(layout.m);
  std::vector<i128> a(layout.n);

  const int entropy = layout.m * p.weight_bits + layout.n * p.act_bits;
  if (entropy <= 24) {
    const std::uint64_t total = std::uint64_t{1} << entropy;
    for (std::uint64_t code = 0; code < total; ++code) {
      std::uint64_t c = code;
      for (auto& x : w) {
        x = wr.lo + static_cast<i128>(c & ((1u << p.weight_bits) - 1));
        c >>= p.weight_bits;
      }
      for (auto& x : a) {
        x = ar.lo + static_cast<i128>(c & ((1u << p.act_bits) - 1));
        c >>= p.act_bits;
      }
      if (!oracle.check(w, a)) {
        return false;
      }
    }
    return true;
  }

  // Extremes first: overflow shows up at the range corners.
  const int fields = layout.m + layout.n;
  if (fields < 20) {
    for (std::uint32_t mask = 0; mask < (1u << fields); ++mask) {
      for (int i = 0; i < layout.m; ++i) {
        w[i] = (mask >> i) & 1u ? wr.hi : wr.lo;
      }
      for (int j = 0; j < layout.n; ++j) {
        a[j] = (mask >> (layout.m + j)) & 1u ? ar.hi : ar.lo;
      }
      if (!oracle.check(w, a)) {
        return false;
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> wd(static_cast<std::int64_t>(wr.lo),
                                                 static_cast<std::int64_t>(wr.hi));
  std::uniform_int_distribution<std::int64_t> ad(static_cast<std::int64_t>(ar.lo),
                                                 static_cast<std::int64_t>(ar.hi));
  for (long t = 0; t < trials; ++t) {
    for (auto& x : w) {
      x = wd(rng);
    }
    for (auto& x : a) {
      x = ad(rng);
    }
    if (!oracle.check(w, a)) {
      return false;
    }
  }
  return true;
}

bool verify_packing(const PrecisionConfig& p, int m, int n, const DspModel& dsp,
                    std::uint64_t seed, long trials) {
  const PackingLayout layout{m, n, p.weight_bits + p.act_bits + dsp.guard_bits, false};
  return verify_packing(p, layout, dsp, seed, trials);
}

} // namespace m4bram
