#include "doctest.h"

#include <algorithm>
#include <cstdint>

#include "m4bram/dsp_packing.hpp"
#include "m4bram/error.hpp"

using namespace m4bram;

namespace {

using i128 = __int128;

// Signed range that a field of `bits` bits represents.
bool fits_signed(i128 v, int bits) {
  const i128 lim = i128{1} << (bits - 1);
  return v >= -lim && v < lim;
}

struct Range {
  i128 lo, hi;
};

// Oracle for one layout: weights at stride ws, activations at stride as.
// Checks ports and result against the exact extremes of the packed values,
// and that every product fits its field.
bool oracle_fits(int pw, int pi, bool act_signed, int m, int n, int ws, int as, int s,
                 const DspModel& d) {
  if (m * n * s > d.result_bits + s || (m - 1) * ws + pw > d.op_a_bits ||
      (n - 1) * as + pi > d.op_b_bits + 1) {
    return false; // some field already sits past a port or the result
  }
  const Range w{-(i128{1} << (pw - 1)), (i128{1} << (pw - 1)) - 1};
  const Range a = act_signed ? Range{-(i128{1} << (pi - 1)), (i128{1} << (pi - 1)) - 1}
                             : Range{0, (i128{1} << pi) - 1};
  const i128 plo = std::min({w.lo * a.lo, w.lo * a.hi, w.hi * a.lo, w.hi * a.hi});
  const i128 phi = std::max({w.lo * a.lo, w.lo * a.hi, w.hi * a.lo, w.hi * a.hi});
  if (!fits_signed(plo, s) || !fits_signed(phi, s)) {
    return false;
  }
  i128 alo = 0, ahi = 0, blo = 0, bhi = 0, rlo = 0, rhi = 0;
  for (int i = 0; i < m; ++i) {
    alo += w.lo << (i * ws);
    ahi += w.hi << (i * ws);
  }
  for (int j = 0; j < n; ++j) {
    blo += a.lo << (j * as);
    bhi += a.hi << (j * as);
  }
  for (int k = 0; k < m * n; ++k) {
    rlo += plo << (k * s);
    rhi += phi << (k * s);
  }
  const bool a_ok = fits_signed(alo, d.op_a_bits) && fits_signed(ahi, d.op_a_bits);
  const bool b_ok = act_signed ? fits_signed(blo, d.op_b_bits) && fits_signed(bhi, d.op_b_bits)
                               : bhi < (i128{1} << d.op_b_bits);
  return a_ok && b_ok && fits_signed(rlo, d.result_bits) && fits_signed(rhi, d.result_bits);
}

int oracle_factor(int pw, int pi, bool act_signed, const DspModel& d) {
  int best = 1;
  for (int m = 1; m <= 18; ++m) {
    for (int n = 1; n <= 18; ++n) {
      for (int s = 2; s <= 37; ++s) {
        if (m * n > best && (oracle_fits(pw, pi, act_signed, m, n, s, m * s, s, d) ||
                              oracle_fits(pw, pi, act_signed, m, n, n * s, s, s, d))) {
          best = m * n;
        }
      }
    }
  }
  return best;
}

} // namespace

TEST_CASE("packing cliff at 5 to 6 bit activations") {
  const DspModel intel = DspModel::intel();
  CHECK(packing_factor(make_precision(8, 5), intel) == 2);
  CHECK(packing_factor(make_precision(8, 6), intel) == 1);
  CHECK(packing_factor(make_precision(8, 5), intel) ==
        2 * packing_factor(make_precision(8, 6), intel));
}

TEST_CASE("packing factor matches brute-force range oracle") {
  for (const DspModel& d : {DspModel::intel(), DspModel::xilinx()}) {
    for (bool sgn : {false, true}) {
      for (int w : {2, 4, 8}) {
        for (int a = 2; a <= 8; ++a) {
          CAPTURE(d.name);
          CAPTURE(sgn);
          CAPTURE(w);
          CAPTURE(a);
          CHECK(packing_factor(make_precision(w, a, sgn), d) == oracle_factor(w, a, sgn, d));
        }
      }
    }
  }
}

TEST_CASE("chosen packings pass the bit-level check") {
  const DspModel intel = DspModel::intel();
  for (bool sgn : {false, true}) {
    for (int w : {2, 4, 8}) {
      for (int a = 2; a <= 8; ++a) {
        const auto p = make_precision(w, a, sgn);
        const auto layout = best_packing(p, intel);
        CHECK(packing_fits(p, layout, intel));
        CHECK(verify_packing(p, layout, intel, 7, 20000));
      }
    }
  }
}

TEST_CASE("bit-level check rejects an overlapping layout") {
  const DspModel intel = DspModel::intel();
  const auto p = make_precision(8, 5);
  PackingLayout tight{1, 2, 12, false}; // products need 13 bits
  CHECK_FALSE(packing_fits(p, tight, intel));
  CHECK_FALSE(verify_packing(p, tight, intel, 3, 20000));
}

TEST_CASE("guard bits never raise the factor") {
  for (int a = 2; a <= 8; ++a) {
    const auto p = make_precision(4, a);
    CHECK(packing_factor(p, DspModel::intel(2)) <= packing_factor(p, DspModel::intel()));
  }
}
