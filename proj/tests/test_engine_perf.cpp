#include "doctest.h"

#include "m4bram/engine_perf.hpp"
#include "m4bram/error.hpp"

using namespace m4bram;

namespace {
const Variant kSS{VariantKind::S, Pumping::Synchronous};
const Variant kSD{VariantKind::S, Pumping::DoublePumped};
const Variant kLS{VariantKind::L, Pumping::Synchronous};
} // namespace

TEST_CASE("MAC2 period") {
  CHECK(mac2_period(kSS, 8) == 10);
  CHECK(mac2_period(kSD, 8) == 6);
  CHECK(mac2_period(kSD, 5) == 5);
  for (int n = 2; n <= 8; ++n) {
    CHECK(mac2_period(kSS, n) - mac2_period(kSD, n) == n / 2);
    if (n > 2) {
      CHECK(mac2_period(kSS, n) > mac2_period(kSS, n - 1));
      CHECK(mac2_period(kSD, n) >= mac2_period(kSD, n - 1));
    }
  }
  CHECK_THROWS_AS(mac2_period(kSS, 1), PrecisionError);
}

TEST_CASE("M4BRAM peak rates") {
  CHECK(m4bram_peak_rate(kSD, make_precision(8, 8)).macs_per_cycle == Rational(4, 3));
  CHECK(m4bram_peak_rate({VariantKind::L, Pumping::Synchronous}, make_precision(2, 2))
            .macs_per_cycle == Rational(16));
  CHECK(m4bram_peak_rate(kSS, make_precision(8, 8)).macs_per_cycle == Rational(4, 5));
  CHECK(m4bram_peak_rate(kSS, make_precision(8, 8)).readout_stall_cycles == 4);
  CHECK(m4bram_peak_rate(kLS, make_precision(8, 8)).readout_stall_cycles == 8);
  for (int a = 2; a <= 8; ++a) {
    CHECK(m4bram_peak_rate(kLS, make_precision(4, a)).macs_per_cycle ==
          m4bram_peak_rate(kLS, make_precision(8, a)).macs_per_cycle * Rational(2));
  }
}

TEST_CASE("BRAMAC rates and the 1.25 peak ratio") {
  const auto& da = profile(ArchKind::BRAMAC_1DA);
  const auto& sa = profile(ArchKind::BRAMAC_2SA);
  CHECK(bramac_weights_per_array(8) == 5);
  CHECK(bramac_weights_per_array(4) == 10);
  CHECK(bramac_weights_per_array(2) == 20);
  CHECK(bramac_peak_rate(da, 8).macs_per_cycle == Rational(5, 3));
  CHECK(bramac_peak_rate(sa, 8).macs_per_cycle == Rational(2));
  CHECK(bramac_peak_rate(da, 8).macs_per_cycle /
            m4bram_peak_rate(kSD, make_precision(8, 8)).macs_per_cycle ==
        Rational(5, 4));
  CHECK_THROWS_AS(bramac_peak_rate(da, make_precision(8, 4)), UnsupportedProfileError);
  CHECK_THROWS_AS(bramac_peak_rate(da, 6), UnsupportedProfileError);
  CHECK_THROWS_AS(bramac_peak_rate(profile(ArchKind::M4BRAM_S), 8), UnsupportedProfileError);
}

TEST_CASE("DSP engine rate") {
  const DspModel intel = DspModel::intel();
  CHECK(dsp_engine_rate(0, make_precision(8, 8), intel).macs_per_cycle == Rational(0));
  CHECK(dsp_engine_rate(1, make_precision(8, 5), intel).macs_per_cycle == Rational(4));
  CHECK(dsp_engine_rate(648, make_precision(8, 8), intel).macs_per_cycle == Rational(1296));
  CHECK_THROWS_AS(dsp_engine_rate(-1, make_precision(8, 8), intel), ConfigError);
}

TEST_CASE("architecture table constants") {
  struct Row {
    ArchKind kind;
    int arrays, rows, cols, ports;
    double overhead;
    bool dsp_access, dp;
  };
  const Row expect[] = {
      {ArchKind::M4BRAM_S, 4, 7, 32, 1, 0.196, true, true},
      {ArchKind::M4BRAM_L, 4, 7, 64, 1, 0.334, true, true},
      {ArchKind::BRAMAC_1DA, 1, 7, 160, 2, 0.169, false, true},
      {ArchKind::BRAMAC_2SA, 2, 7, 160, 2, 0.338, false, false},
      {ArchKind::PlainBram, 0, 0, 0, 0, 0.0, true, false},
  };
  for (const Row& r : expect) {
    const auto& p = profile(r.kind);
    CAPTURE(p.name);
    CHECK(p.dummy_arrays == r.arrays);
    CHECK(p.dummy_rows == r.rows);
    CHECK(p.dummy_cols == r.cols);
    CHECK(p.ports_occupied_in_cim == r.ports);
    CHECK(p.m20k_area_overhead == r.overhead);
    CHECK(p.allows_dsp_access_during_cim == r.dsp_access);
    CHECK(p.supports_double_pumping == r.dp);
    CHECK(p.instantiable);
  }
  CHECK(profile(ArchKind::M4BRAM_S).n_i_options == std::vector<int>{1, 2, 4});
  CHECK(profile(ArchKind::BRAMAC_2SA).n_i_options == std::vector<int>{2});
  CHECK(architecture_table().size() == 8);
  CHECK_THROWS_AS(require_instantiable(profile(ArchKind::CCB)), UnsupportedProfileError);
  CHECK(arch_csv_table().find("M4BRAM-L,4,7,64,1|2|4,1,0.334") != std::string::npos);
}

TEST_CASE("block engine geometry") {
  const auto e = block_engine(profile(ArchKind::M4BRAM_L), Pumping::DoublePumped,
                              make_precision(4, 8), 2);
  CHECK(e.n_w == 8);
  CHECK(e.n_i == 2);
  CHECK(e.period == 6);
  CHECK(e.dsp_stall_per_readout == 8);
  const auto b = block_engine(profile(ArchKind::BRAMAC_2SA), Pumping::Synchronous,
                              make_precision(8, 8), 2);
  CHECK(b.n_w == 5);
  CHECK(b.period == 10);
  CHECK(b.engine_cycles_per_readout == 10);
  CHECK_THROWS_AS(block_engine(profile(ArchKind::BRAMAC_1DA), Pumping::DoublePumped,
                               make_precision(8, 8), 2),
                  UnsupportedProfileError);
  CHECK_THROWS_AS(block_engine(profile(ArchKind::M4BRAM_S), Pumping::Synchronous,
                               make_precision(8, 8), 3),
                  ConfigError);
}
