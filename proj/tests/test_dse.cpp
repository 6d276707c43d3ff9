#include "doctest.h"

#include <cmath>

#include "m4bram/dse.hpp"
#include "m4bram/error.hpp"
#include "m4bram/networks.hpp"

using namespace m4bram;

namespace {

NetworkDesc tiny_net() {
  return {"tiny",
          {make_conv("c1", 3, 12, 10, 10, 3, 3, 1, 1), make_conv("c2", 12, 20, 10, 10, 3, 3, 2, 1),
           make_fc("fc", 500, 10)}};
}

FpgaTarget small_fpga() { return {"small", 2000, 24, 160, 55.0, 15.0, 30.0}; }

EngineSetup setup(ArchKind arch, Pumping pump, int w, int a) {
  EngineSetup s;
  s.arch = arch;
  s.pumping = pump;
  s.precision = make_precision(w, a);
  return s;
}

// Plain enumeration of the documented candidate space.
double brute_force_best(const NetworkDesc& net, const FpgaTarget& target, const EngineSetup& s,
                        const SearchOptions& o) {
  const ArchitectureProfile& arch = profile(s.arch);
  std::vector<int> nis = arch.is_bramac() ? arch.n_i_options : o.n_i_allowed;
  if (!arch.computes()) {
    nis = {1};
  }
  double best = 0;
  for (int k = 1; k <= 32; k *= 2)
    for (int c = 1; c <= 16; c *= 2)
      for (int r = 1; r <= 4; r *= 2)
        for (int p = 1; p <= 16; p *= 2)
          for (int q = 1; q <= 16; q *= 2)
            for (int ni : nis) {
              TilingConfig t;
              t.k_vec = k;
              t.c_vec = c;
              t.r_vec = r;
              t.p_vec = p;
              t.q_vec = q;
              t.n_i = ni;
              std::vector<int> blocks{0};
              if (arch.computes()) {
                TilingConfig one = t;
                one.m4bram_blocks_used = 1;
                blocks.push_back(std::max(1, resource_usage(net, one, s, o.area).filter_blocks));
              }
              for (int b : blocks) {
                if (b == 0 && !s.use_dsp) {
                  continue;
                }
                t.m4bram_blocks_used = b;
                const ResourceUsage u = resource_usage(net, t, s, o.area);
                if (!u.fits(target)) {
                  continue;
                }
                const auto rep = simulate_network(net, t, s);
                const double perf = static_cast<double>(net.macs()) / rep.total_latency;
                best = std::max(best, objective(perf, u.area));
              }
            }
  return best;
}

} // namespace

TEST_CASE("area model anchors") {
  const FpgaTarget g4 = FpgaTarget::gx400();
  const FpgaTarget g6 = FpgaTarget::gx650();
  CHECK(cim_overhead_in_dsps(g6, ArchKind::M4BRAM_L) == doctest::Approx(640).epsilon(7.0 / 640));
  CHECK(std::abs(cim_overhead_in_dsps(g6, ArchKind::M4BRAM_L) - 640) <= 7);
  CHECK(std::abs(core_area_increase_percent(g4, ArchKind::M4BRAM_S) - 5.6) <= 0.2);
  CHECK(std::abs(core_area_increase_percent(g6, ArchKind::M4BRAM_L) - 9.5) <= 0.2);
  const AreaModel a4 = unit_areas(g4);
  const AreaModel a6 = unit_areas(g6);
  CHECK(a4.unit_m20k == 1.0);
  CHECK(a4.unit_dsp == doctest::Approx((15.7 / 648) / (28.7 / 1537)));
  CHECK(a4.unit_dsp == doctest::Approx(1.297).epsilon(0.001));
  CHECK(std::abs(a4.unit_dsp / a6.unit_dsp - 1.0) < 0.05);
  CHECK(a4.bram_block_area(ArchKind::M4BRAM_L) == doctest::Approx(1.334));
}

TEST_CASE("resource accounting is linear in DSP blocks") {
  const AreaModel a = unit_areas(FpgaTarget::gx650());
  EngineSetup s = setup(ArchKind::PlainBram, Pumping::Synchronous, 8, 8);
  TilingConfig t;
  t.k_vec = 8;
  t.c_vec = 4;
  const auto u1 = resource_usage(t, s, 2, a);
  t.c_vec = 5; // 8*5 multipliers need one more DSP block
  const auto u2 = resource_usage(t, s, 2, a);
  CHECK(u2.dsp_blocks == u1.dsp_blocks + 4);
  CHECK(u2.area - u1.area == doctest::Approx(4 * a.unit_dsp + (u2.bram_blocks - u1.bram_blocks)));
}

TEST_CASE("BRAMAC keeps separate filter storage") {
  const AreaModel a = unit_areas(FpgaTarget::gx650());
  TilingConfig t;
  t.k_vec = 16;
  t.c_vec = 16;
  t.m4bram_blocks_used = 32;
  const auto m4 = resource_usage(t, setup(ArchKind::M4BRAM_S, Pumping::DoublePumped, 8, 8), 4, a);
  const auto br = resource_usage(t, setup(ArchKind::BRAMAC_1DA, Pumping::DoublePumped, 8, 8), 4, a);
  CHECK(m4.bram_blocks == std::max(32, m4.filter_blocks) + 4);
  CHECK(br.bram_blocks == 32 + br.filter_blocks + 4);
}

TEST_CASE("objective") {
  CHECK(objective(2.0, 4.0) == 1.0);
  CHECK(objective(10.0, 5.0) == 20.0);
  CHECK_THROWS_AS(objective(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(objective(1.0, 0.0), ConfigError);
}

TEST_CASE("search agrees with brute-force enumeration") {
  const NetworkDesc net = tiny_net();
  const FpgaTarget target = small_fpga();
  SearchOptions o;
  o.area = unit_areas(target);
  for (const auto& s : {setup(ArchKind::PlainBram, Pumping::Synchronous, 8, 8),
                        setup(ArchKind::M4BRAM_S, Pumping::DoublePumped, 8, 5),
                        setup(ArchKind::M4BRAM_L, Pumping::Synchronous, 4, 6),
                        setup(ArchKind::BRAMAC_2SA, Pumping::Synchronous, 4, 4)}) {
    CAPTURE(profile(s.arch).name);
    const SearchResult r = search(net, target, s, o);
    CHECK(r.score == doctest::Approx(brute_force_best(net, target, s, o)).epsilon(1e-12));
    CHECK(r.usage.fits(target));
    CHECK(r.candidates_evaluated <= r.candidates_total);
    SearchOptions all = o;
    all.keep_candidates = true;
    const SearchResult full = search(net, target, s, all);
    CHECK(full.score == r.score);
    CHECK(full.tiling == r.tiling);
  }
}

TEST_CASE("wider n_i sets never lower the best score") {
  const NetworkDesc net = tiny_net();
  const FpgaTarget target = small_fpga();
  const auto s = setup(ArchKind::M4BRAM_S, Pumping::DoublePumped, 8, 8);
  double prev = 0;
  for (const auto& set : {std::vector<int>{1}, {1, 2}, {1, 2, 4}}) {
    SearchOptions o;
    o.area = unit_areas(target);
    o.n_i_allowed = set;
    const double score = search(net, target, s, o).score;
    CHECK(score >= prev);
    prev = score;
  }
  SearchOptions none;
  none.n_i_allowed = {};
  CHECK_THROWS_AS(search(net, target, s, none), InfeasibleError);
}

TEST_CASE("search reports infeasible targets") {
  FpgaTarget t = small_fpga();
  t.m20k_blocks = 1;
  CHECK_THROWS_AS(search(tiny_net(), t, setup(ArchKind::PlainBram, Pumping::Synchronous, 8, 8)),
                  InfeasibleError);
  FpgaTarget bad = small_fpga();
  bad.m20k_blocks = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("filter split and partitioned targets") {
  const auto [g8, g4] = split_filters(tiny_net(), 0.25);
  REQUIRE(g8.layers.size() == 3);
  CHECK(g8.layers[0].K == 3);
  CHECK(g4.layers[0].K == 9);
  CHECK(g8.layers[2].K + g4.layers[2].K == 10);
  const auto [a8, a4] = split_filters(tiny_net(), 0.01);
  CHECK(a8.layers.empty());
  CHECK(a4.layers.size() == 3);
  const FpgaTarget p = partition_target(FpgaTarget::gx400(), 0.25);
  CHECK(p.dsp_blocks == 162);
  CHECK(p.m20k_blocks == 384);
  CHECK(p.area_fraction_m20k == doctest::Approx(28.7 / 4));
  CHECK_THROWS_AS(split_filters(tiny_net(), 1.5), ConfigError);
  CHECK_THROWS_AS(partition_target(FpgaTarget::gx400(), 0.0), ConfigError);
}

TEST_CASE("mixed weights at R=0 and R=1 match the uniform runs") {
  const NetworkDesc net = tiny_net();
  const FpgaTarget target = small_fpga();
  EngineSetup base = setup(ArchKind::M4BRAM_L, Pumping::Synchronous, 8, 6);
  SearchOptions o;
  o.area = unit_areas(target);
  const Searcher searcher = [&](const NetworkDesc& n, const FpgaTarget& t, const EngineSetup& s) {
    return search(n, t, s, o);
  };
  const std::vector<double> fractions{0.25, 0.5, 0.75};
  for (int wb : {4, 8}) {
    EngineSetup u = base;
    u.precision.weight_bits = wb;
    const auto uniform = search(net, target, u, o).report.total_latency;
    const auto mixed =
        intra_layer_mixed_weights(net, wb == 8 ? 1.0 : 0.0, target, base, fractions, searcher);
    CHECK(mixed.report.total_latency == uniform);
  }
  const auto half = intra_layer_mixed_weights(net, 0.5, target, base, fractions, searcher);
  CHECK(half.report.total_macs == net.macs());
  CHECK(half.report.layers.size() == net.layers.size());
  CHECK(half.fraction_8bit > 0.0);
  CHECK_THROWS_AS(intra_layer_mixed_weights(net, 0.5, target, base, {1.0}, searcher), ConfigError);
}
