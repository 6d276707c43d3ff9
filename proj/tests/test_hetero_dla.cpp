#include "doctest.h"

#include <map>
#include <tuple>

#include "m4bram/error.hpp"
#include "m4bram/hetero_dla.hpp"
#include "m4bram/networks.hpp"

using namespace m4bram;

namespace {

EngineSetup setup_for(ArchKind arch, Pumping pump, int w, int a) {
  EngineSetup s;
  s.arch = arch;
  s.pumping = pump;
  s.precision = make_precision(w, a);
  return s;
}

TilingConfig tiling(int k, int c, int r, int p, int q, int ni = 1, int blocks = 0) {
  TilingConfig t;
  t.k_vec = k;
  t.c_vec = c;
  t.r_vec = r;
  t.p_vec = p;
  t.q_vec = q;
  t.n_i = ni;
  t.m4bram_blocks_used = blocks;
  return t;
}

} // namespace

TEST_CASE("tiles cover every output-reduction point exactly once") {
  const LayerShape l = make_conv("c", 5, 7, 9, 11, 3, 3, 1, 1);
  const TilingConfig t = tiling(4, 2, 2, 4, 3);
  std::map<std::tuple<int, int, int, int, int, int>, int> seen;
  std::int64_t macs = 0;
  for (const Tile& tl : tile_layer(l, t)) {
    macs += tl.macs();
    for (int k = 0; k < tl.k; ++k)
      for (int c = 0; c < tl.c; ++c)
        for (int p = 0; p < tl.p; ++p)
          for (int q = 0; q < tl.q; ++q)
            for (int r = 0; r < tl.r; ++r)
              for (int s = 0; s < tl.s; ++s)
                ++seen[{tl.k0 + k, tl.c0 + c, tl.p0 + p, tl.q0 + q, tl.r0 + r, tl.s0 + s}];
  }
  CHECK(macs == l.macs());
  CHECK(static_cast<std::int64_t>(seen.size()) == l.macs());
  for (const auto& [key, n] : seen) {
    CHECK(n == 1);
  }
  std::int64_t class_macs = 0, class_tiles = 0;
  for (const auto& tc : tile_classes(l, t)) {
    class_macs += tc.count * tc.macs();
    class_tiles += tc.count;
  }
  CHECK(class_macs == l.macs());
  CHECK(class_tiles == static_cast<std::int64_t>(tile_layer(l, t).size()));
}

TEST_CASE("q_split 0 reduces to the DSP-only tile model") {
  const LayerShape l = make_conv("c", 16, 24, 14, 14, 3, 3, 1, 1);
  for (int a : {4, 5, 8}) {
    EngineSetup s = setup_for(ArchKind::M4BRAM_L, Pumping::Synchronous, 8, a);
    TilingConfig t = tiling(8, 4, 2, 4, 4, 1, 16);
    t.q_split_bpe = 0.0;
    const LayerPerf lp = simulate_layer(l, t, s);
    const int n = packing_factor(s.precision, s.dsp);
    std::int64_t expect = 0;
    for (const Tile& tl : tile_layer(l, t)) {
      expect += std::int64_t{tl.r} * tl.s * ((tl.p * tl.q + n - 1) / n);
    }
    CHECK(lp.compute_cycles == expect);
    CHECK(lp.dsp_stall_cycles == 0);
    CHECK(lp.bpe_macs == 0);
    CHECK(lp.dsp_macs == l.macs());
  }
}

TEST_CASE("BPE-only utilization follows K over N_W") {
  // K=12 on N_W=8 lanes fills 12/16 of the slots
  const LayerShape l = make_conv("c", 8, 12, 8, 8, 1, 1, 1, 0);
  EngineSetup s = setup_for(ArchKind::M4BRAM_S, Pumping::Synchronous, 4, 8);
  s.use_dsp = false;
  const LayerPerf lp = simulate_layer(l, tiling(12, 8, 1, 8, 8, 1, 4), s);
  CHECK(lp.bpe_utilization == doctest::Approx(12.0 / 16.0));
  CHECK(lp.bpe_macs == l.macs());
}

TEST_CASE("zero readout stall never increases latency") {
  const NetworkDesc net = resnet18();
  for (ArchKind arch : {ArchKind::M4BRAM_S, ArchKind::M4BRAM_L}) {
    for (int a : {4, 6, 8}) {
      EngineSetup s = setup_for(arch, Pumping::DoublePumped, 8, a);
      const TilingConfig t = tiling(32, 16, 2, 4, 8, 2, 64);
      const auto with = simulate_network(net, t, s);
      s.readout_stall_override = 0;
      const auto without = simulate_network(net, t, s);
      CHECK(without.total_latency <= with.total_latency);
      CHECK(without.total_stall == 0);
      CHECK(with.stall_share() >= 0.0);
      CHECK(with.stall_share() < 1.0);
    }
  }
}

TEST_CASE("adding BPE blocks never hurts and BPE work is conserved") {
  const NetworkDesc net = alexnet();
  const EngineSetup s = setup_for(ArchKind::M4BRAM_L, Pumping::Synchronous, 8, 6);
  std::int64_t prev = 0;
  for (int blocks : {0, 8, 32, 128}) {
    const auto rep = simulate_network(net, tiling(32, 32, 2, 4, 8, 1, blocks), s);
    if (blocks > 0) {
      CHECK(rep.total_latency <= prev);
    }
    prev = rep.total_latency;
    CHECK(rep.total_macs == net.macs());
    for (const auto& l : rep.layers) {
      CHECK(l.bpe_macs + l.dsp_macs == l.macs);
    }
  }
}

TEST_CASE("lower bound does not exceed the simulated latency") {
  const NetworkDesc net = resnet18();
  const EngineSetup s = setup_for(ArchKind::M4BRAM_S, Pumping::DoublePumped, 8, 5);
  for (int blocks : {0, 16, 200}) {
    const TilingConfig t = tiling(64, 16, 2, 8, 8, 4, blocks);
    CHECK(latency_lower_bound(net, t, s) <= simulate_network(net, t, s).total_latency);
  }
}

TEST_CASE("hetero-dla configuration errors") {
  const LayerShape l = make_conv("c", 8, 8, 8, 8, 3, 3, 1, 1);
  EngineSetup s = setup_for(ArchKind::PlainBram, Pumping::Synchronous, 8, 8);
  s.use_dsp = false;
  CHECK_THROWS_AS(simulate_layer(l, tiling(8, 8, 1, 1, 1), s), ConfigError);
  EngineSetup d = setup_for(ArchKind::M4BRAM_S, Pumping::Synchronous, 8, 8);
  TilingConfig t = tiling(8, 8, 1, 1, 1, 1, 0);
  t.q_split_bpe = 0.5;
  CHECK_THROWS_AS(simulate_layer(l, t, d), ConfigError);
  CHECK_THROWS_AS(simulate_layer(l, tiling(0, 8, 1, 1, 1), d), ConfigError);
  EngineSetup c = setup_for(ArchKind::CoMeFa_A, Pumping::Synchronous, 8, 8);
  CHECK_THROWS_AS(simulate_layer(l, tiling(8, 8, 1, 1, 1), c), UnsupportedProfileError);
}

TEST_CASE("combine_parallel takes the slower group per layer") {
  PerfReport a{"a", {}, 0, 0, 0}, b{"b", {}, 0, 0, 0};
  LayerPerf x;
  x.latency = 10;
  x.macs = 5;
  LayerPerf y;
  y.latency = 7;
  y.macs = 3;
  a.layers = {x, y};
  b.layers = {y, x};
  const auto c = combine_parallel(a, b, "ab");
  CHECK(c.total_latency == 20);
  CHECK(c.total_macs == 16);
}
