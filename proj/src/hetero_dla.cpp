#include "m4bram/hetero_dla.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "m4bram/error.hpp"

namespace m4bram {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

struct Extent {
  int size;
  std::int64_t count;
};

std::vector<Extent> split_dim(int extent, int vec) {
  if (vec >= extent) {
    return {{extent, 1}};
  }
  std::vector<Extent> out{{vec, extent / vec}};
  if (extent % vec) {
    out.push_back({extent % vec, 1});
  }
  return out;
}

// Per-setup constants shared by every tile of a simulation.
struct Context {
  bool bpe_on = false;
  bool dsp_on = false;
  BlockEngine eng;
  int stall_per_readout = 0;
  int cap_mac2 = 1;
  int blocks = 0;
  int pack_m = 1;
  int pack_n = 1;
  std::int64_t dsp_lanes = 0; // products per cycle per pixel slot
  int wbits = 8;
  int abits = 8;
  double bw = 1;
  std::optional<double> split;
};

Context make_context(const TilingConfig& t, const EngineSetup& setup) {
  t.validate();
  setup.precision.validate();
  const ArchitectureProfile& arch = profile(setup.arch);
  require_instantiable(arch);
  Context ctx;
  ctx.wbits = setup.precision.weight_bits;
  ctx.abits = setup.precision.act_bits;
  ctx.bw = setup.mem.bytes_per_cycle;
  if (ctx.bw <= 0) {
    throw ConfigError("memory bandwidth must be positive");
  }
  ctx.blocks = t.m4bram_blocks_used;
  ctx.bpe_on = arch.computes() && t.m4bram_blocks_used > 0;
  if (ctx.bpe_on) {
    ctx.eng = block_engine(arch, setup.pumping, setup.precision, t.n_i);
    ctx.stall_per_readout = setup.readout_stall_override.value_or(ctx.eng.dsp_stall_per_readout);
    const int reserved = arch.is_m4bram() ? ctx.eng.dsp_stall_per_readout : 0;
    const int usable_bits = (512 - reserved) * 32;
    ctx.cap_mac2 = std::max(1, usable_bits / (2 * ctx.eng.n_w * ctx.wbits));
  }
  ctx.dsp_on = setup.use_dsp;
  if (ctx.dsp_on) {
    const PackingLayout pk = best_packing(setup.precision, setup.dsp);
    ctx.pack_m = pk.m;
    ctx.pack_n = pk.n;
    ctx.dsp_lanes = ceil_div(t.k_vec, pk.m) * pk.m * std::int64_t{t.c_vec} * pk.n;
  }
  if (!ctx.bpe_on && !ctx.dsp_on) {
    throw ConfigError("configuration has neither a BPE nor a DSP engine");
  }
  if (t.q_split_bpe) {
    const double f = *t.q_split_bpe;
    if (!(f >= 0.0 && f <= 1.0)) {
      throw ConfigError("q_split_bpe must lie in [0, 1]");
    }
    if ((f > 0.0 && !ctx.bpe_on) || (f < 1.0 && !ctx.dsp_on)) {
      throw ConfigError("q_split_bpe assigns columns to an engine that is absent");
    }
    ctx.split = f;
  }
  return ctx;
}

struct TileCost {
  std::int64_t compute = 0;
  std::int64_t bpe = 0;
  std::int64_t dsp = 0;
  std::int64_t stall = 0;
  std::int64_t bpe_macs = 0;
  double bpe_fill = 1.0;
};

// `red_tiles` is the number of reduction tiles (C and filter window) that feed
// one output tile. The BPE keeps accumulating across them, so a dot product
// completes, and is read out, once per output group rather than once per tile.
// Readout costs are spread evenly over the reduction tiles.
TileCost tile_cost(const Context& ctx, const TileClass& tc, int q_bpe, std::int64_t red_tiles) {
  TileCost out;
  const std::int64_t rs = std::int64_t{tc.r} * tc.s;
  const std::int64_t pix_b = std::int64_t{tc.p} * q_bpe;
  const std::int64_t pix_d = std::int64_t{tc.p} * (tc.q - q_bpe);
  if (pix_d > 0) {
    out.dsp = rs * ceil_div(pix_d, ctx.pack_n);
  }
  std::int64_t readouts = 0;
  if (pix_b > 0) {
    const BlockEngine& e = ctx.eng;
    const std::int64_t kg = ceil_div(tc.k, e.n_w);
    const std::int64_t pg = ceil_div(pix_b, e.n_i);
    const std::int64_t red = ceil_div(std::int64_t{tc.c} * rs, 2);
    std::int64_t cs = 1;
    std::int64_t passes = 1;
    if (ctx.blocks >= kg) {
      cs = std::min<std::int64_t>(ctx.blocks / kg, red);
    } else {
      passes = ceil_div(kg, ctx.blocks);
    }
    const std::int64_t chunk = ceil_div(red, cs);
    // accumulator and resident weights bound how long one dot product runs
    const std::int64_t pieces = ceil_div(chunk * red_tiles, ctx.cap_mac2);
    readouts = passes * pg * pieces;
    out.bpe = passes * pg * chunk * e.period +
              ceil_div(readouts * e.engine_cycles_per_readout, red_tiles);
    out.bpe_macs = std::int64_t{tc.k} * tc.c * rs * pix_b;
    out.bpe_fill = static_cast<double>(tc.k * pix_b) / static_cast<double>(kg * e.n_w * pg * e.n_i);
  }
  if (out.dsp > 0) {
    out.stall = ceil_div(readouts * ctx.stall_per_readout, red_tiles);
  }
  out.compute = std::max(out.bpe, out.dsp + out.stall);
  return out;
}

int choose_q_bpe(const Context& ctx, const TileClass& tc, std::int64_t red_tiles) {
  if (ctx.split) {
    return static_cast<int>(std::floor(*ctx.split * tc.q + 1e-9));
  }
  if (!ctx.bpe_on) {
    return 0;
  }
  if (!ctx.dsp_on) {
    return tc.q;
  }
  int best = 0;
  std::int64_t best_cost = tile_cost(ctx, tc, 0, red_tiles).compute;
  for (int qb = 1; qb <= tc.q; ++qb) {
    const std::int64_t c = tile_cost(ctx, tc, qb, red_tiles).compute;
    if (c < best_cost) {
      best_cost = c;
      best = qb;
    }
  }
  return best;
}

LayerPerf simulate_with(const LayerShape& layer, const TilingConfig& t, const Context& ctx) {
  LayerPerf lp;
  lp.name = layer.name;
  lp.macs = layer.macs();
  const auto classes = tile_classes(layer, t);
  std::int64_t sum_all = 0;
  std::int64_t sum_max = 0;
  double fill_weighted = 0.0;
  std::int64_t dsp_capacity = 0;
  const std::int64_t red_tiles = ceil_div(layer.C, t.c_vec) * ceil_div(layer.R, t.r_vec) *
                                 ceil_div(layer.S, t.r_vec);
  for (const auto& tc : classes) {
    const int qb = choose_q_bpe(ctx, tc, red_tiles);
    const TileCost cost = tile_cost(ctx, tc, qb, red_tiles);
    const std::int64_t in_rows = std::int64_t{tc.p - 1} * layer.stride + tc.r;
    const std::int64_t in_cols = std::int64_t{tc.q - 1} * layer.stride + tc.s;
    const double in_bytes = static_cast<double>(tc.c) * in_rows * in_cols * ctx.abits / 8.0;
    const double filt_bytes = static_cast<double>(tc.k) * tc.c * tc.r * tc.s * ctx.wbits / 8.0;
    const double out_bytes = static_cast<double>(tc.k) * tc.p * tc.q * ctx.abits / 8.0;
    const auto load = static_cast<std::int64_t>(std::ceil((in_bytes + filt_bytes) / ctx.bw));
    const auto store = static_cast<std::int64_t>(std::ceil(out_bytes / ctx.bw));

    const std::int64_t n = tc.count;
    lp.tile_count += n;
    lp.compute_cycles += n * cost.compute;
    lp.bpe_cycles += n * cost.bpe;
    lp.dsp_cycles += n * cost.dsp;
    lp.dsp_stall_cycles += n * cost.stall;
    lp.load_cycles += n * load;
    lp.store_cycles += n * store;
    lp.bpe_macs += n * cost.bpe_macs;
    fill_weighted += static_cast<double>(n * cost.bpe_macs) * cost.bpe_fill;
    dsp_capacity += n * cost.dsp * ctx.dsp_lanes;
    sum_all += n * (load + cost.compute + store);
    sum_max += n * std::max({load, cost.compute, store});
  }
  lp.dsp_macs = lp.macs - lp.bpe_macs;
  const std::int64_t first_load = lp.tile_count ? lp.load_cycles / lp.tile_count : 0;
  const std::int64_t last_store = lp.tile_count ? lp.store_cycles / lp.tile_count : 0;
  lp.latency = std::min(sum_all, first_load + sum_max + last_store);
  if (lp.bpe_macs > 0) {
    lp.bpe_utilization = fill_weighted / static_cast<double>(lp.bpe_macs);
  }
  if (lp.dsp_macs > 0 && dsp_capacity > 0) {
    lp.dsp_utilization = static_cast<double>(lp.dsp_macs) / static_cast<double>(dsp_capacity);
  }
  return lp;
}

} // namespace

void TilingConfig::validate() const {
  if (c_vec < 1 || k_vec < 1 || r_vec < 1 || p_vec < 1 || q_vec < 1) {
    throw ConfigError("tiling vector sizes must be at least 1");
  }
  if (m4bram_blocks_used < 0 || dsp_blocks_used < 0) {
    throw ConfigError("block counts must be non-negative");
  }
}

std::vector<TileClass> tile_classes(const LayerShape& layer, const TilingConfig& t) {
  layer.validate();
  t.validate();
  std::vector<TileClass> out;
  for (const auto& k : split_dim(layer.K, t.k_vec)) {
    for (const auto& c : split_dim(layer.C, t.c_vec)) {
      for (const auto& p : split_dim(layer.P(), t.p_vec)) {
        for (const auto& q : split_dim(layer.Q(), t.q_vec)) {
          for (const auto& r : split_dim(layer.R, t.r_vec)) {
            for (const auto& s : split_dim(layer.S, t.r_vec)) {
              out.push_back({k.size, c.size, p.size, q.size, r.size, s.size,
                             k.count * c.count * p.count * q.count * r.count * s.count});
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<Tile> tile_layer(const LayerShape& layer, const TilingConfig& t) {
  layer.validate();
  t.validate();
  std::vector<Tile> tiles;
  for (int k0 = 0; k0 < layer.K; k0 += t.k_vec) {
    for (int c0 = 0; c0 < layer.C; c0 += t.c_vec) {
      for (int p0 = 0; p0 < layer.P(); p0 += t.p_vec) {
        for (int q0 = 0; q0 < layer.Q(); q0 += t.q_vec) {
          for (int r0 = 0; r0 < layer.R; r0 += t.r_vec) {
            for (int s0 = 0; s0 < layer.S; s0 += t.r_vec) {
              Tile tl;
              tl.k0 = k0;
              tl.c0 = c0;
              tl.p0 = p0;
              tl.q0 = q0;
              tl.r0 = r0;
              tl.s0 = s0;
              tl.k = std::min(t.k_vec, layer.K - k0);
              tl.c = std::min(t.c_vec, layer.C - c0);
              tl.p = std::min(t.p_vec, layer.P() - p0);
              tl.q = std::min(t.q_vec, layer.Q() - q0);
              tl.r = std::min(t.r_vec, layer.R - r0);
              tl.s = std::min(t.r_vec, layer.S - s0);
              tiles.push_back(tl);
            }
          }
        }
      }
    }
  }
  return tiles;
}

int dsp_blocks_for(const TilingConfig& t, const EngineSetup& setup) {
  if (!setup.use_dsp) {
    return 0;
  }
  const PackingLayout pk = best_packing(setup.precision, setup.dsp);
  const std::int64_t mults = ceil_div(t.k_vec, pk.m) * t.c_vec;
  return static_cast<int>(ceil_div(mults, setup.dsp.multipliers_per_block));
}

LayerPerf simulate_layer(const LayerShape& layer, const TilingConfig& t, const EngineSetup& setup) {
  return simulate_with(layer, t, make_context(t, setup));
}

PerfReport simulate_network(const NetworkDesc& net, const TilingConfig& t,
                            const EngineSetup& setup) {
  net.validate();
  const Context ctx = make_context(t, setup);
  PerfReport rep;
  rep.network = net.name;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerShape& l = net.layers[i];
    LayerPerf lp;
    bool reused = false;
    for (std::size_t j = 0; j < i; ++j) {
      if (net.layers[j].same_shape(l)) {
        lp = rep.layers[j];
        lp.name = l.name;
        reused = true;
        break;
      }
    }
    if (!reused) {
      lp = simulate_with(l, t, ctx);
    }
    rep.total_latency += lp.latency;
    rep.total_stall += lp.dsp_stall_cycles;
    rep.total_macs += lp.macs;
    rep.layers.push_back(std::move(lp));
  }
  return rep;
}

double latency_lower_bound(const NetworkDesc& net, const TilingConfig& t,
                           const EngineSetup& setup) {
  const Context ctx = make_context(t, setup);
  double lb = 0.0;
  for (const auto& l : net.layers) {
    double rate = 0.0;
    if (ctx.dsp_on && (!ctx.split || *ctx.split < 1.0)) {
      const std::int64_t pix = std::int64_t{l.P()} * l.Q();
      rate += static_cast<double>(std::min(t.k_vec, l.K)) * std::min(t.c_vec, l.C) *
              std::min<std::int64_t>(ctx.pack_n, pix);
    }
    if (ctx.bpe_on && (!ctx.split || *ctx.split > 0.0)) {
      rate += 2.0 * ctx.blocks * ctx.eng.n_w * ctx.eng.n_i / ctx.eng.period;
    }
    lb += static_cast<double>(l.macs()) / rate;
  }
  return lb;
}

std::string perf_csv(const PerfReport& report) {
  std::ostringstream os;
  os << "layer,macs,bpe_cycles,dsp_cycles,stall_cycles,load,store,latency,bpe_util,dsp_util\n";
  char buf[64];
  for (const auto& l : report.layers) {
    os << l.name << ',' << l.macs << ',' << l.bpe_cycles << ',' << l.dsp_cycles << ','
       << l.dsp_stall_cycles << ',' << l.load_cycles << ',' << l.store_cycles << ',' << l.latency;
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", l.bpe_utilization, l.dsp_utilization);
    os << buf;
  }
  return os.str();
}

PerfReport combine_parallel(const PerfReport& a, const PerfReport& b, const std::string& name) {
  if (a.layers.size() != b.layers.size()) {
    throw ConfigError("parallel groups must cover the same layers");
  }
  PerfReport out;
  out.network = name;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const LayerPerf& x = a.layers[i];
    const LayerPerf& y = b.layers[i];
    LayerPerf l = x.latency >= y.latency ? x : y;
    l.macs = x.macs + y.macs;
    l.bpe_macs = x.bpe_macs + y.bpe_macs;
    l.dsp_macs = x.dsp_macs + y.dsp_macs;
    out.total_latency += l.latency;
    out.total_stall += l.dsp_stall_cycles;
    out.total_macs += l.macs;
    out.layers.push_back(l);
  }
  return out;
}

} // namespace m4bram
