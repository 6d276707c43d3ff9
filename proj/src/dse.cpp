#include "m4bram/dse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "m4bram/error.hpp"

namespace m4bram {

namespace {

constexpr int kBlockBits = 16384;

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

int pow2_ceil(int v) {
  int p = 1;
  while (p < v) {
    p <<= 1;
  }
  return p;
}

std::vector<int> pow2_upto(int limit) {
  std::vector<int> out;
  for (int v = 1; v <= limit; v <<= 1) {
    out.push_back(v);
  }
  return out;
}

} // namespace

void FpgaTarget::validate() const {
  if (logic_blocks <= 0 || m20k_blocks <= 0 || dsp_blocks < 0) {
    throw ConfigError("FPGA '" + name + "' needs positive logic and M20K counts");
  }
  if (area_fraction_logic <= 0 || area_fraction_m20k <= 0 ||
      (dsp_blocks > 0 && area_fraction_dsp <= 0)) {
    throw ConfigError("FPGA '" + name + "' needs positive area fractions");
  }
}

FpgaTarget FpgaTarget::gx400() { return {"GX400", 12816, 648, 1537, 55.6, 15.7, 28.7}; }

FpgaTarget FpgaTarget::gx650() { return {"GX650", 20736, 1152, 2489, 54.7, 17.0, 28.3}; }

FpgaTarget load_fpga(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open FPGA file " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
    FpgaTarget t;
    t.name = j.value("name", path.stem().string());
    t.logic_blocks = j.at("logic_blocks").get<int>();
    t.dsp_blocks = j.at("dsp_blocks").get<int>();
    t.m20k_blocks = j.at("m20k_blocks").get<int>();
    t.area_fraction_logic = j.at("area_fraction_logic").get<double>();
    t.area_fraction_dsp = j.at("area_fraction_dsp").get<double>();
    t.area_fraction_m20k = j.at("area_fraction_m20k").get<double>();
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

FpgaTarget fpga_by_name(const std::string& name_or_path) {
  if (name_or_path == "gx400") {
    return FpgaTarget::gx400();
  }
  if (name_or_path == "gx650") {
    return FpgaTarget::gx650();
  }
  return load_fpga(name_or_path);
}

AreaModel unit_areas(const FpgaTarget& target) {
  target.validate();
  const double m20k = target.area_fraction_m20k / target.m20k_blocks;
  AreaModel a;
  a.unit_logic = target.area_fraction_logic / target.logic_blocks / m20k;
  a.unit_dsp = target.dsp_blocks > 0 ? target.area_fraction_dsp / target.dsp_blocks / m20k : 0.0;
  a.unit_m20k = 1.0;
  return a;
}

double cim_overhead_in_dsps(const FpgaTarget& target, ArchKind arch) {
  const AreaModel a = unit_areas(target);
  if (a.unit_dsp <= 0) {
    throw ConfigError("FPGA '" + target.name + "' has no DSP area to compare against");
  }
  return profile(arch).m20k_area_overhead * target.m20k_blocks * a.unit_m20k / a.unit_dsp;
}

double core_area_increase_percent(const FpgaTarget& target, ArchKind arch) {
  return profile(arch).m20k_area_overhead * target.area_fraction_m20k;
}

int buffer_blocks(const NetworkDesc& net, const TilingConfig& t, const PrecisionConfig& p) {
  std::int64_t in_bits = 0;
  std::int64_t out_bits = 0;
  for (const auto& l : net.layers) {
    const std::int64_t pt = std::min(t.p_vec, l.P());
    const std::int64_t qt = std::min(t.q_vec, l.Q());
    const std::int64_t rows = (pt - 1) * l.stride + std::min(t.r_vec, l.R);
    const std::int64_t cols = (qt - 1) * l.stride + std::min(t.r_vec, l.S);
    in_bits = std::max(in_bits, std::min(t.c_vec, l.C) * rows * cols * p.act_bits);
    out_bits = std::max(out_bits, std::min(t.k_vec, l.K) * pt * qt * p.act_bits);
  }
  return static_cast<int>(ceil_div(2 * in_bits, kBlockBits) + ceil_div(2 * out_bits, kBlockBits));
}

ResourceUsage resource_usage(const TilingConfig& t, const EngineSetup& setup, int buffers,
                             const AreaModel& area) {
  const ArchitectureProfile& arch = profile(setup.arch);
  const bool bpe_on = arch.computes() && t.m4bram_blocks_used > 0;
  ResourceUsage u;
  u.dsp_blocks = dsp_blocks_for(t, setup);
  const int w = setup.precision.weight_bits;
  const std::int64_t kc = std::int64_t{t.k_vec} * t.c_vec;
  const auto bandwidth = static_cast<int>(ceil_div(kc * w, 32));
  const auto capacity =
      static_cast<int>(ceil_div(2 * kc * t.r_vec * t.r_vec * w, kBlockBits));
  if (setup.use_dsp) {
    u.filter_blocks = std::max(bandwidth, capacity);
  } else if (bpe_on) {
    u.filter_blocks = capacity;
  }
  u.buffer_blocks = buffers;
  u.cim_blocks = bpe_on ? t.m4bram_blocks_used : 0;
  if (arch.is_bramac()) {
    // CIM blocks lose both ports, so DSP-feed storage is separate.
    u.bram_blocks = u.cim_blocks + u.filter_blocks + buffers;
  } else {
    u.bram_blocks = std::max(u.cim_blocks, u.filter_blocks) + buffers;
  }
  u.area = u.dsp_blocks * area.unit_dsp + u.bram_blocks * area.bram_block_area(setup.arch);
  return u;
}

ResourceUsage resource_usage(const NetworkDesc& net, const TilingConfig& t,
                             const EngineSetup& setup, const AreaModel& area) {
  return resource_usage(t, setup, buffer_blocks(net, t, setup.precision), area);
}

double objective(double perf, double area) {
  if (perf <= 0 || area <= 0) {
    throw ConfigError("objective needs positive perf and area");
  }
  return perf * perf / area;
}

namespace {

auto lex_key(const TilingConfig& t) {
  return std::make_tuple(t.k_vec, t.c_vec, t.q_vec, t.p_vec, t.r_vec, t.n_i,
                         t.m4bram_blocks_used);
}

struct Pending {
  Candidate cand;
  double score_bound;
};

} // namespace

SearchResult search(const NetworkDesc& net, const FpgaTarget& target, EngineSetup setup,
                    const SearchOptions& options) {
  net.validate();
  target.validate();
  setup.precision.validate();
  const ArchitectureProfile& arch = profile(setup.arch);
  require_instantiable(arch);
  if (target.dsp_blocks == 0) {
    setup.use_dsp = false;
  }

  int max_k = 1, max_c = 1, max_r = 1, max_p = 1, max_q = 1;
  for (const auto& l : net.layers) {
    max_k = std::max(max_k, l.K);
    max_c = std::max(max_c, l.C);
    max_r = std::max({max_r, l.R, l.S});
    max_p = std::max(max_p, l.P());
    max_q = std::max(max_q, l.Q());
  }
  const auto ks = pow2_upto(pow2_ceil(max_k));
  const auto cs = pow2_upto(pow2_ceil(max_c));
  const auto rs = pow2_upto(std::min(pow2_ceil(max_r), options.max_r_vec));
  const auto ps = pow2_upto(std::min(pow2_ceil(max_p), options.max_pq_vec));
  const auto qs = pow2_upto(std::min(pow2_ceil(max_q), options.max_pq_vec));

  std::vector<int> n_is;
  if (arch.is_m4bram()) {
    for (int ni : {1, 2, 4}) {
      if (std::find(options.n_i_allowed.begin(), options.n_i_allowed.end(), ni) !=
          options.n_i_allowed.end()) {
        n_is.push_back(ni);
      }
    }
  } else if (arch.is_bramac()) {
    n_is = arch.n_i_options;
  } else {
    n_is = {1};
  }
  if (n_is.empty()) {
    throw InfeasibleError("no allowed n_i for " + arch.name);
  }

  const double total_macs = static_cast<double>(net.macs());
  SearchResult result;
  std::vector<Pending> pending;

  for (int k : ks) {
    for (int c : cs) {
      TilingConfig base;
      base.k_vec = k;
      base.c_vec = c;
      if (setup.use_dsp && dsp_blocks_for(base, setup) > target.dsp_blocks) {
        continue;
      }
      for (int r : rs) {
        for (int p : ps) {
          for (int q : qs) {
            TilingConfig t = base;
            t.r_vec = r;
            t.p_vec = p;
            t.q_vec = q;
            const int buffers = buffer_blocks(net, t, setup.precision);
            // CIM work runs on the blocks holding the filters, so the CIM
            // block count follows the tiling. 0 keeps a pure-DSP option.
            std::vector<int> blocks{0};
            if (arch.computes()) {
              TilingConfig cim = t;
              cim.m4bram_blocks_used = 1;
              const int fb = resource_usage(cim, setup, buffers, options.area).filter_blocks;
              blocks.push_back(std::max(1, fb));
            }
            for (int ni : n_is) {
              for (int b : blocks) {
                if (b == 0 && !setup.use_dsp) {
                  continue;
                }
                if (b == 0 && ni != n_is.front()) {
                  continue; // n_i is irrelevant without CIM blocks
                }
                t.n_i = ni;
                t.m4bram_blocks_used = b;
                Candidate cand;
                cand.tiling = t;
                cand.usage = resource_usage(t, setup, buffers, options.area);
                cand.tiling.dsp_blocks_used = cand.usage.dsp_blocks;
                cand.feasible = cand.usage.fits(target) && cand.usage.area > 0;
                ++result.candidates_total;
                if (!cand.feasible) {
                  if (options.keep_candidates) {
                    result.candidates.push_back(cand);
                  }
                  continue;
                }
                const double lb = latency_lower_bound(net, cand.tiling, setup);
                const double perf_ub = total_macs / lb;
                pending.push_back({cand, objective(perf_ub, cand.usage.area)});
              }
            }
          }
        }
      }
    }
  }
  if (pending.empty()) {
    throw InfeasibleError("no tiling of '" + net.name + "' fits " + target.name);
  }

  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.score_bound != b.score_bound) {
      return a.score_bound > b.score_bound;
    }
    return lex_key(a.cand.tiling) < lex_key(b.cand.tiling);
  });

  bool have_best = false;
  Candidate best;
  PerfReport best_report;
  for (auto& pc : pending) {
    if (have_best && !options.keep_candidates && pc.score_bound < best.score) {
      break;
    }
    Candidate& cand = pc.cand;
    PerfReport rep = simulate_network(net, cand.tiling, setup);
    cand.evaluated = true;
    cand.latency = rep.total_latency;
    cand.perf = total_macs / static_cast<double>(rep.total_latency);
    cand.score = objective(cand.perf, cand.usage.area);
    ++result.candidates_evaluated;
    const bool better = !have_best || cand.score > best.score ||
                        (cand.score == best.score && lex_key(cand.tiling) < lex_key(best.tiling));
    if (better) {
      best = cand;
      best_report = std::move(rep);
      have_best = true;
    }
    if (options.keep_candidates) {
      result.candidates.push_back(cand);
    }
  }
  if (options.keep_candidates) {
    std::stable_sort(result.candidates.begin(), result.candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return lex_key(a.tiling) < lex_key(b.tiling);
                     });
  }
  result.tiling = best.tiling;
  result.report = std::move(best_report);
  result.usage = best.usage;
  result.perf = best.perf;
  result.score = best.score;
  return result;
}

std::string candidates_csv(const SearchResult& r) {
  std::ostringstream os;
  os << "k_vec,c_vec,r_vec,p_vec,q_vec,n_i,cim_blocks,dsp_blocks,bram_blocks,latency,perf,area,"
        "score,feasible\n";
  char buf[128];
  for (const auto& c : r.candidates) {
    const auto& t = c.tiling;
    os << t.k_vec << ',' << t.c_vec << ',' << t.r_vec << ',' << t.p_vec << ',' << t.q_vec << ','
       << t.n_i << ',' << t.m4bram_blocks_used << ',' << c.usage.dsp_blocks << ','
       << c.usage.bram_blocks << ',' << c.latency;
    std::snprintf(buf, sizeof buf, ",%.6f,%.4f,%.6f,%d\n", c.perf, c.usage.area, c.score,
                  c.feasible ? 1 : 0);
    os << buf;
  }
  return os.str();
}

} // namespace m4bram

namespace m4bram {

std::pair<NetworkDesc, NetworkDesc> split_filters(const NetworkDesc& net, double ratio_8bit) {
  if (!(ratio_8bit >= 0.0 && ratio_8bit <= 1.0)) {
    throw ConfigError("8-bit filter ratio must lie in [0, 1]");
  }
  NetworkDesc g8{net.name + "_w8", {}};
  NetworkDesc g4{net.name + "_w4", {}};
  for (const auto& l : net.layers) {
    const int k8 = static_cast<int>(std::lround(ratio_8bit * l.K));
    if (k8 > 0) {
      LayerShape a = l;
      a.K = k8;
      g8.layers.push_back(a);
    }
    if (k8 < l.K) {
      LayerShape b = l;
      b.K = l.K - k8;
      g4.layers.push_back(b);
    }
  }
  return {g8, g4};
}

FpgaTarget partition_target(const FpgaTarget& target, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("partition fraction must lie in (0, 1]");
  }
  FpgaTarget t = target;
  t.name = target.name + "*" + std::to_string(fraction).substr(0, 4);
  t.logic_blocks = static_cast<int>(target.logic_blocks * fraction);
  t.dsp_blocks = static_cast<int>(target.dsp_blocks * fraction);
  t.m20k_blocks = static_cast<int>(target.m20k_blocks * fraction);
  t.area_fraction_logic *= fraction;
  t.area_fraction_dsp *= fraction;
  t.area_fraction_m20k *= fraction;
  return t;
}

namespace {

// Per-layer max of two groups, matched by layer name.
PerfReport combine_groups(const NetworkDesc& net, const PerfReport& a, const PerfReport& b) {
  PerfReport out;
  out.network = net.name;
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (const auto& l : net.layers) {
    const LayerPerf* x = ia < a.layers.size() && a.layers[ia].name == l.name ? &a.layers[ia++] : nullptr;
    const LayerPerf* y = ib < b.layers.size() && b.layers[ib].name == l.name ? &b.layers[ib++] : nullptr;
    LayerPerf lp;
    if (x && y) {
      PerfReport ra{"", {*x}, 0, 0, 0};
      PerfReport rb{"", {*y}, 0, 0, 0};
      lp = combine_parallel(ra, rb, net.name).layers.front();
    } else {
      lp = x ? *x : *y;
    }
    lp.name = l.name;
    out.total_latency += lp.latency;
    out.total_stall += lp.dsp_stall_cycles;
    out.total_macs += lp.macs;
    out.layers.push_back(lp);
  }
  return out;
}

} // namespace

MixedResult intra_layer_mixed_weights(const NetworkDesc& net, double ratio_8bit,
                                      const FpgaTarget& target, const EngineSetup& base,
                                      const std::vector<double>& fractions,
                                      const Searcher& searcher) {
  net.validate();
  EngineSetup s8 = base;
  s8.precision.weight_bits = 8;
  EngineSetup s4 = base;
  s4.precision.weight_bits = 4;
  const auto [g8, g4] = split_filters(net, ratio_8bit);
  MixedResult out;
  if (g8.layers.empty() || g4.layers.empty()) {
    const bool all8 = g4.layers.empty();
    SearchResult r = searcher(net, target, all8 ? s8 : s4);
    out.report = r.report;
    out.fraction_8bit = all8 ? 1.0 : 0.0;
    (all8 ? out.group8 : out.group4) = std::move(r);
    return out;
  }
  bool found = false;
  for (double f : fractions) {
    if (!(f > 0.0 && f < 1.0)) {
      throw ConfigError("partition fractions must lie in (0, 1)");
    }
    SearchResult r8;
    SearchResult r4;
    try {
      r8 = searcher(g8, partition_target(target, f), s8);
      r4 = searcher(g4, partition_target(target, 1.0 - f), s4);
    } catch (const InfeasibleError&) {
      continue;
    }
    PerfReport combined = combine_groups(net, r8.report, r4.report);
    if (!found || combined.total_latency < out.report.total_latency) {
      out.report = std::move(combined);
      out.fraction_8bit = f;
      out.group8 = std::move(r8);
      out.group4 = std::move(r4);
      found = true;
    }
  }
  if (!found) {
    throw ConfigError("no resource partition of " + target.name + " fits both filter groups of '" +
                      net.name + "'");
  }
  return out;
}

} // namespace m4bram
