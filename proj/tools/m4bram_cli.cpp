// m4bram: command-line front end for the block model, performance model,
// design-space search and the experiment suites.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "m4bram/block.hpp"
#include "m4bram/dse.hpp"
#include "m4bram/dsp_packing.hpp"
#include "m4bram/engine_perf.hpp"
#include "m4bram/error.hpp"
#include "m4bram/hetero_dla.hpp"
#include "m4bram/networks.hpp"
#include "m4bram/scenario.hpp"

namespace {

using namespace m4bram;

struct Common {
  std::string fpga = "gx650";
  std::string arch = "m4s";
  std::string pump = "sy";
  int wbits = 8;
  int abits = 8;
  bool act_signed = false;
  std::vector<int> ni_set{1, 2, 4};
  std::uint64_t seed = 1;
  std::string out_dir;
};

ArchKind parse_arch(const std::string& s) {
  if (s == "m4s") return ArchKind::M4BRAM_S;
  if (s == "m4l") return ArchKind::M4BRAM_L;
  if (s == "bramac1da") return ArchKind::BRAMAC_1DA;
  if (s == "bramac2sa") return ArchKind::BRAMAC_2SA;
  if (s == "plain") return ArchKind::PlainBram;
  throw ConfigError("unknown --arch '" + s + "'");
}

Pumping parse_pump(const std::string& s) {
  if (s == "sy") return Pumping::Synchronous;
  if (s == "dp") return Pumping::DoublePumped;
  throw ConfigError("unknown --pump '" + s + "'");
}

void add_common(CLI::App* app, Common& c, bool engine) {
  app->add_option("--fpga", c.fpga, "gx400, gx650 or an FPGA JSON file")->capture_default_str();
  if (engine) {
    app->add_option("--arch", c.arch, "m4s, m4l, bramac1da, bramac2sa, plain")
        ->capture_default_str();
    app->add_option("--pump", c.pump, "sy or dp")->capture_default_str();
  }
  app->add_option("--wbits", c.wbits, "weight bits")->capture_default_str();
  app->add_option("--abits", c.abits, "activation bits")->capture_default_str();
  app->add_flag("--signed-act", c.act_signed, "signed activations");
  app->add_option("--ni-set", c.ni_set, "allowed n_i values")->delimiter(',');
  app->add_option("--seed", c.seed, "RNG seed for sampled checks")->capture_default_str();
  app->add_option("--out-dir", c.out_dir, "write CSVs here instead of stdout");
}

EngineSetup make_setup(const Common& c) {
  EngineSetup s;
  s.arch = parse_arch(c.arch);
  s.pumping = parse_pump(c.pump);
  s.precision = make_precision(c.wbits, c.abits, c.act_signed);
  return s;
}

void emit(const Common& c, const std::string& file, const std::string& text) {
  if (c.out_dir.empty()) {
    std::cout << text;
    return;
  }
  const auto path = std::filesystem::path(c.out_dir) / file;
  write_file_atomic(path, text);
  std::cerr << "wrote " << path.string() << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_pack(const Common& c, long trials, bool sweep) {
  const DspModel dsp = DspModel::intel();
  std::ostringstream os;
  os << "w_bits,a_bits,act_signed,m,n,factor,transposed,weight_stride,act_stride,utilization,"
        "verified\n";
  std::vector<int> ws = sweep ? std::vector<int>{2, 4, 8} : std::vector<int>{c.wbits};
  std::vector<int> as = sweep ? std::vector<int>{2, 3, 4, 5, 6, 7, 8} : std::vector<int>{c.abits};
  bool ok = true;
  for (int w : ws) {
    for (int a : as) {
      const PrecisionConfig p = make_precision(w, a, c.act_signed);
      const PackingLayout pk = best_packing(p, dsp);
      const bool v = verify_packing(p, pk, dsp, c.seed, trials);
      ok = ok && v;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", dsp_utilization(p, dsp));
      os << w << ',' << a << ',' << (p.act_signed ? 1 : 0) << ',' << pk.m << ',' << pk.n << ','
         << pk.factor() << ',' << (pk.transposed ? 1 : 0) << ',' << pk.weight_stride() << ','
         << pk.act_stride() << ',' << buf << ',' << (v ? 1 : 0) << '\n';
    }
  }
  emit(c, "pack.csv", os.str());
  return ok ? 0 : 1;
}

int cmd_simulate_block(const Common& c, const std::string& trace, const std::string& golden,
                       int dp, bool faithful) {
  const ArchKind kind = parse_arch(c.arch);
  if (kind != ArchKind::M4BRAM_S && kind != ArchKind::M4BRAM_L) {
    throw ConfigError("simulate-block needs --arch m4s or m4l");
  }
  BlockConfig cfg;
  cfg.variant = {kind == ArchKind::M4BRAM_S ? VariantKind::S : VariantKind::L, parse_pump(c.pump)};
  cfg.weight_bits = c.wbits;
  cfg.dp = dp;
  cfg.accumulator = faithful ? AccumulatorMode::Faithful : AccumulatorMode::Wide;
  M4Block block(cfg);
  std::ifstream in(trace);
  if (!in) {
    throw ParseError("cannot open trace " + trace);
  }
  const auto lines = parse_trace(in);
  std::ostringstream os;
  replay_trace(block, lines, os);
  emit(c, "block_replay.csv", os.str());
  if (!golden.empty()) {
    if (read_file(golden) != os.str()) {
      std::cerr << "replay differs from golden " << golden << '\n';
      return 1;
    }
    std::cerr << "replay matches golden " << golden << '\n';
  }
  return 0;
}

TilingConfig tiling_from(const std::vector<int>& v, int ni, int blocks) {
  if (v.size() != 5) {
    throw ConfigError("--tiling takes k,c,r,p,q");
  }
  TilingConfig t;
  t.k_vec = v[0];
  t.c_vec = v[1];
  t.r_vec = v[2];
  t.p_vec = v[3];
  t.q_vec = v[4];
  t.n_i = ni;
  t.m4bram_blocks_used = blocks;
  return t;
}

int cmd_perf(const Common& c, const std::string& net_name, const std::vector<int>& tiling, int ni,
             int blocks, double bandwidth, bool no_dsp) {
  const NetworkDesc net = network_by_name(net_name);
  EngineSetup s = make_setup(c);
  s.use_dsp = !no_dsp;
  if (bandwidth > 0) {
    s.mem.bytes_per_cycle = bandwidth;
  }
  PerfReport rep;
  if (tiling.empty()) {
    SearchOptions opt;
    opt.n_i_allowed = c.ni_set;
    rep = search(net, fpga_by_name(c.fpga), s, opt).report;
  } else {
    rep = simulate_network(net, tiling_from(tiling, ni, blocks), s);
  }
  emit(c, net.name + "_perf.csv", perf_csv(rep));
  std::cerr << net.name << ": latency " << rep.total_latency << " cycles, stall share "
            << rep.stall_share() << '\n';
  return 0;
}

int cmd_dse(const Common& c, const std::string& net_name, bool dump) {
  const NetworkDesc net = network_by_name(net_name);
  SearchOptions opt;
  opt.n_i_allowed = c.ni_set;
  opt.keep_candidates = dump;
  const FpgaTarget target = fpga_by_name(c.fpga);
  const SearchResult r = search(net, target, make_setup(c), opt);
  const TilingConfig& t = r.tiling;
  std::ostringstream os;
  char buf[96];
  std::snprintf(buf, sizeof buf, ",%.6f,%.4f,%.6f", r.perf, r.usage.area, r.score);
  os << "network,fpga,k_vec,c_vec,r_vec,p_vec,q_vec,n_i,cim_blocks,dsp_blocks,bram_blocks,latency,"
        "perf,area,score\n"
     << net.name << ',' << target.name << ',' << t.k_vec << ',' << t.c_vec << ',' << t.r_vec
     << ',' << t.p_vec << ',' << t.q_vec << ',' << t.n_i << ',' << t.m4bram_blocks_used << ','
     << r.usage.dsp_blocks << ',' << r.usage.bram_blocks << ',' << r.report.total_latency << buf
     << '\n';
  emit(c, net.name + "_dse.csv", os.str());
  if (dump) {
    emit(c, net.name + "_candidates.csv", candidates_csv(r));
  }
  return 0;
}

int cmd_scenario(const Common& c, const std::string& id, const std::vector<std::string>& nets,
                 const std::vector<int>& precisions, bool fpga_given) {
  Scenario s = default_scenario(id);
  if (!nets.empty()) {
    s.networks = nets;
  }
  if (!precisions.empty()) {
    s.precisions = precisions;
  }
  if (fpga_given) {
    s.fpga = fpga_by_name(c.fpga);
  }
  ScenarioRunner runner;
  const ScenarioReport rep = run_scenario(s, runner);
  emit(c, id + ".csv", rep.csv());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"M4BRAM block, performance and design-space tools"};
  app.require_subcommand(1);
  Common common;

  auto* pack = app.add_subcommand("pack", "DSP packing factors, verified bit-exactly");
  add_common(pack, common, false);
  long trials = 100000;
  bool sweep = false;
  pack->add_option("--trials", trials, "samples when exhaustive checking is too large")
      ->capture_default_str();
  pack->add_flag("--sweep", sweep, "all weight widths and activations 2..8");

  auto* sim = app.add_subcommand("simulate-block", "replay a port trace through one block");
  add_common(sim, common, true);
  std::string trace;
  std::string golden;
  int dp = 1;
  bool faithful = false;
  sim->add_option("trace", trace, "trace CSV")->required();
  sim->add_option("--golden", golden, "expected replay output; exit 1 on any difference");
  sim->add_option("--dp", dp, "duplication factor 1, 2 or 4")->capture_default_str();
  sim->add_flag("--faithful", faithful, "wrap accumulators at the dummy-array width");

  auto* perf = app.add_subcommand("perf", "one network on one configuration");
  add_common(perf, common, true);
  std::string net_name;
  std::vector<int> tiling;
  int ni = 1;
  int blocks = 0;
  double bandwidth = 0;
  bool no_dsp = false;
  perf->add_option("--net", net_name, "built-in name or network JSON")->required();
  perf->add_option("--tiling", tiling, "k,c,r,p,q (default: searched)")->delimiter(',');
  perf->add_option("--ni", ni, "n_i for an explicit tiling")->capture_default_str();
  perf->add_option("--blocks", blocks, "CIM blocks for an explicit tiling")->capture_default_str();
  perf->add_option("--bandwidth", bandwidth, "off-chip bytes per cycle");
  perf->add_flag("--no-dsp", no_dsp, "BPE engine only");

  auto* dse = app.add_subcommand("dse", "search the tiling space");
  add_common(dse, common, true);
  bool dump = false;
  dse->add_option("--net", net_name, "built-in name or network JSON")->required();
  dse->add_flag("--candidates", dump, "also write every candidate");

  auto* scen = app.add_subcommand("scenario", "run an experiment suite");
  add_common(scen, common, false);
  std::string id;
  std::vector<std::string> nets;
  std::vector<int> precisions;
  scen->add_option("id", id, "act-sweep, bramac-compare, ablation, iso-area, mixed-weights")
      ->required();
  scen->add_option("--nets", nets, "override the network list")->delimiter(',');
  scen->add_option("--precisions", precisions, "override the precision sweep")->delimiter(',');

  auto* arch = app.add_subcommand("arch-table", "architecture profiles as CSV");
  add_common(arch, common, false);

  auto* export_nets = app.add_subcommand("export-networks", "write the built-in networks as JSON");
  add_common(export_nets, common, false);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*pack) {
      return cmd_pack(common, trials, sweep);
    }
    if (*sim) {
      return cmd_simulate_block(common, trace, golden, dp, faithful);
    }
    if (*perf) {
      return cmd_perf(common, net_name, tiling, ni, blocks, bandwidth, no_dsp);
    }
    if (*dse) {
      return cmd_dse(common, net_name, dump);
    }
    if (*scen) {
      return cmd_scenario(common, id, nets, precisions, scen->count("--fpga") > 0);
    }
    if (*arch) {
      emit(common, "arch_table.csv", arch_csv_table());
      return 0;
    }
    if (*export_nets) {
      for (const auto& n : builtin_network_names()) {
        emit(common, n + ".json", serialize_network(builtin_network(n)));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
