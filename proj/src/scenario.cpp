#include "m4bram/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "m4bram/error.hpp"
#include "m4bram/networks.hpp"

namespace m4bram {

ConfigSpec dla_config() { return {"DLA", ArchKind::PlainBram, Pumping::Synchronous, true, {1}}; }

ConfigSpec config_by_label(const std::string& label) {
  if (label == "DLA") {
    return dla_config();
  }
  if (label == "DP-M4S") {
    return {label, ArchKind::M4BRAM_S, Pumping::DoublePumped};
  }
  if (label == "SY-M4S") {
    return {label, ArchKind::M4BRAM_S, Pumping::Synchronous};
  }
  if (label == "SY-M4L") {
    return {label, ArchKind::M4BRAM_L, Pumping::Synchronous};
  }
  if (label == "DP-M4L") {
    return {label, ArchKind::M4BRAM_L, Pumping::DoublePumped};
  }
  if (label == "1DA") {
    return {label, ArchKind::BRAMAC_1DA, Pumping::DoublePumped, true, {1}};
  }
  if (label == "2SA") {
    return {label, ArchKind::BRAMAC_2SA, Pumping::Synchronous, true, {2}};
  }
  throw ConfigError("unknown configuration '" + label + "'");
}

const SearchResult& ScenarioRunner::best(const NetworkDesc& net, const FpgaTarget& target,
                                         const EngineSetup& setup,
                                         const std::vector<int>& n_i_allowed) {
  std::ostringstream key;
  key << serialize_network(net) << '|' << target.name << ',' << target.logic_blocks << ','
      << target.dsp_blocks << ',' << target.m20k_blocks << ',' << target.area_fraction_logic << ','
      << target.area_fraction_dsp << ',' << target.area_fraction_m20k << '|'
      << static_cast<int>(setup.arch) << ',' << static_cast<int>(setup.pumping) << ','
      << setup.precision.weight_bits << ',' << setup.precision.act_bits << ','
      << setup.precision.act_signed << ',' << setup.use_dsp << ',' << setup.dsp.name << ','
      << setup.dsp.guard_bits << ',' << setup.mem.bytes_per_cycle << ','
      << setup.readout_stall_override.value_or(-1) << '|';
  for (int n : n_i_allowed) {
    key << n << ',';
  }
  const std::string k = key.str();
  if (auto it = memo_.find(k); it != memo_.end()) {
    return it->second;
  }
  SearchOptions opt = options_;
  opt.n_i_allowed = n_i_allowed;
  return memo_.emplace(k, search(net, target, setup, opt)).first->second;
}

const SearchResult& ScenarioRunner::best(const NetworkDesc& net, const FpgaTarget& target,
                                         const ConfigSpec& cfg, const PrecisionConfig& p) {
  EngineSetup s;
  s.arch = cfg.arch;
  s.pumping = cfg.pumping;
  s.precision = p;
  s.use_dsp = cfg.use_dsp;
  return best(net, target, s, cfg.n_i_allowed);
}

std::string ScenarioReport::csv() const {
  std::ostringstream os;
  os << "network,fpga,config,baseline,variant,w_bits,a_bits,latency,baseline_latency,speedup,"
        "stall_share,dsp_blocks,bram_blocks,cim_blocks,k_vec,c_vec,r_vec,p_vec,q_vec,n_i\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.network << ',' << r.fpga << ',' << r.config << ',' << r.baseline << ',' << r.variant
       << ',' << r.w_bits << ',' << r.a_bits << ',' << r.latency << ',' << r.baseline_latency;
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f", r.speedup, r.stall_share);
    os << buf << ',' << r.usage.dsp_blocks << ',' << r.usage.bram_blocks << ','
       << r.usage.cim_blocks << ',' << r.tiling.k_vec << ',' << r.tiling.c_vec << ','
       << r.tiling.r_vec << ',' << r.tiling.p_vec << ',' << r.tiling.q_vec << ','
       << r.tiling.n_i << '\n';
  }
  return os.str();
}

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids{"act-sweep", "bramac-compare", "ablation", "iso-area",
                                            "mixed-weights"};
  return ids;
}

Scenario default_scenario(const std::string& id) {
  const std::vector<std::string> all = builtin_network_names();
  if (id == "act-sweep") {
    return {id, all, {8, 7, 6, 5, 4}, {}, std::nullopt};
  }
  if (id == "bramac-compare") {
    return {id, all, {2, 4, 8}, {}, std::nullopt};
  }
  if (id == "ablation") {
    return {id, {"vgg16", "resnet18", "resnet34"}, {2, 4, 8}, {}, std::nullopt};
  }
  if (id == "iso-area") {
    return {id, {"alexnet", "resnet18", "resnet34"}, {8, 7, 6, 5, 4}, {}, std::nullopt};
  }
  if (id == "mixed-weights") {
    return {id, {"resnet34"}, {6}, {0.0, 0.05, 0.15, 0.25, 1.0}, std::nullopt};
  }
  throw ConfigError("unknown scenario '" + id + "'");
}

namespace {

ScenarioRow make_row(const std::string& net, const FpgaTarget& fpga, const std::string& config,
                     const std::string& baseline, const PrecisionConfig& p,
                     const SearchResult& r, const SearchResult& base) {
  ScenarioRow row;
  row.network = net;
  row.fpga = fpga.name;
  row.config = config;
  row.baseline = baseline;
  row.w_bits = p.weight_bits;
  row.a_bits = p.act_bits;
  row.latency = r.report.total_latency;
  row.baseline_latency = base.report.total_latency;
  row.speedup = r.report.speedup_over(base.report);
  row.stall_share = r.report.stall_share();
  row.usage = r.usage;
  row.tiling = r.tiling;
  return row;
}

std::string ni_label(const std::vector<int>& v) {
  std::string s = "ni";
  for (int n : v) {
    s += "-" + std::to_string(n);
  }
  return s;
}

bool large_buffer_net(const std::string& name) {
  return name == "vgg16" || name == "resnet18" || name == "resnet34";
}

void act_sweep(const Scenario& s, ScenarioRunner& run, ScenarioReport& out) {
  const FpgaTarget fpga = s.fpga.value_or(FpgaTarget::gx650());
  for (const auto& name : s.networks) {
    const NetworkDesc net = network_by_name(name);
    for (int a : s.precisions) {
      const PrecisionConfig p = make_precision(8, a);
      const SearchResult& base = run.best(net, fpga, dla_config(), p);
      for (const char* label : {"DP-M4S", "SY-M4L", "DP-M4L"}) {
        const SearchResult& r = run.best(net, fpga, config_by_label(label), p);
        out.rows.push_back(make_row(net.name, fpga, label, "DLA", p, r, base));
      }
    }
  }
}

void bramac_compare(const Scenario& s, ScenarioRunner& run, ScenarioReport& out) {
  for (const auto& name : s.networks) {
    const NetworkDesc net = network_by_name(name);
    for (int b : s.precisions) {
      const FpgaTarget fpga = s.fpga.value_or(b == 8 && large_buffer_net(net.name)
                                                  ? FpgaTarget::gx650()
                                                  : FpgaTarget::gx400());
      const PrecisionConfig p = make_precision(b, b);
      const SearchResult& base = run.best(net, fpga, dla_config(), p);
      for (const char* label : {"1DA", "2SA", "DP-M4S", "SY-M4L"}) {
        const SearchResult& r = run.best(net, fpga, config_by_label(label), p);
        out.rows.push_back(make_row(net.name, fpga, label, "DLA", p, r, base));
      }
    }
  }
}

void ablation(const Scenario& s, ScenarioRunner& run, ScenarioReport& out) {
  const std::vector<std::vector<int>> sets{{1}, {1, 2}, {1, 2, 4}};
  for (const auto& name : s.networks) {
    const NetworkDesc net = network_by_name(name);
    for (int b : s.precisions) {
      const FpgaTarget fpga = s.fpga.value_or(b == 8 && large_buffer_net(net.name)
                                                  ? FpgaTarget::gx650()
                                                  : FpgaTarget::gx400());
      const PrecisionConfig p = make_precision(b, b);
      const SearchResult& base = run.best(net, fpga, config_by_label("1DA"), p);
      for (const auto& set : sets) {
        ConfigSpec cfg = config_by_label("DP-M4S");
        cfg.n_i_allowed = set;
        const SearchResult& r = run.best(net, fpga, cfg, p);
        ScenarioRow row = make_row(net.name, fpga, cfg.label, "1DA", p, r, base);
        row.variant = ni_label(set);
        out.rows.push_back(row);
      }
    }
  }
}

void iso_area(const Scenario& s, ScenarioRunner& run, ScenarioReport& out) {
  const FpgaTarget die = s.fpga.value_or(FpgaTarget::gx650());
  FpgaTarget gx_m4 = die;
  gx_m4.name = "GX-M4";
  gx_m4.dsp_blocks = 0;
  FpgaTarget gx_dsp = die;
  gx_dsp.name = "GX-DSP";
  // the M4BRAM-L overhead of the whole die, spent on DSPs instead
  gx_dsp.dsp_blocks = static_cast<int>(std::floor(cim_overhead_in_dsps(die, ArchKind::M4BRAM_L)));
  ConfigSpec m4 = config_by_label("SY-M4L");
  m4.use_dsp = false;
  for (const auto& name : s.networks) {
    const NetworkDesc net = network_by_name(name);
    for (int a : s.precisions) {
      const PrecisionConfig p = make_precision(8, a);
      const SearchResult& base = run.best(net, gx_dsp, dla_config(), p);
      const SearchResult& r = run.best(net, gx_m4, m4, p);
      out.rows.push_back(make_row(net.name, gx_m4, m4.label, "GX-DSP", p, r, base));
    }
  }
}

void mixed_weights(const Scenario& s, ScenarioRunner& run, ScenarioReport& out) {
  const FpgaTarget fpga = s.fpga.value_or(FpgaTarget::gx400());
  const ConfigSpec cfg = config_by_label("SY-M4L");
  std::vector<double> fractions;
  for (int i = 1; i < 20; ++i) {
    fractions.push_back(i / 20.0);
  }
  const Searcher searcher = [&](const NetworkDesc& n, const FpgaTarget& t, const EngineSetup& e) {
    return run.best(n, t, e, cfg.n_i_allowed);
  };
  for (const auto& name : s.networks) {
    const NetworkDesc net = network_by_name(name);
    for (int a : s.precisions) {
      const SearchResult& base = run.best(net, fpga, dla_config(), make_precision(4, a));
      EngineSetup setup;
      setup.arch = cfg.arch;
      setup.pumping = cfg.pumping;
      setup.precision = make_precision(8, a);
      for (double ratio : s.ratios) {
        const MixedResult m = intra_layer_mixed_weights(net, ratio, fpga, setup, fractions, searcher);
        ScenarioRow row;
        row.network = net.name;
        row.fpga = fpga.name;
        row.config = cfg.label;
        row.baseline = "DLA-w4";
        char buf[48];
        std::snprintf(buf, sizeof buf, "R%.2f-f%.2f", ratio, m.fraction_8bit);
        row.variant = buf;
        row.w_bits = ratio == 0.0 ? 4 : (ratio == 1.0 ? 8 : 0);
        row.a_bits = a;
        row.latency = m.report.total_latency;
        row.baseline_latency = base.report.total_latency;
        row.speedup = m.report.speedup_over(base.report);
        row.stall_share = m.report.stall_share();
        for (const SearchResult* g : {&m.group8, &m.group4}) {
          row.usage.dsp_blocks += g->usage.dsp_blocks;
          row.usage.bram_blocks += g->usage.bram_blocks;
          row.usage.cim_blocks += g->usage.cim_blocks;
          row.usage.filter_blocks += g->usage.filter_blocks;
          row.usage.buffer_blocks += g->usage.buffer_blocks;
          row.usage.area += g->usage.area;
        }
        row.tiling = m.group4.usage.bram_blocks > 0 ? m.group4.tiling : m.group8.tiling;
        out.rows.push_back(row);
      }
    }
  }
}

} // namespace

ScenarioReport run_scenario(const Scenario& s, ScenarioRunner& runner) {
  ScenarioReport out;
  out.id = s.id;
  try {
    if (s.id == "act-sweep") {
      act_sweep(s, runner, out);
    } else if (s.id == "bramac-compare") {
      bramac_compare(s, runner, out);
    } else if (s.id == "ablation") {
      ablation(s, runner, out);
    } else if (s.id == "iso-area") {
      iso_area(s, runner, out);
    } else if (s.id == "mixed-weights") {
      mixed_weights(s, runner, out);
    } else {
      throw ConfigError("unknown scenario '" + s.id + "'");
    }
  } catch (const InfeasibleError& e) {
    throw InfeasibleError("scenario " + s.id + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError("scenario " + s.id + ": " + e.what());
  } catch (const Error& e) {
    throw Error("scenario " + s.id + ": " + e.what());
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw ConfigError("cannot write " + tmp.string());
    }
    f << text;
    if (!f) {
      throw ConfigError("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::filesystem::path write_report(const ScenarioReport& report, const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / (report.id + ".csv");
  write_file_atomic(path, report.csv());
  return path;
}

double geomean(const std::vector<double>& v) {
  if (v.empty()) {
    throw ConfigError("geometric mean of an empty set");
  }
  double acc = 0;
  for (double x : v) {
    if (!(x > 0)) {
      throw ConfigError("geometric mean needs positive values");
    }
    acc += std::log(x);
  }
  return std::exp(acc / static_cast<double>(v.size()));
}

} // namespace m4bram
