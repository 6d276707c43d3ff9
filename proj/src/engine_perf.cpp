#include "m4bram/engine_perf.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "m4bram/error.hpp"

namespace m4bram {

namespace {

std::vector<ArchitectureProfile> build_table() {
  // clang-format off
  return {
      {ArchKind::M4BRAM_S, "M4BRAM-S", 4, 7, 32, {1, 2, 4}, 1, 0.196, true, true, false, true, true},
      {ArchKind::M4BRAM_L, "M4BRAM-L", 4, 7, 64, {1, 2, 4}, 1, 0.334, true, true, false, true, true},
      {ArchKind::BRAMAC_1DA, "BRAMAC-1DA", 1, 7, 160, {1}, 2, 0.169, false, true, false, false, true},
      {ArchKind::BRAMAC_2SA, "BRAMAC-2SA", 2, 7, 160, {2}, 2, 0.338, false, false, false, false, true},
      {ArchKind::PlainBram, "M20K", 0, 0, 0, {}, 0, 0.0, true, false, false, false, true},
      {ArchKind::CCB, "CCB", 0, 0, 0, {1}, 2, 0.168, false, false, true, true, false},
      {ArchKind::CoMeFa_D, "CoMeFa-D", 0, 0, 0, {1}, 2, 0.254, false, false, true, true, false},
      {ArchKind::CoMeFa_A, "CoMeFa-A", 0, 0, 0, {1}, 2, 0.081, false, true, true, true, false},
  };
  // clang-format on
}

} // namespace

const std::vector<ArchitectureProfile>& architecture_table() {
  static const std::vector<ArchitectureProfile> table = build_table();
  return table;
}

const ArchitectureProfile& profile(ArchKind kind) {
  for (const auto& p : architecture_table()) {
    if (p.kind == kind) {
      return p;
    }
  }
  throw UnsupportedProfileError("unknown architecture profile");
}

void require_instantiable(const ArchitectureProfile& p) {
  if (!p.instantiable) {
    throw UnsupportedProfileError(p.name + " is metadata only and cannot be simulated");
  }
}

int mac2_period(const Variant& variant, int act_bits) {
  validate_act_bits(act_bits);
  return variant.pumping == Pumping::DoublePumped ? (act_bits + 1) / 2 + 2 : act_bits + 2;
}

EngineRate m4bram_peak_rate(const Variant& variant, const PrecisionConfig& p) {
  p.validate();
  const int period = mac2_period(variant, p.act_bits);
  return {Rational(4 * lanes_per_bpe(variant, p.weight_bits) * 2, period), period,
          variant.readout_words()};
}

int bramac_weights_per_array(int precision_bits) {
  if (precision_bits != 2 && precision_bits != 4 && precision_bits != 8) {
    throw UnsupportedProfileError("BRAMAC supports 2, 4 or 8-bit operands only");
  }
  return 40 / precision_bits;
}

EngineRate bramac_peak_rate(const ArchitectureProfile& profile, int precision_bits) {
  const int w = bramac_weights_per_array(precision_bits);
  const int readout = profile.dummy_cols / 32;
  switch (profile.kind) {
  case ArchKind::BRAMAC_1DA: {
    const int period = (precision_bits + 1) / 2 + 2;
    return {Rational(w * 2, period), period, readout};
  }
  case ArchKind::BRAMAC_2SA: {
    const int period = precision_bits + 2;
    return {Rational(2 * w * 2, period), period, 2 * readout};
  }
  default:
    throw UnsupportedProfileError(profile.name + " is not a BRAMAC profile");
  }
}

EngineRate bramac_peak_rate(const ArchitectureProfile& profile, const PrecisionConfig& p) {
  if (p.weight_bits != p.act_bits) {
    throw UnsupportedProfileError(profile.name +
                                  " needs equal weight and activation precision");
  }
  return bramac_peak_rate(profile, p.weight_bits);
}

EngineRate dsp_engine_rate(int dsp_blocks, const PrecisionConfig& p, const DspModel& dsp) {
  if (dsp_blocks < 0) {
    throw ConfigError("negative DSP block count");
  }
  const auto n = packing_factor(p, dsp);
  return {Rational(static_cast<std::int64_t>(dsp_blocks) * dsp.multipliers_per_block * n), 1, 0};
}

BlockEngine block_engine(const ArchitectureProfile& profile, Pumping pumping,
                         const PrecisionConfig& p, int n_i) {
  require_instantiable(profile);
  if (profile.is_m4bram()) {
    const Variant v{profile.kind == ArchKind::M4BRAM_S ? VariantKind::S : VariantKind::L, pumping};
    for (const auto& opt : parallelism_options(v, p.weight_bits)) {
      if (opt.n_i == n_i) {
        return {opt.n_w, opt.n_i, mac2_period(v, p.act_bits), v.readout_words(), 0};
      }
    }
    throw ConfigError("n_i must be 1, 2 or 4");
  }
  if (profile.is_bramac()) {
    const EngineRate r = bramac_peak_rate(profile, p);
    const int fixed_ni = profile.n_i_options.front();
    if (n_i != fixed_ni) {
      throw UnsupportedProfileError(profile.name + " only supports n_i = " +
                                    std::to_string(fixed_ni));
    }
    return {bramac_weights_per_array(p.weight_bits), fixed_ni, r.mac2_period_cycles, 0,
            r.readout_stall_cycles};
  }
  throw UnsupportedProfileError(profile.name + " has no compute engine");
}

std::string arch_csv_table() {
  std::ostringstream os;
  os << "name,dummy_arrays,dummy_rows,dummy_cols,n_i_options,ports_occupied,m20k_area_overhead,"
        "dsp_access_during_cim,multi_pumping,transposed_layout,mixed_precision\n";
  for (const auto& p : architecture_table()) {
    os << p.name << ',' << p.dummy_arrays << ',' << p.dummy_rows << ',' << p.dummy_cols << ',';
    for (std::size_t k = 0; k < p.n_i_options.size(); ++k) {
      os << (k ? "|" : "") << p.n_i_options[k];
    }
    char ovh[16];
    std::snprintf(ovh, sizeof ovh, "%.3f", p.m20k_area_overhead);
    os << ',' << p.ports_occupied_in_cim << ',' << ovh << ','
       << p.allows_dsp_access_during_cim << ',' << p.supports_double_pumping << ','
       << p.transposed_layout << ',' << p.mixed_precision << '\n';
  }
  return os.str();
}

} // namespace m4bram
