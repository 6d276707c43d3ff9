#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "m4bram/bpe.hpp"
#include "m4bram/precision.hpp"

namespace m4bram {

/// Decoded port-A write carrying a CIM instruction.
struct CimInstruction {
  int addr_row = 0; ///< 0..127
  int addr_col = 0; ///< 0..4
  int addr_dp = 0;  ///< 2-bit shuffler select
  std::array<std::uint8_t, 4> activations{}; ///< byte j feeds BPE j
  std::uint8_t be_payload = 0;
  bool in_clr = false;

  friend bool operator==(const CimInstruction&, const CimInstruction&) = default;
};

/// Port-level image of an instruction.
struct RawInstruction {
  std::uint16_t addr_a = 0; ///< {row[6:0], col[2:0], dp[1:0]}
  std::uint32_t data_a = 0;
  std::uint8_t byte_enable = 0;
  bool in_clr = false;

  friend bool operator==(const RawInstruction&, const RawInstruction&) = default;
};

// byte-enable flags when inClr is low
inline constexpr std::uint8_t kFlagFirst = 0x1;
inline constexpr std::uint8_t kFlagAccumulate = 0x2;
inline constexpr std::uint8_t kFlagLast = 0x4;
inline constexpr std::uint8_t kFlagReserved = 0x8;

RawInstruction encode_instruction(const CimInstruction& i);
CimInstruction decode_instruction(const RawInstruction& raw);

/// inClr payload: bit 3 = activation signedness, bits [2:0] = act_bits - 1.
std::uint8_t encode_act_config(int act_bits, bool act_signed);
void decode_act_config(std::uint8_t payload, int& act_bits, bool& act_signed);

/// Duplication shuffler over 4 slices of SliceBits each (8 for S, 16 for L).
/// dp=1 passes slices straight through, dp=2 repeats the half picked by
/// addr_dp bit 1, dp=4 broadcasts the slice picked by addr_dp.
template <int SliceBits>
std::array<std::uint32_t, 4> shuffle_slices(std::uint64_t word, int dp, int addr_dp) {
  const std::uint64_t mask = (std::uint64_t{1} << SliceBits) - 1;
  auto slice = [&](int k) { return static_cast<std::uint32_t>((word >> (k * SliceBits)) & mask); };
  switch (dp) {
  case 2: {
    const int base = (addr_dp >> 1) & 1 ? 2 : 0;
    return {slice(base), slice(base + 1), slice(base), slice(base + 1)};
  }
  case 4: {
    const std::uint32_t s = slice(addr_dp & 3);
    return {s, s, s, s};
  }
  default:
    return {slice(0), slice(1), slice(2), slice(3)};
  }
}

std::array<std::uint8_t, 4> shuffle(std::uint32_t word, int dp, int addr_dp);

enum class BlockMode { Memory, Compute };
enum class EfsmState { Idle, Recv1, Recv2, Compute, Accum, ReadoutReady };

std::string to_string(EfsmState s);

struct BlockConfig {
  Variant variant;
  int weight_bits = 8;
  int dp = 1; ///< duplication factor: 1, 2 or 4
  BlockMode mode = BlockMode::Compute;
  AccumulatorMode accumulator = AccumulatorMode::Wide;
};

struct PortARequest {
  std::uint16_t addr = 0;
  std::uint32_t data = 0;
  std::uint8_t byte_enable = 0xF;
  bool in_clr = false;
  bool wen_b = false; ///< in compute mode, marks the write as a CIM instruction
};

struct PortBRequest {
  std::uint16_t addr = 0;
};

enum class PortAStatus { Idle, Written, Accepted, IssueRejected, WriteRejected };

std::string to_string(PortAStatus s);

struct ClockOutput {
  std::optional<std::uint32_t> port_b_data;
  bool dsp_stalled = false; ///< port B carried BPE results this cycle
  PortAStatus port_a = PortAStatus::Idle;
};

/// Cycle-level model of one M4BRAM block. A 512x32 logical RAM backed by a
/// 128x160 physical array (640 words, word index = row*5 + col).
class M4Block {
public:
  static constexpr int kLogicalWords = 512;
  static constexpr int kPhysicalWords = 640;
  static constexpr int kRows = 128;
  static constexpr int kCols = 5;

  explicit M4Block(BlockConfig config);

  ClockOutput clock(const std::optional<PortARequest>& a, const std::optional<PortBRequest>& b);

  /// Reads every result word through port B, one cycle per word.
  std::vector<std::uint32_t> readout();

  /// First port-B address of the result window (top of the logical space).
  [[nodiscard]] int readout_base() const;
  [[nodiscard]] int readout_words() const { return config_.variant.readout_words(); }
  [[nodiscard]] int pending_readout_words() const;

  /// Bit-serial steps per MAC2: n, or ceil(n/2) when double-pumped.
  [[nodiscard]] int compute_steps() const;

  [[nodiscard]] EfsmState state() const { return state_; }
  [[nodiscard]] int compute_step() const { return step_; }
  [[nodiscard]] std::uint64_t cycle() const { return cycle_; }
  [[nodiscard]] const BlockConfig& config() const { return config_; }
  [[nodiscard]] int act_bits() const { return act_bits_; }
  [[nodiscard]] bool act_signed() const { return act_signed_; }
  [[nodiscard]] const Bpe& bpe(int j) const { return bpes_.at(j); }
  [[nodiscard]] std::optional<std::uint64_t> last_issue_cycle() const { return issue_cycle_; }
  /// First cycle in which the last MAC2 result is visible.
  [[nodiscard]] std::optional<std::uint64_t> last_result_cycle() const { return result_cycle_; }

  [[nodiscard]] std::uint32_t word(int index) const;
  void poke(int index, std::uint32_t value);

private:
  std::optional<std::uint32_t> serve_port_b(const PortBRequest& b, bool& stalled);
  PortAStatus handle_port_a(const PortARequest& a);
  void plain_write(const PortARequest& a);
  void accept_first(const CimInstruction& i);
  void accept_second(const CimInstruction& i);
  void finish_mac2();
  std::array<std::uint32_t, 4> fetch_slices(const CimInstruction& i) const;
  std::int64_t activation_value(std::uint8_t raw) const;

  BlockConfig config_;
  std::vector<std::uint32_t> mem_;
  std::vector<Bpe> bpes_;
  EfsmState state_ = EfsmState::Idle;
  int step_ = 0;
  std::uint64_t cycle_ = 0;
  int act_bits_ = 8;
  bool act_signed_ = false;

  CimInstruction first_;
  std::array<std::uint32_t, 4> w1_slices_{};
  CimInstruction second_;
  std::uint32_t readout_pending_mask_ = 0;
  std::vector<std::uint32_t> readout_image_;
  std::optional<std::uint64_t> issue_cycle_;
  std::optional<std::uint64_t> result_cycle_;
};

/// One line of a port-level stimulus trace.
struct TraceLine {
  std::uint64_t cycle = 0;
  std::optional<PortARequest> port_a;
  std::optional<PortBRequest> port_b;
};

/// Parses "cycle,portA_op,portA_addr,portA_data,be,inClr,wenB,portB_addr" lines.
/// portA_op is `nop` or `wr`; portB_addr is `-` when idle. '#' starts a comment.
std::vector<TraceLine> parse_trace(std::istream& in);
void write_trace(std::ostream& out, const std::vector<TraceLine>& lines);

/// Replays a trace and writes one CSV row per cycle:
/// cycle,portB_data,dsp_stalled,portA_status,efsm_state.
void replay_trace(M4Block& block, const std::vector<TraceLine>& lines, std::ostream& out);

} // namespace m4bram
