#include "m4bram/block.hpp"

#include <bit>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "m4bram/error.hpp"

namespace m4bram {

RawInstruction encode_instruction(const CimInstruction& i) {
  if (i.addr_row < 0 || i.addr_row > 127) {
    throw EncodingError("addr_row out of range: " + std::to_string(i.addr_row));
  }
  if (i.addr_col < 0 || i.addr_col > 4) {
    throw EncodingError("addr_col out of range: " + std::to_string(i.addr_col));
  }
  if (i.addr_dp < 0 || i.addr_dp > 3) {
    throw EncodingError("addr_dp out of range: " + std::to_string(i.addr_dp));
  }
  if (i.be_payload > 0xF) {
    throw EncodingError("byte-enable payload wider than 4 bits");
  }
  RawInstruction raw;
  raw.addr_a = static_cast<std::uint16_t>((i.addr_row << 5) | (i.addr_col << 2) | i.addr_dp);
  for (int k = 0; k < 4; ++k) {
    raw.data_a |= static_cast<std::uint32_t>(i.activations[k]) << (8 * k);
  }
  raw.byte_enable = i.be_payload;
  raw.in_clr = i.in_clr;
  return raw;
}

CimInstruction decode_instruction(const RawInstruction& raw) {
  if (raw.addr_a > 0xFFF) {
    throw EncodingError("port-A address wider than 12 bits");
  }
  if (raw.byte_enable > 0xF) {
    throw EncodingError("byte enable wider than 4 bits");
  }
  CimInstruction i;
  i.addr_row = raw.addr_a >> 5;
  i.addr_col = (raw.addr_a >> 2) & 0x7;
  i.addr_dp = raw.addr_a & 0x3;
  if (i.addr_col > 4) {
    throw EncodingError("reserved column address " + std::to_string(i.addr_col));
  }
  for (int k = 0; k < 4; ++k) {
    i.activations[k] = static_cast<std::uint8_t>(raw.data_a >> (8 * k));
  }
  i.be_payload = raw.byte_enable;
  i.in_clr = raw.in_clr;
  if (i.in_clr) {
    if ((i.be_payload & 0x7) == 0) {
      throw EncodingError("inClr payload encodes 1-bit activations");
    }
  } else if (i.be_payload & kFlagReserved) {
    throw EncodingError("reserved flag bit set");
  }
  return i;
}

std::uint8_t encode_act_config(int act_bits, bool act_signed) {
  validate_act_bits(act_bits);
  return static_cast<std::uint8_t>((act_signed ? 0x8 : 0) | (act_bits - 1));
}

void decode_act_config(std::uint8_t payload, int& act_bits, bool& act_signed) {
  if (payload > 0xF || (payload & 0x7) == 0) {
    throw EncodingError("invalid activation config payload");
  }
  act_bits = (payload & 0x7) + 1;
  act_signed = (payload & 0x8) != 0;
}

std::array<std::uint8_t, 4> shuffle(std::uint32_t word, int dp, int addr_dp) {
  const auto s = shuffle_slices<8>(word, dp, addr_dp);
  return {static_cast<std::uint8_t>(s[0]), static_cast<std::uint8_t>(s[1]),
          static_cast<std::uint8_t>(s[2]), static_cast<std::uint8_t>(s[3])};
}

std::string to_string(EfsmState s) {
  switch (s) {
  case EfsmState::Idle:
    return "idle";
  case EfsmState::Recv1:
    return "recv1";
  case EfsmState::Recv2:
    return "recv2";
  case EfsmState::Compute:
    return "compute";
  case EfsmState::Accum:
    return "accum";
  case EfsmState::ReadoutReady:
    return "readout_ready";
  }
  return "?";
}

std::string to_string(PortAStatus s) {
  switch (s) {
  case PortAStatus::Idle:
    return "idle";
  case PortAStatus::Written:
    return "written";
  case PortAStatus::Accepted:
    return "accepted";
  case PortAStatus::IssueRejected:
    return "issue_rejected";
  case PortAStatus::WriteRejected:
    return "write_rejected";
  }
  return "?";
}

M4Block::M4Block(BlockConfig config) : config_(config), mem_(kPhysicalWords, 0) {
  validate_weight_bits(config_.weight_bits);
  if (config_.dp != 1 && config_.dp != 2 && config_.dp != 4) {
    throw ConfigError("duplication factor must be 1, 2 or 4");
  }
  for (int j = 0; j < 4; ++j) {
    bpes_.emplace_back(config_.variant, config_.weight_bits, config_.accumulator);
  }
}

int M4Block::readout_base() const { return kLogicalWords - readout_words(); }

int M4Block::pending_readout_words() const {
  return std::popcount(readout_pending_mask_);
}

int M4Block::compute_steps() const {
  return config_.variant.pumping == Pumping::DoublePumped ? (act_bits_ + 1) / 2 : act_bits_;
}

std::uint32_t M4Block::word(int index) const {
  if (index < 0 || index >= kPhysicalWords) {
    throw RangeError("word index out of range: " + std::to_string(index));
  }
  return mem_[index];
}

void M4Block::poke(int index, std::uint32_t value) {
  if (index < 0 || index >= kPhysicalWords) {
    throw RangeError("word index out of range: " + std::to_string(index));
  }
  mem_[index] = value;
}

ClockOutput M4Block::clock(const std::optional<PortARequest>& a,
                           const std::optional<PortBRequest>& b) {
  ClockOutput out;
  // Read-first: port B observes the array before this cycle's write.
  if (b) {
    out.port_b_data = serve_port_b(*b, out.dsp_stalled);
  }
  if (config_.mode == BlockMode::Memory) {
    if (a) {
      plain_write(*a);
      out.port_a = PortAStatus::Written;
    }
    ++cycle_;
    return out;
  }

  if (state_ == EfsmState::Recv2 || state_ == EfsmState::Compute) {
    if (a) {
      if (a->wen_b) {
        out.port_a = PortAStatus::IssueRejected;
      } else {
        plain_write(*a);
        out.port_a = PortAStatus::Written;
      }
    }
    step_ = state_ == EfsmState::Recv2 ? 1 : step_ + 1;
    state_ = EfsmState::Compute;
    if (step_ == compute_steps()) {
      finish_mac2();
    }
  } else if (a) {
    out.port_a = handle_port_a(*a);
  }
  ++cycle_;
  return out;
}

std::optional<std::uint32_t> M4Block::serve_port_b(const PortBRequest& b, bool& stalled) {
  if (b.addr >= kLogicalWords) {
    throw RangeError("port-B address out of range: " + std::to_string(b.addr));
  }
  if (config_.mode == BlockMode::Compute && b.addr >= readout_base()) {
    if (state_ != EfsmState::ReadoutReady) {
      throw StateError("result window read while eFSM is " + to_string(state_));
    }
    const int k = b.addr - readout_base();
    readout_pending_mask_ &= ~(1u << k);
    stalled = true;
    if (readout_pending_mask_ == 0) {
      state_ = EfsmState::Idle;
    }
    return readout_image_[k];
  }
  return mem_[b.addr];
}

void M4Block::plain_write(const PortARequest& a) {
  if (a.addr >= kLogicalWords) {
    throw RangeError("port-A address out of range: " + std::to_string(a.addr));
  }
  std::uint32_t mask = 0;
  for (int k = 0; k < 4; ++k) {
    if ((a.byte_enable >> k) & 1u) {
      mask |= 0xFFu << (8 * k);
    }
  }
  mem_[a.addr] = (mem_[a.addr] & ~mask) | (a.data & mask);
}

PortAStatus M4Block::handle_port_a(const PortARequest& a) {
  if (!a.wen_b) {
    if (state_ == EfsmState::Recv1) {
      return PortAStatus::WriteRejected;
    }
    plain_write(a);
    return PortAStatus::Written;
  }
  const CimInstruction i = decode_instruction({a.addr, a.data, a.byte_enable, a.in_clr});
  if (state_ == EfsmState::Recv1) {
    if (i.in_clr || (i.be_payload & kFlagFirst)) {
      throw ProtocolError("expected the second instruction of a MAC2 pair");
    }
    if (i.addr_dp != first_.addr_dp) {
      throw ProtocolError("addr_dp differs between the two instructions of a pair");
    }
    accept_second(i);
    return PortAStatus::Accepted;
  }
  if (i.in_clr) {
    decode_act_config(i.be_payload, act_bits_, act_signed_);
    return PortAStatus::Accepted;
  }
  if (!(i.be_payload & kFlagFirst)) {
    throw ProtocolError("MAC2 pair must start with a first-of-pair instruction");
  }
  accept_first(i);
  return PortAStatus::Accepted;
}

std::array<std::uint32_t, 4> M4Block::fetch_slices(const CimInstruction& i) const {
  const int index = i.addr_row * kCols + i.addr_col;
  if (config_.variant.kind == VariantKind::S) {
    return shuffle_slices<8>(mem_[index], config_.dp, i.addr_dp);
  }
  // Banked fetch: row r and row r+64 read together, bank 0 in the low half.
  if (i.addr_row >= kRows / 2) {
    throw RangeError("banked fetch needs addr_row < 64, got " + std::to_string(i.addr_row));
  }
  const std::uint64_t wide =
      mem_[index] | (static_cast<std::uint64_t>(mem_[index + (kRows / 2) * kCols]) << 32);
  return shuffle_slices<16>(wide, config_.dp, i.addr_dp);
}

std::int64_t M4Block::activation_value(std::uint8_t raw) const {
  return act_signed_ ? static_cast<std::int8_t>(raw) : raw;
}

void M4Block::accept_first(const CimInstruction& i) {
  for (std::uint8_t act : i.activations) {
    check_activation(activation_value(act), act_bits_, act_signed_);
  }
  first_ = i;
  w1_slices_ = fetch_slices(i);
  readout_pending_mask_ = 0;
  issue_cycle_ = cycle_;
  state_ = EfsmState::Recv1;
}

void M4Block::accept_second(const CimInstruction& i) {
  for (std::uint8_t act : i.activations) {
    check_activation(activation_value(act), act_bits_, act_signed_);
  }
  second_ = i;
  const auto w2 = fetch_slices(i);
  for (int j = 0; j < 4; ++j) {
    bpes_[j].load_weights(w1_slices_[j], w2[j], config_.variant.slice_bits());
  }
  state_ = EfsmState::Recv2;
  step_ = 0;
}

void M4Block::finish_mac2() {
  const bool accumulate = first_.be_payload & kFlagAccumulate;
  for (int j = 0; j < 4; ++j) {
    bpes_[j].mac2_rowwise(activation_value(first_.activations[j]),
                          activation_value(second_.activations[j]), act_bits_, act_signed_,
                          accumulate);
  }
  result_cycle_ = cycle_ + 1;
  if (first_.be_payload & kFlagLast) {
    readout_image_.clear();
    for (const Bpe& bpe : bpes_) {
      const std::uint64_t image = bpe.accumulator_image();
      readout_image_.push_back(static_cast<std::uint32_t>(image));
      if (config_.variant.kind == VariantKind::L) {
        readout_image_.push_back(static_cast<std::uint32_t>(image >> 32));
      }
    }
    readout_pending_mask_ = (1u << readout_words()) - 1;
    state_ = EfsmState::ReadoutReady;
  } else {
    state_ = EfsmState::Accum;
  }
}

std::vector<std::uint32_t> M4Block::readout() {
  if (state_ != EfsmState::ReadoutReady) {
    throw StateError("readout requested while eFSM is " + to_string(state_));
  }
  std::vector<std::uint32_t> words;
  const int base = readout_base();
  for (int k = 0; k < readout_words(); ++k) {
    words.push_back(*clock(std::nullopt, PortBRequest{static_cast<std::uint16_t>(base + k)})
                         .port_b_data);
  }
  return words;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) {
    const auto b = f.find_first_not_of(" \t\r");
    const auto e = f.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : f.substr(b, e - b + 1));
  }
  return fields;
}

std::uint64_t parse_number(const std::string& s, int line_no, const char* field) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 0);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw ParseError("trace line " + std::to_string(line_no) + ": bad " + field + " '" + s +
                     "'");
  }
}

} // namespace

std::vector<TraceLine> parse_trace(std::istream& in) {
  std::vector<TraceLine> lines;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    const auto hash = text.find('#');
    if (hash != std::string::npos) {
      text.resize(hash);
    }
    if (text.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto f = split_fields(text);
    if (f.size() != 8) {
      throw ParseError("trace line " + std::to_string(line_no) + ": expected 8 fields, got " +
                       std::to_string(f.size()));
    }
    if (f[0] == "cycle") {
      continue; // header
    }
    TraceLine t;
    t.cycle = parse_number(f[0], line_no, "cycle");
    if (!lines.empty() && t.cycle <= lines.back().cycle) {
      throw ParseError("trace line " + std::to_string(line_no) + ": cycles must increase");
    }
    if (f[1] == "wr") {
      PortARequest a;
      a.addr = static_cast<std::uint16_t>(parse_number(f[2], line_no, "portA_addr"));
      a.data = static_cast<std::uint32_t>(parse_number(f[3], line_no, "portA_data"));
      a.byte_enable = static_cast<std::uint8_t>(parse_number(f[4], line_no, "be"));
      a.in_clr = parse_number(f[5], line_no, "inClr") != 0;
      a.wen_b = parse_number(f[6], line_no, "wenB") != 0;
      t.port_a = a;
    } else if (f[1] != "nop") {
      throw ParseError("trace line " + std::to_string(line_no) + ": unknown portA_op '" + f[1] +
                       "'");
    }
    if (f[7] != "-") {
      t.port_b = PortBRequest{static_cast<std::uint16_t>(parse_number(f[7], line_no, "portB_addr"))};
    }
    lines.push_back(t);
  }
  return lines;
}

void write_trace(std::ostream& out, const std::vector<TraceLine>& lines) {
  out << "cycle,portA_op,portA_addr,portA_data,be,inClr,wenB,portB_addr\n";
  for (const auto& t : lines) {
    out << t.cycle << ',';
    if (t.port_a) {
      const auto& a = *t.port_a;
      char buf[64];
      std::snprintf(buf, sizeof buf, "wr,0x%03X,0x%08X,0x%X,%d,%d", a.addr, a.data,
                    a.byte_enable, a.in_clr ? 1 : 0, a.wen_b ? 1 : 0);
      out << buf;
    } else {
      out << "nop,0,0,0,0,0";
    }
    out << ',';
    if (t.port_b) {
      out << t.port_b->addr;
    } else {
      out << '-';
    }
    out << '\n';
  }
}

void replay_trace(M4Block& block, const std::vector<TraceLine>& lines, std::ostream& out) {
  out << "cycle,portB_data,dsp_stalled,portA_status,efsm_state\n";
  auto emit = [&](std::uint64_t cycle, const ClockOutput& o) {
    out << cycle << ',';
    if (o.port_b_data) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%08X", *o.port_b_data);
      out << buf;
    } else {
      out << '-';
    }
    out << ',' << (o.dsp_stalled ? 1 : 0) << ',' << to_string(o.port_a) << ','
        << to_string(block.state()) << '\n';
  };
  for (const auto& t : lines) {
    while (block.cycle() < t.cycle) {
      const auto c = block.cycle();
      emit(c, block.clock(std::nullopt, std::nullopt));
    }
    const auto c = block.cycle();
    emit(c, block.clock(t.port_a, t.port_b));
  }
}

} // namespace m4bram
