#include "encsim/cpu.hpp"

#include <algorithm>
#include <cstring>

namespace encsim {

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::SH: return "sh";
    case Policy::SL: return "sl";
    case Policy::Naive: return "naive";
    case Policy::ConstLatency: return "constlat";
  }
  return "?";
}

std::optional<Policy> policy_from_name(const std::string& s) {
  for (Policy p : {Policy::SH, Policy::SL, Policy::Naive, Policy::ConstLatency})
    if (s == policy_name(p)) return p;
  return std::nullopt;
}

Configuration init_config(const MemoryImage& M, const DevicePtr& D) {
  Configuration c;
  c.dev = D->init();
  c.M = M;
  c.R = make_rinit(M);
  c.pcold = 0xFFFE;
  return c;
}

Configuration init_config(const PartialMemory& ctx, const PartialMemory& mod, const Layout& L, const DevicePtr& D) {
  return init_config(assemble_whole_program(ctx, mod, L), D);
}

namespace {

void to_exception(Configuration& c) {
  c.B = Backup{};
  c.t_a.reset();
  c.R = make_r0();
  c.R.r[PC] = c.M.read_word(0xFFFE) & 0xFFFE;
  c.pcold = 0xFFFE;
}

void wrap(const Machine& m, Configuration& c, std::uint64_t k) {
  auto w = dwrap(*m.D, k, c.dev, c.t, c.t_a);
  c.dev = w.state;
  c.t = w.t;
  c.t_a = w.t_a;
}

Mode mode_at(const Machine& m, const RegisterFile& R) { return mode_of(m.L, R[PC]); }

void set(const Machine& m, RegisterFile& R, int r, Word w) { reg_set(R, r, w, mode_at(m, R)); }

void push_dispatch(const Machine& m, Configuration& c) {
  Word sp = c.R[SP];
  c.M.write_word(static_cast<Addr>(sp - 2), c.R[PC]);
  c.M.write_word(static_cast<Addr>(sp - 4), c.R[SR]);
  set(m, c.R, PC, m.L.isr);
  set(m, c.R, SR, 0);
  set(m, c.R, SP, static_cast<Word>(sp - 4));
}

void um_dispatch(const Machine& m, Configuration& c) {
  push_dispatch(m, c);
  auto w = dwrap(*m.D, 6, c.dev, c.t, std::nullopt);
  c.dev = w.state;
  c.t = w.t;
  c.t_a = w.t_a;
}

void pm_dispatch(const Machine& m, Configuration& c, bool keep_pad) {
  std::uint64_t x = std::min<std::uint64_t>(c.t - *c.t_a, MAX_TIME);
  std::uint64_t k = MAX_TIME - x;
  c.B = Backup{Backup::Full, c.R, c.pcold, keep_pad ? static_cast<std::uint32_t>(x) : 0u};
  c.R = make_r0();
  c.R.r[PC] = m.L.isr & 0xFFFE;
  auto w = dwrap(*m.D, 6 + k, c.dev, c.t, std::nullopt);
  c.dev = w.state;
  c.t = w.t;
  c.t_a.reset();
}

void naive_pm_dispatch(const Machine& m, Configuration& c) {
  Backup b{Backup::Full, c.R, c.pcold, 0};
  um_dispatch(m, c);
  c.B = b;
}

Word flags_arith(Word result, bool overflow) {
  Word f = 0;
  if (result & 0x8000) f |= kFlagN;
  if (result == 0) f |= kFlagZ;
  if (result != 0) f |= kFlagC;
  if (overflow) f |= kFlagV;
  return f;
}

void set_flags(const Machine& m, RegisterFile& R, Word f) {
  constexpr Word mask = kFlagC | kFlagZ | kFlagN | kFlagV;
  set(m, R, SR, static_cast<Word>((R[SR] & ~mask) | f));
}

bool add_overflow(Word a, Word b, Word r) { return ((a ^ r) & (b ^ r) & 0x8000) != 0; }
bool sub_overflow(Word a, Word b, Word r) { return ((a ^ b) & (a ^ r) & 0x8000) != 0; }

}  // namespace

Configuration except_config(const Configuration& c) {
  Configuration e = c;
  to_exception(e);
  return e;
}

void interrupt_logic(const Machine& m, Configuration& c) {
  if (m.policy == Policy::SH) return;
  if (!status_flag(c.R, Flag::GIE) || !c.t_a) return;
  bool pm = mode_of(m.L, c.pcold) == Mode::PM;
  switch (m.policy) {
    case Policy::SH: return;
    case Policy::SL:
      if (pm)
        pm_dispatch(m, c, true);
      else
        um_dispatch(m, c);
      return;
    case Policy::ConstLatency:
      if (pm)
        pm_dispatch(m, c, false);
      else
        um_dispatch(m, c);
      return;
    case Policy::Naive:
      if (pm)
        naive_pm_dispatch(m, c);
      else
        um_dispatch(m, c);
      return;
  }
}

Rule step_inplace(const Machine& m, Configuration& c) {
  if (c.B.kind == Backup::PadOnly) {
    std::uint32_t tp = c.B.t_pad;
    c.B = Backup{};
    wrap(m, c, tp);
    interrupt_logic(m, c);
    return Rule::RetiPad;
  }

  const Addr pc = c.R[PC];
  auto dec = decode(c.M, pc);
  if (!dec) {
    to_exception(c);
    return Rule::DecodeFail;
  }
  const Instruction i = *dec;
  const int cyc = cycles(i);
  const Mode mode = mode_of(m.L, pc);

  if (i.op == Op::HLT) {
    if (mode == Mode::UM) {
      c.halted = true;
      return Rule::HaltUM;
    }
    c.t += cyc;
    to_exception(c);
    return Rule::HaltPM;
  }

  const bool has_backup = c.B.kind != Backup::None;
  if (!mac_ok(m.L, i, c.pcold, c.R, has_backup)) {
    c.t += cyc;
    to_exception(c);
    return Rule::Violation;
  }

  if (i.op == Op::RETI) {
    if (!has_backup) {
      Word sp = c.R[SP];
      Word new_pc = c.M.read_word(static_cast<Addr>(sp + 2));
      Word new_sr = c.M.read_word(sp);
      set(m, c.R, PC, new_pc);
      set(m, c.R, SR, new_sr);
      set(m, c.R, SP, static_cast<Word>(sp + 4));
      wrap(m, c, cyc);
      c.pcold = pc;
      return Rule::Reti;
    }
    wrap(m, c, cyc);
    if (status_flag(c.R, Flag::GIE) && c.t_a) {
      c.pcold = pc;
      interrupt_logic(m, c);
      return Rule::RetiChain;
    }
    c.R = c.B.R;
    c.pcold = c.B.pcold;
    c.B = Backup{Backup::PadOnly, RegisterFile{}, 0, c.B.t_pad};
    return Rule::RetiPrePad;
  }

  RegisterFile& R = c.R;
  const RegisterFile old = R;
  auto advance = [&](int bytes) { set(m, R, PC, static_cast<Word>(pc + bytes)); };

  switch (i.op) {
    case Op::NOP: advance(2); break;
    case Op::NOT:
      advance(4);
      set(m, R, i.r2, static_cast<Word>(~old[i.r2]));
      break;
    case Op::IN: {
      auto r = c.dev;
      auto got = m.D->read(r);
      if (!got) return Rule::Stuck;
      c.dev = got->second;
      advance(2);
      set(m, R, i.r2, got->first);
      break;
    }
    case Op::OUT:
      c.dev = m.D->write(c.dev, old[i.r2]);
      advance(2);
      break;
    case Op::AND: {
      advance(2);
      Word res = old[i.r1] & old[i.r2];
      set(m, R, i.r2, res);
      set_flags(m, R, flags_arith(R[i.r2], false));
      break;
    }
    case Op::JMP: set(m, R, PC, old[i.r2]); break;
    case Op::JZ:
      if (status_flag(old, Flag::Z))
        set(m, R, PC, old[i.r2]);
      else
        advance(2);
      break;
    case Op::MOV:
      advance(2);
      set(m, R, i.r2, old[i.r1]);
      break;
    case Op::MOVL:
      advance(2);
      set(m, R, i.r2, c.M.read_word(old[i.r1]));
      break;
    case Op::MOVS:
      c.M.write_word(old[i.r2], old[i.r1]);
      advance(4);
      break;
    case Op::MOVI:
      advance(4);
      set(m, R, i.r2, i.imm);
      break;
    case Op::ADD: {
      advance(2);
      Word a = old[i.r1], b = old[i.r2];
      Word res = static_cast<Word>(a + b);
      set(m, R, i.r2, res);
      set_flags(m, R, flags_arith(R[i.r2], add_overflow(a, b, res)));
      break;
    }
    case Op::SUB: {
      advance(2);
      Word a = old[i.r1], b = old[i.r2];
      Word res = static_cast<Word>(a - b);
      set(m, R, i.r2, res);
      set_flags(m, R, flags_arith(R[i.r2], sub_overflow(a, b, res)));
      break;
    }
    case Op::CMP: {
      advance(2);
      Word a = old[i.r1], b = old[i.r2];
      Word res = static_cast<Word>(a - b);
      set_flags(m, R, flags_arith(res, sub_overflow(a, b, res)));
      break;
    }
    case Op::RETI:
    case Op::HLT: break;
  }
  wrap(m, c, cyc);
  c.pcold = pc;
  interrupt_logic(m, c);
  return Rule::Exec;
}

Configuration step(const Machine& m, const Configuration& c) {
  Configuration n = c;
  if (step_inplace(m, n) == Rule::Stuck) throw Error(Errc::StuckConfiguration, "no read enabled for IN");
  return n;
}

RunOutcome run(const Machine& m, Configuration c, std::uint64_t fuel) {
  RunOutcome out;
  while (!c.halted && out.steps < fuel) {
    if (step_inplace(m, c) == Rule::Stuck) {
      out.kind = RunOutcome::Stuck;
      out.last = std::move(c);
      return out;
    }
    ++out.steps;
  }
  out.kind = c.halted ? RunOutcome::Terminated : RunOutcome::OutOfFuel;
  out.last = std::move(c);
  return out;
}

// ---- checkpoints

namespace {

struct Writer {
  std::vector<std::uint8_t> b;
  void u8(std::uint8_t v) { b.push_back(v); }
  void u16(std::uint16_t v) {
    u8(v & 0xFF);
    u8(v >> 8);
  }
  void u32(std::uint32_t v) {
    u16(v & 0xFFFF);
    u16(v >> 16);
  }
  void u64(std::uint64_t v) {
    u32(v & 0xFFFFFFFFu);
    u32(v >> 32);
  }
  void regs(const RegisterFile& R) {
    for (Word w : R.r) u16(w);
  }
};

struct Reader {
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;
  std::uint8_t u8() {
    if (pos >= b.size()) throw Error(Errc::ParseError, "truncated checkpoint");
    return b[pos++];
  }
  std::uint16_t u16() {
    std::uint16_t lo = u8();
    return static_cast<std::uint16_t>(lo | u8() << 8);
  }
  std::uint32_t u32() {
    std::uint32_t lo = u16();
    return lo | static_cast<std::uint32_t>(u16()) << 16;
  }
  std::uint64_t u64() {
    std::uint64_t lo = u32();
    return lo | static_cast<std::uint64_t>(u32()) << 32;
  }
  RegisterFile regs() {
    RegisterFile R;
    for (auto& w : R.r) w = u16();
    return R;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize(const Configuration& c) {
  Writer w;
  for (char ch : {'E', 'N', 'C', 'K'}) w.u8(static_cast<std::uint8_t>(ch));
  w.u16(1);
  w.u8(static_cast<std::uint8_t>((c.halted ? 1 : 0) | (c.t_a ? 2 : 0)));
  w.u8(c.B.kind);
  w.regs(c.B.R);
  w.u16(c.B.pcold);
  w.u32(c.B.t_pad);
  w.u64(c.dev);
  w.u64(c.t);
  w.u64(c.t_a.value_or(0));
  w.u16(c.pcold);
  w.regs(c.R);
  w.b.insert(w.b.end(), c.M.data(), c.M.data() + MemoryImage::kSize);
  return w.b;
}

Configuration deserialize(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  for (char ch : {'E', 'N', 'C', 'K'})
    if (r.u8() != static_cast<std::uint8_t>(ch)) throw Error(Errc::ParseError, "not a checkpoint");
  if (r.u16() != 1) throw Error(Errc::ParseError, "unsupported checkpoint version");
  Configuration c;
  std::uint8_t flags = r.u8();
  c.halted = flags & 1;
  std::uint8_t kind = r.u8();
  if (kind > Backup::PadOnly) throw Error(Errc::ParseError, "bad backup kind");
  c.B.kind = static_cast<Backup::Kind>(kind);
  c.B.R = r.regs();
  c.B.pcold = r.u16();
  c.B.t_pad = r.u32();
  c.dev = r.u64();
  c.t = r.u64();
  std::uint64_t ta = r.u64();
  if (flags & 2) c.t_a = ta;
  c.pcold = r.u16();
  c.R = r.regs();
  if (bytes.size() - r.pos != MemoryImage::kSize) throw Error(Errc::ParseError, "bad checkpoint memory size");
  std::memcpy(c.M.data(), bytes.data() + r.pos, MemoryImage::kSize);
  return c;
}

}  // namespace encsim
