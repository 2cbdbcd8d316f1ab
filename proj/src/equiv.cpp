#include "encsim/equiv.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace encsim {

namespace {

constexpr Addr kFlag = 0x0200;
constexpr Addr kT0 = 0x0202;
constexpr Addr kResult = 0x0204;
constexpr Addr kReset = 0x0400;
constexpr Addr kPad2 = 0x0A00;
constexpr Addr kStack = 0x3000;

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%04x", v);
  return buf;
}

Convergence from_outcome(RunOutcome::Kind k) {
  switch (k) {
    case RunOutcome::Terminated: return Convergence::Yes;
    case RunOutcome::Stuck: return Convergence::No;
    case RunOutcome::OutOfFuel: return Convergence::Unknown;
  }
  return Convergence::Unknown;
}

bool same_regs_except_pc(const RegisterFile& a, const RegisterFile& b) {
  for (int r = 1; r < 16; ++r)
    if (a[r] != b[r]) return false;
  return true;
}

bool looks_like_exception(const CoarseObs& o, Addr reset_target) {
  if (o.R[PC] != reset_target) return false;
  for (int r = 1; r < 16; ++r)
    if (o.R[r] != 0) return false;
  return true;
}

Word enc(Op op, int r1, int r2) { return encode({op, static_cast<std::uint8_t>(r1), static_cast<std::uint8_t>(r2), 0})[0]; }

class Placer {
 public:
  Placer(const Layout& L, PartialMemory& mem) : L_(L), mem_(mem) {}

  bool free(Addr a) const {
    return !L_.is_protected(a) && !mem_.count(a) && a < 0xFFFE && !(a >= L_.isr && a < L_.isr + 2);
  }

  void place(Addr at, const std::vector<Word>& words) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::uint32_t a = at + 2 * i;
      for (std::uint32_t j = 0; j < 2; ++j) {
        std::uint32_t x = a + j;
        std::uint8_t b = static_cast<std::uint8_t>(j ? words[i] >> 8 : words[i]);
        if (x >= 0xFFFE || L_.is_protected(static_cast<Addr>(x)))
          throw Error(Errc::AnchorCollision, "gadget at " + hex(at) + " overlaps reserved memory");
        auto it = mem_.find(static_cast<Addr>(x));
        if (it != mem_.end() && it->second != b)
          throw Error(Errc::AnchorCollision, "conflicting gadgets at " + hex(x));
        mem_[static_cast<Addr>(x)] = b;
      }
    }
  }

  bool try_place(Addr at, const std::vector<Word>& words) {
    try {
      PartialMemory saved = mem_;
      try {
        place(at, words);
      } catch (...) {
        mem_ = std::move(saved);
        throw;
      }
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  Addr find_block(std::uint32_t bytes) const {
    for (std::uint32_t base = 0x0010; base + bytes <= 0xFFFE; base += 2) {
      bool ok = true;
      for (std::uint32_t i = 0; i < bytes && ok; ++i) ok = free(static_cast<Addr>(base + i));
      if (ok) return static_cast<Addr>(base);
    }
    throw Error(Errc::AnchorCollision, "no room for the anchor block");
  }

 private:
  const Layout& L_;
  PartialMemory& mem_;
};

// Device steps from c to the post-state of the next jmpOut, with the registers it exposes.
// Exception rules advance t but not the device, so they do not count.
std::optional<CoarseObs> next_exit(const Machine& m, Configuration c, std::uint64_t fuel) {
  std::uint64_t ticks = 0;
  for (std::uint64_t n = 0; n < fuel && !c.halted; ++n) {
    Snapshot pre = snapshot(m.L, c);
    Rule rule = step_inplace(m, c);
    if (rule == Rule::Stuck) return std::nullopt;
    Snapshot post = snapshot(m.L, c);
    if (rule != Rule::HaltPM && rule != Rule::Violation) ticks += post.t - pre.t;
    FineObs o;
    try {
      o = observe_step(m.L, pre, post);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (o.kind == FineObs::JmpOut) return CoarseObs{CoarseObs::JmpOut, ticks, o.R};
    if (o.kind == FineObs::Conv) return std::nullopt;
  }
  return std::nullopt;
}

Addr reset_target_of(const PartialMemory& ctx) {
  auto lo = ctx.find(0xFFFE), hi = ctx.find(0xFFFF);
  Word w = static_cast<Word>((lo == ctx.end() ? 0 : lo->second) | (hi == ctx.end() ? 0 : hi->second) << 8);
  return w & 0xFFFE;
}

}  // namespace

Module module_from_asm(const std::string& name, const AsmResult& a) {
  if (!a.layout) throw Error(Errc::LayoutViolation, name + ": module has no .layout");
  return {name, a.mod, *a.layout};
}

const char* convergence_name(Convergence c) {
  switch (c) {
    case Convergence::Yes: return "yes";
    case Convergence::No: return "no";
    case Convergence::Unknown: return "unknown";
  }
  return "?";
}

Convergence converges(const Context& C, const Module& M, Policy p, std::uint64_t fuel) {
  Machine m{M.L, C.D, p};
  return from_outcome(run(m, init_config(C.mem, M.mem, M.L, C.D), fuel).kind);
}

const char* divergence_name(Divergence d) {
  switch (d) {
    case Divergence::Register: return "register";
    case Divergence::Pc: return "pc";
    case Divergence::Timing: return "timing";
    case Divergence::ConvVsJmpOut: return "conv-vs-jmpout";
    case Divergence::JmpOutVsEmpty: return "jmpout-vs-empty";
    case Divergence::Impossible: return "impossible";
  }
  return "?";
}

DistinguishingTraces split_traces(const std::vector<CoarseObs>& a, const std::vector<CoarseObs>& b) {
  DistinguishingTraces d;
  d.full = a;
  d.full2 = b;
  std::size_t p = 0;
  while (p < a.size() && p < b.size() && a[p] == b[p]) ++p;
  d.prefix.assign(a.begin(), a.begin() + p);
  if (p < a.size()) d.b = a[p];
  if (p < b.size()) d.b2 = b[p];
  return d;
}

DivergenceShape classify_divergence(const DistinguishingTraces& d) {
  DivergenceShape s;
  if (d.prefix.size() % 2 == 0 || d.prefix.back().kind != CoarseObs::JmpIn) return s;
  auto is = [](const std::optional<CoarseObs>& o, CoarseObs::Kind k) { return o && o->kind == k; };
  if (is(d.b, CoarseObs::JmpOut) && is(d.b2, CoarseObs::JmpOut)) {
    const auto &x = *d.b, &y = *d.b2;
    if (x.R[PC] != y.R[PC]) {
      s.kind = Divergence::Pc;
    } else if (!same_regs_except_pc(x.R, y.R)) {
      s.kind = Divergence::Register;
      for (int r = 1; r < 16 && s.reg < 0; ++r)
        if (x.R[r] != y.R[r]) s.reg = r;
    } else if (x.dt != y.dt) {
      s.kind = Divergence::Timing;
    }
    return s;
  }
  if (is(d.b, CoarseObs::JmpOut) || is(d.b2, CoarseObs::JmpOut)) {
    s.x_is_first = !is(d.b, CoarseObs::JmpOut);
    const auto& x = s.x_is_first ? d.b : d.b2;
    if (!x)
      s.kind = Divergence::JmpOutVsEmpty;
    else if (x->kind == CoarseObs::Conv)
      s.kind = Divergence::ConvVsJmpOut;
  }
  return s;
}

BuiltContextMemory build_mem(const DistinguishingTraces& d, const Layout& L, Addr reset_target) {
  BuiltContextMemory bm;
  Placer pl(L, bm.mem);
  const std::vector<Word> in_pc{enc(Op::IN, 0, PC)};
  const std::vector<Word> out_in_pc{enc(Op::OUT, 0, PC), enc(Op::IN, 0, PC)};
  auto shape = classify_divergence(d);

  bm.mem[0xFFFE] = 0;  // reserve the reset vector; filled once A_EP is known
  bm.mem[0xFFFF] = 0;

  for (const auto& o : d.prefix) {
    if (o.kind != CoarseObs::JmpOut) continue;
    if (looks_like_exception(o, reset_target))
      pl.try_place(o.R[PC], in_pc);
    else
      pl.place(o.R[PC], in_pc);
  }

  auto exit_target = [&](const CoarseObs& o, bool& exc, const std::vector<Word>& code) -> std::optional<Addr> {
    if (looks_like_exception(o, reset_target)) {
      exc = true;
      return std::nullopt;
    }
    pl.place(o.R[PC], code);
    return o.R[PC];
  };

  switch (shape.kind) {
    case Divergence::Pc:
      bm.joutd = exit_target(*d.b, bm.exc, out_in_pc);
      bm.joutd2 = exit_target(*d.b2, bm.exc2, out_in_pc);
      break;
    case Divergence::Register:
    case Divergence::Timing:
      bm.joutd = exit_target(*d.b, bm.exc, in_pc);
      bm.joutd2 = bm.joutd;
      bm.exc2 = bm.exc;
      break;
    case Divergence::ConvVsJmpOut:
    case Divergence::JmpOutVsEmpty:
      if (shape.x_is_first)
        bm.joutd2 = exit_target(*d.b2, bm.exc2, in_pc);
      else
        bm.joutd = exit_target(*d.b, bm.exc, in_pc);
      break;
    case Divergence::Impossible: break;
  }

  // A_HALT, A_LOOP, A_EP, A_RDIFF, A_JIN laid out contiguously.
  Addr base = pl.find_block(2 + 2 + 4 + 4 + 32);
  bm.a_halt = base;
  bm.a_loop = base + 2;
  bm.a_ep = base + 4;
  bm.a_rdiff = base + 8;
  bm.a_jin = base + 12;
  pl.place(bm.a_halt, {enc(Op::HLT, 0, 0)});
  pl.place(bm.a_loop, {enc(Op::JMP, 0, PC)});
  pl.place(bm.a_ep, out_in_pc);
  pl.place(bm.a_rdiff, {enc(Op::OUT, 0, shape.reg < 0 ? PC : shape.reg), enc(Op::IN, 0, PC)});
  std::vector<Word> jin{enc(Op::IN, 0, SP), enc(Op::IN, 0, SR)};
  for (int r = 3; r < 16; ++r) jin.push_back(enc(Op::IN, 0, r));
  jin.push_back(enc(Op::IN, 0, PC));
  pl.place(bm.a_jin, jin);
  if (bm.exc) bm.joutd = bm.a_ep;
  if (bm.exc2) bm.joutd2 = bm.a_ep;
  bm.mem[0xFFFE] = static_cast<std::uint8_t>(bm.a_ep);
  bm.mem[0xFFFF] = static_cast<std::uint8_t>(bm.a_ep >> 8);
  return bm;
}

std::shared_ptr<const TableDevice> build_device(const BuiltContextMemory& bm, const DistinguishingTraces& d,
                                                const SpanFacts& f) {
  auto shape = classify_divergence(d);
  if (shape.kind == Divergence::Impossible) return nullptr;

  auto T = std::make_shared<TableDevice>(1);
  DevState delta = 0;
  auto idle = [&](DevState s) {
    T->ensure(s + 1);
    T->set_tick(s, Tick::Eps, s);
    T->set_write_other(s, s);
  };

  for (const auto& o : d.prefix) {
    if (o.kind != CoarseObs::JmpIn) {
      idle(delta);
      continue;
    }
    std::vector<Word> vals{bm.a_jin, o.R[SP], o.R[SR]};
    for (int r = 3; r < 16; ++r) vals.push_back(o.R[r]);
    vals.push_back(o.R[PC]);
    for (Word v : vals) {
      idle(delta);
      T->ensure(delta + 2);
      T->set_read(delta, v, delta + 1);
      ++delta;
    }
    idle(delta);
  }

  const DevState s = delta;
  switch (shape.kind) {
    case Divergence::Register: {
      Word va = d.b->R[shape.reg], vb = d.b2->R[shape.reg];
      T->ensure(s + 5);
      idle(s);
      T->set_read(s, bm.a_rdiff, s + 1);
      T->set_tick(s + 1, Tick::Eps, s + 1);
      T->set_write(s + 1, va, s + 2);
      T->set_write(s + 1, vb, s + 3);
      T->set_tick(s + 2, Tick::Eps, s + 2);
      T->set_read(s + 2, bm.a_halt, s + 4);
      T->set_tick(s + 3, Tick::Eps, s + 3);
      T->set_read(s + 3, bm.a_loop, s + 4);
      T->set_tick(s + 4, Tick::Eps, s + 4);
      break;
    }
    case Divergence::Pc: {
      if (!bm.joutd || !bm.joutd2 || *bm.joutd == *bm.joutd2) return nullptr;
      T->ensure(s + 4);
      T->set_tick(s, Tick::Eps, s);
      T->set_write(s, *bm.joutd, s + 1);
      T->set_write(s, *bm.joutd2, s + 2);
      T->set_tick(s + 1, Tick::Eps, s + 1);
      T->set_read(s + 1, bm.a_halt, s + 3);
      T->set_tick(s + 2, Tick::Eps, s + 2);
      T->set_read(s + 2, bm.a_loop, s + 3);
      T->set_tick(s + 3, Tick::Eps, s + 3);
      break;
    }
    case Divergence::Timing: {
      if (!f.ticks || !f.ticks2 || *f.ticks == *f.ticks2) return nullptr;
      // c'_1 is reached two steps after the jmpIn read (the IN's own cycles); an exception exit
      // spends two more in the OUT at A_EP.
      std::uint64_t off = 2 + (bm.exc ? 2 : 0);
      std::uint64_t lo = std::min(*f.ticks, *f.ticks2), hi = std::max(*f.ticks, *f.ticks2);
      bool first_faster = *f.ticks < *f.ticks2;
      DevState end = s + off + hi + 1;
      T->ensure(end + 1);
      for (DevState q = s; q < end; ++q) {
        T->set_tick(q, Tick::Eps, q + 1);
        T->set_write_other(q, q);
      }
      T->set_read(s + off + lo, first_faster ? bm.a_halt : bm.a_loop, end);
      T->set_read(s + off + hi, first_faster ? bm.a_loop : bm.a_halt, end);
      T->set_tick(end, Tick::Eps, end);
      break;
    }
    case Divergence::ConvVsJmpOut:
    case Divergence::JmpOutVsEmpty: {
      Convergence term = shape.x_is_first ? f.term : f.term2;
      idle(s);
      if (term == Convergence::Yes) {
        T->ensure(s + 3);
        T->set_write(s, bm.a_ep, s + 1);
        T->set_read(s, bm.a_loop, s + 2);
        T->set_tick(s + 1, Tick::Eps, s + 1);
        T->set_read(s + 1, bm.a_halt, s + 2);
        T->set_tick(s + 2, Tick::Eps, s + 2);
      } else {
        T->ensure(s + 2);
        T->set_read(s, bm.a_halt, s + 1);
        T->set_tick(s + 1, Tick::Eps, s + 1);
      }
      break;
    }
    case Divergence::Impossible: return nullptr;
  }
  return T;
}

const char* outcome_name(FaVerdict::Outcome o) {
  switch (o) {
    case FaVerdict::EquivalentWithinBudget: return "equivalent-within-budget";
    case FaVerdict::Confirmed: return "confirmed";
    case FaVerdict::Counterexample: return "counterexample";
    case FaVerdict::LowOnly: return "low-only";
  }
  return "?";
}

DistinguisherRecord backtranslate(const Context& C, const Module& a, const Module& b, const FaOptions& o) {
  DistinguisherRecord rec;
  rec.context_id = C.id;
  const Layout& L = a.L;
  Machine ml{L, C.D, o.low};
  auto ra = run_traced(ml, init_config(C.mem, a.mem, L, C.D), o.fuel, true);
  auto rb = run_traced(ml, init_config(C.mem, b.mem, L, C.D), o.fuel, true);
  rec.low = from_outcome(ra.outcome);
  rec.low2 = from_outcome(rb.outcome);
  try {
    rec.trace = coarse_trace(fine_trace(ra));
    rec.trace2 = coarse_trace(fine_trace(rb));
  } catch (const Error& e) {
    rec.build_error = e.what();
    return rec;
  }
  auto d = split_traces(rec.trace, rec.trace2);
  auto shape = classify_divergence(d);
  rec.kind = shape.kind;
  if (shape.kind == Divergence::Impossible) {
    rec.build_error = "divergence shape has no gadget";
    return rec;
  }

  std::size_t jins = std::count_if(d.prefix.begin(), d.prefix.end(),
                                   [](const CoarseObs& x) { return x.kind == CoarseObs::JmpIn; });
  Machine stripped{L, strip_interrupts(C.D), Policy::SL};
  if (jins == 0 || ra.after_jmpin.size() < jins || rb.after_jmpin.size() < jins) {
    rec.build_error = "missing configuration after the last common jmpIn";
    return rec;
  }
  const Configuration& c1 = ra.after_jmpin[jins - 1];
  const Configuration& c1b = rb.after_jmpin[jins - 1];
  rec.facts.term = from_outcome(run(stripped, c1, o.fuel).kind);
  rec.facts.term2 = from_outcome(run(stripped, c1b, o.fuel).kind);
  auto exit = next_exit(stripped, c1, o.fuel), exit2 = next_exit(stripped, c1b, o.fuel);
  if (exit) rec.facts.ticks = exit->dt;
  if (exit2) rec.facts.ticks2 = exit2->dt;

  // The gadget is chosen from what each module does next without interrupts, which is all an
  // SH context can see; the recorded divergence stays the one in the low-level traces.
  DistinguishingTraces eff = d;
  eff.b = exit;
  eff.b2 = exit2;
  rec.gadget = classify_divergence(eff).kind;

  std::shared_ptr<const TableDevice> dev;
  BuiltContextMemory bm;
  try {
    bm = build_mem(eff, L, reset_target_of(C.mem));
    dev = build_device(bm, eff, rec.facts);
  } catch (const Error& e) {
    rec.build_error = e.what();
    return rec;
  }
  if (!dev) {
    rec.build_error = "no device for this divergence";
    return rec;
  }
  rec.built = true;
  Context H{C.id + "/sh", bm.mem, dev};
  rec.sh = converges(H, a, Policy::SH, o.fuel);
  rec.sh2 = converges(H, b, Policy::SH, o.fuel);
  rec.confirmed = (rec.sh == Convergence::Yes) != (rec.sh2 == Convergence::Yes);
  return rec;
}

// ---- context templates ----

namespace {

struct Cont {
  enum Kind { Halt, Loop, CmpReg, Timing, StoreDelta } kind = Halt;
  int reg = 0;
  Word val = 0;
};

struct Isr {
  enum Kind { None, Hlt, Reti, TimeCheck, StoreTime } kind = None;
  Word val = 0;
};

struct Spec {
  Word guess = 0;
  Cont te, pad2;
  Isr isr;
  std::optional<std::uint64_t> int_at;

  std::string id() const {
    static const char* cn[] = {"halt", "loop", "cmpreg", "timing", "store"};
    static const char* in[] = {"none", "hlt", "reti", "timecheck", "store"};
    std::ostringstream s;
    s << "g=" << hex(guess) << " te=" << cn[te.kind];
    if (te.kind == Cont::CmpReg) s << "(r" << te.reg << "," << hex(te.val) << ")";
    if (te.kind == Cont::Timing) s << "(" << te.val << ")";
    s << " pad2=" << cn[pad2.kind];
    if (int_at) {
      s << " int@" << *int_at << " isr=" << in[isr.kind];
      if (isr.kind == Isr::TimeCheck) s << "(" << isr.val << ")";
    }
    return s.str();
  }
};

std::string render_cont(const Cont& c, const std::string& p) {
  std::ostringstream s;
  switch (c.kind) {
    case Cont::Halt: s << "  MOVI 0 sr\n  HLT\n"; break;
    case Cont::Loop: s << "  MOVI 0 sr\n" << p << "_l: JMP pc\n"; break;
    case Cont::CmpReg: {
      int s1 = c.reg == 4 ? 5 : 4;
      s << "  MOV r" << c.reg << " r" << s1 << "\n  MOVI 0 sr\n  MOVI " << hex(c.val) << " r6\n  CMP r" << s1
        << " r6\n  MOVI " << p << "_h r7\n  JZ r7\n" << p << "_l: JMP pc\n" << p << "_h: HLT\n";
      break;
    }
    case Cont::Timing:
      s << "  IN r4\n  MOVI 0 sr\n  MOVI " << hex(kT0) << " r5\n  MOVL r5 r5\n  SUB r4 r5\n  MOVI " << hex(c.val)
        << " r6\n  CMP r5 r6\n  MOVI " << p << "_h r7\n  JZ r7\n" << p << "_l: JMP pc\n" << p << "_h: HLT\n";
      break;
    case Cont::StoreDelta:
      s << "  IN r4\n  MOVI 0 sr\n  MOVI " << hex(kT0) << " r5\n  MOVL r5 r5\n  SUB r4 r5\n  MOVI " << hex(kResult)
        << " r6\n  MOVS r5 r6\n  HLT\n";
      break;
  }
  return s.str();
}

std::string render_isr(const Isr& i) {
  std::ostringstream s;
  switch (i.kind) {
    case Isr::None:
    case Isr::Hlt: s << "  HLT\n"; break;
    case Isr::Reti: s << "  RETI\n"; break;
    case Isr::TimeCheck:
      s << "  IN r4\n  MOVI " << hex(i.val) << " r5\n  CMP r4 r5\n  MOVI isr_h r6\n  JZ r6\nisr_l: JMP pc\nisr_h: HLT\n";
      break;
    case Isr::StoreTime: s << "  IN r4\n  MOVI " << hex(kResult) << " r5\n  MOVS r4 r5\n  HLT\n"; break;
  }
  return s.str();
}

Context render(const Spec& sp, const Layout& L) {
  std::ostringstream s;
  s << ".layout " << hex(L.ts) << " " << hex(L.te) << " " << hex(L.ds) << " " << hex(L.de) << " " << hex(L.isr)
    << "\n.section unprot\n.org " << hex(kReset) << "\nreset:\n"
    << "  MOVI " << hex(kFlag) << " r4\n  MOVL r4 r5\n  MOVI 0 r6\n  CMP r5 r6\n  MOVI first r7\n  JZ r7\n  HLT\n"
    << "first:\n  MOVI 1 r5\n  MOVS r5 r4\n  MOVI " << hex(kStack) << " sp\n  IN r3\n  MOVI " << hex(kT0)
    << " r4\n  MOVS r3 r4\n  MOVI " << hex(kPad2) << " r8\n  MOVI " << hex(L.te) << " r9\n  MOVI " << hex(sp.guess)
    << " r15\n  MOVI 0 r14\n  MOVI " << hex(L.ts) << " r4\n  JMP r4\n"
    << ".org " << hex(L.te) << "\n" << render_cont(sp.te, "te")
    << ".org " << hex(kPad2) << "\n" << render_cont(sp.pad2, "p2")
    << ".org " << hex(L.isr) << "\n" << render_isr(sp.isr) << ".resetvec reset\n";
  AsmResult a = assemble(s.str());
  if (!a.mod.empty()) throw Error(Errc::LayoutViolation, "layout leaves no room for the context templates");
  DevicePtr D = sp.int_at ? make_timer({*sp.int_at}) : make_timer();
  return {sp.id(), a.ctx, D};
}

struct Pilot {
  TracedRun run;
  std::vector<CoarseObs> coarse;
  std::optional<Word> result;
};

Pilot pilot(const Spec& sp, const Module& m, const FaOptions& o) {
  Context C = render(sp, m.L);
  Machine mach{m.L, C.D, o.low};
  Pilot p;
  p.run = run_traced(mach, init_config(C.mem, m.mem, m.L, C.D), o.fuel);
  try {
    p.coarse = coarse_trace(fine_trace(p.run));
  } catch (const Error&) {
  }
  if (p.run.outcome == RunOutcome::Terminated) p.result = p.run.last.M.read_word(kResult);
  return p;
}

std::optional<RegisterFile> first_exit(const Pilot& p) {
  for (const auto& o : p.coarse)
    if (o.kind == CoarseObs::JmpOut) return o.R;
  return std::nullopt;
}

std::optional<std::uint64_t> jmpin_time(const Pilot& p) {
  for (const auto& s : p.run.steps)
    if (s.obs.kind == FineObs::JmpIn) return s.pre.t;
  return std::nullopt;
}

std::optional<std::uint64_t> jmpout_time(const Pilot& p) {
  for (const auto& s : p.run.steps)
    if (s.obs.kind == FineObs::JmpOut) return s.post.t;
  return std::nullopt;
}

std::vector<Word> data_words(const Module& m) {
  std::vector<Word> out;
  for (std::uint32_t a = m.L.ds; a + 1 < m.L.de; a += 2) {
    auto lo = m.mem.find(static_cast<Addr>(a)), hi = m.mem.find(static_cast<Addr>(a + 1));
    if (lo == m.mem.end() && hi == m.mem.end()) continue;
    out.push_back(static_cast<Word>((lo == m.mem.end() ? 0 : lo->second) |
                                    (hi == m.mem.end() ? 0 : hi->second) << 8));
  }
  return out;
}

}  // namespace

std::vector<Context> enumerate_contexts(const Module& a, const Module& b, const FaOptions& o) {
  if (!(a.L == b.L)) throw Error(Errc::LayoutViolation, "modules use different layouts");
  std::vector<Word> guesses{0};
  auto add_guess = [&](Word w) {
    if (guesses.size() < 12 && std::find(guesses.begin(), guesses.end(), w) == guesses.end()) guesses.push_back(w);
  };
  for (Word w : o.guesses) add_guess(w);
  for (Word w : data_words(a)) add_guess(w);
  for (Word w : data_words(b)) add_guess(w);

  std::vector<Context> out;
  auto push = [&](const Spec& sp) {
    if (out.size() < o.budget) out.push_back(render(sp, a.L));
  };
  const Cont halt{Cont::Halt}, loop{Cont::Loop};

  for (Word g : guesses) {
    Spec base;
    base.guess = g;
    base.te = halt;
    base.pad2 = loop;
    push(base);
    Spec s2 = base;
    s2.te = loop;
    s2.pad2 = halt;
    push(s2);

    Spec probe = base;
    probe.te = {Cont::StoreDelta};
    Pilot pa = pilot(probe, a, o), pb = pilot(probe, b, o);
    auto ea = first_exit(pa), eb = first_exit(pb);
    if (ea && eb) {
      for (int r = 1; r < 16; ++r) {
        if ((*ea)[r] == (*eb)[r]) continue;
        for (Word v : {(*ea)[r], (*eb)[r]}) {
          Spec s = base;
          s.te = {Cont::CmpReg, r, v};
          push(s);
        }
      }
    }
    if (pa.result && pb.result && *pa.result != *pb.result) {
      for (Word v : {*pa.result, *pb.result}) {
        Spec s = base;
        s.te = {Cont::Timing, 0, v};
        push(s);
      }
    }

    auto tin = jmpin_time(pa);
    if (!tin) continue;
    std::uint64_t tend = *tin + 64;
    if (auto x = jmpout_time(pa), y = jmpout_time(pb); x && y) tend = std::max(*x, *y);
    std::uint64_t from = *tin > 2 ? *tin - 2 : 0;
    for (std::uint64_t k = from; k <= tend + 8 && out.size() < o.budget; ++k) {
      Spec s = base;
      s.int_at = k;
      s.te = loop;
      s.isr = {Isr::Hlt};
      push(s);
      Spec st = s;
      st.isr = {Isr::StoreTime};
      Pilot qa = pilot(st, a, o), qb = pilot(st, b, o);
      if (qa.result && qb.result && *qa.result != *qb.result) {
        Spec t = s;
        t.isr = {Isr::TimeCheck, *qa.result};
        push(t);
      }
      Spec r = base;
      r.int_at = k;
      r.isr = {Isr::Reti};
      push(r);
      // Resume-to-end timing: return from the ISR and time the rest of the call.
      Spec rt = r;
      rt.te = {Cont::StoreDelta};
      Pilot ra = pilot(rt, a, o), rb = pilot(rt, b, o);
      if (ra.result && rb.result && *ra.result != *rb.result) {
        rt.te = {Cont::Timing, 0, *ra.result};
        push(rt);
      }
    }
  }
  return out;
}

FaVerdict check_fa_instance(const Module& a, const Module& b, const FaOptions& o) {
  if (o.budget == 0) throw Error(Errc::BudgetExhausted, "search budget is zero");
  FaVerdict v;
  v.low = o.low;
  auto contexts = enumerate_contexts(a, b, o);
  v.contexts = contexts.size();

  auto differ = [&](const Context& C, Policy p) {
    Convergence x = converges(C, a, p, o.fuel), y = converges(C, b, p, o.fuel);
    // A late convergence should not pass for divergence.
    if (x == Convergence::Unknown && y == Convergence::Yes) x = converges(C, a, p, 8 * o.fuel);
    if (y == Convergence::Unknown && x == Convergence::Yes) y = converges(C, b, p, 8 * o.fuel);
    return (x == Convergence::Yes) != (y == Convergence::Yes);
  };

  for (const auto& C : contexts) {
    if (differ(C, Policy::SH)) v.sh_distinguished = true;
    if (!differ(C, o.low)) continue;
    v.low_distinguished = true;
    if (o.low == Policy::SL) v.records.push_back(backtranslate(C, a, b, o));
  }

  if (o.low == Policy::SL) {
    if (!v.low_distinguished)
      v.outcome = FaVerdict::EquivalentWithinBudget;
    else
      v.outcome = std::all_of(v.records.begin(), v.records.end(), [](const auto& r) { return r.confirmed; })
                      ? FaVerdict::Confirmed
                      : FaVerdict::Counterexample;
  } else if (v.low_distinguished) {
    v.outcome = v.sh_distinguished ? FaVerdict::Confirmed : FaVerdict::LowOnly;
  }
  return v;
}

std::string format_verdict_csv(const FaVerdict& v) {
  std::ostringstream s;
  s << "context,divergence,gadget,low_a,low_b,built,sh_a,sh_b,confirmed,note\n";
  for (const auto& r : v.records) {
    s << '"' << r.context_id << "\"," << divergence_name(r.kind) << ',' << divergence_name(r.gadget) << ',' << convergence_name(r.low) << ','
      << convergence_name(r.low2) << ',' << (r.built ? 1 : 0) << ',' << convergence_name(r.sh) << ','
      << convergence_name(r.sh2) << ',' << (r.confirmed ? 1 : 0) << ",\"" << r.build_error << "\"\n";
  }
  return s.str();
}

std::string format_verdict_text(const FaVerdict& v) {
  std::ostringstream s;
  s << "low policy: " << policy_name(v.low) << "\ncontexts: " << v.contexts
    << "\nlow distinguisher: " << (v.low_distinguished ? "yes" : "no")
    << "\nsh distinguisher: " << (v.sh_distinguished ? "yes" : "no") << "\nverdict: " << outcome_name(v.outcome) << '\n';
  std::map<std::string, std::size_t> kinds;
  std::size_t confirmed = 0;
  for (const auto& r : v.records) {
    ++kinds[divergence_name(r.kind)];
    if (r.confirmed) ++confirmed;
  }
  if (!v.records.empty()) {
    s << "backtranslated: " << v.records.size() << ", confirmed under sh: " << confirmed << '\n';
    for (const auto& [k, n] : kinds) s << "  " << k << ": " << n << '\n';
  }
  for (const auto& r : v.records) {
    if (r.confirmed) continue;
    s << "  not confirmed: " << r.context_id << " (" << divergence_name(r.kind) << ", gadget "
      << divergence_name(r.gadget) << ", sh " << convergence_name(r.sh) << '/' << convergence_name(r.sh2);
    if (!r.build_error.empty()) s << ", " << r.build_error;
    s << ")\n";
  }
  return s.str();
}

}  // namespace encsim
