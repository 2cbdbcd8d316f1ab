#include "doctest.h"
#include "support.hpp"

using namespace encsim;
using testsup::load;

namespace {

const char* kPrelude = ".layout 0x8000 0x8100 0x9000 0x9100 0x5000\n.resetvec main\n";

std::string prog(const std::string& um, const std::string& code = "", const std::string& isr = "HLT") {
  return std::string(kPrelude) + ".section code\n" + (code.empty() ? "HLT\n" : code) +
         "\n.section unprot\n.org 0x0400\nmain:\n" + um + "\n.org 0x5000\n" + isr + "\n";
}

}  // namespace

TEST_CASE("initial configuration") {
  auto l = load(prog("NOP"));
  CHECK(l.c.t == 0);
  CHECK_FALSE(l.c.t_a);
  CHECK(l.c.B.kind == Backup::None);
  CHECK_FALSE(l.c.halted);
  CHECK(l.c.R == make_rinit(l.c.M));
  CHECK(l.c.R[PC] == 0x0400);
  CHECK(l.c.pcold == 0xFFFE);
}

TEST_CASE("exception configuration clears GIE and restarts at the reset vector") {
  auto l = load(prog("NOP"));
  l.c.R.r[5] = 0x1234;
  l.c.R.r[PC] = 0x0800;
  l.c.t_a = 3;
  l.c.B.kind = Backup::Full;
  Configuration e = except_config(l.c);
  CHECK_FALSE(status_flag(e.R, Flag::GIE));
  CHECK(e.R[PC] == 0x0400);
  CHECK(e.R[5] == 0);
  CHECK(e.B.kind == Backup::None);
  CHECK_FALSE(e.t_a);
  CHECK(e.M == l.c.M);
}

TEST_CASE("UM NOP advances pc by one word and one cycle") {
  auto l = load(prog("NOP"));
  Configuration c = step(l.m, l.c);
  CHECK(c.R[PC] == 0x0402);
  CHECK(c.t == 1);
  CHECK(c.pcold == 0x0400);
}

TEST_CASE("arithmetic and flags") {
  auto l = load(prog("MOVI 7 r4\nMOVI 5 r3\nSUB r4 r3\nCMP r4 r4\nMOVI 0x7fff r6\nADD r4 r6\nNOT r6\nAND r4 r4\nHLT"));
  auto out = run(l.m, l.c, 100);
  REQUIRE(out.kind == RunOutcome::Terminated);
  const auto& R = out.last.R;
  CHECK(R[3] == 2);  // r3 = r4 - r3
  CHECK(R[4] == 7);
  CHECK(R[6] == static_cast<Word>(~0x8006));
  // AND r4 r4 = 7: not zero, not negative.
  CHECK_FALSE(status_flag(R, Flag::Z));
  CHECK_FALSE(status_flag(R, Flag::N));
  CHECK(status_flag(R, Flag::C));
  CHECK(status_flag(R, Flag::GIE));

  auto l2 = load(prog("MOVI 9 r4\nMOVI 9 r5\nCMP r4 r5\nHLT"));
  auto o2 = run(l2.m, l2.c, 100);
  CHECK(status_flag(o2.last.R, Flag::Z));
  CHECK(o2.last.R[5] == 9);  // CMP leaves its operands alone

  auto l3 = load(prog("MOVI 0x7fff r4\nMOVI 1 r5\nADD r4 r5\nHLT"));
  auto o3 = run(l3.m, l3.c, 100);
  CHECK(o3.last.R[5] == 0x8000);
  CHECK(status_flag(o3.last.R, Flag::V));
  CHECK(status_flag(o3.last.R, Flag::N));
}

TEST_CASE("memory moves and jumps") {
  auto l = load(prog("MOVI 0x2000 r4\nMOVI 0xBEEF r5\nMOVS r5 r4\nMOVL r4 r6\nMOVI done r7\nCMP r5 r6\nJZ r7\nHLT\ndone:\nMOV r6 r8\nHLT"));
  auto out = run(l.m, l.c, 100);
  REQUIRE(out.kind == RunOutcome::Terminated);
  CHECK(out.last.M.read_word(0x2000) == 0xBEEF);
  CHECK(out.last.R[6] == 0xBEEF);
  CHECK(out.last.R[8] == 0xBEEF);
}

TEST_CASE("IN and OUT talk to the device") {
  auto l = load(prog("NOP\nNOP\nIN r4\nOUT r4\nHLT"));
  auto out = run(l.m, l.c, 10);
  CHECK(out.last.R[4] == 2);  // timer after two NOP cycles
}

TEST_CASE("UM RETI pops sr then pc") {
  auto l = load(prog("MOVI 0x2ffc sp\nRETI"));
  l.c.M.write_word(0x2FFC, 0x0002);
  l.c.M.write_word(0x2FFE, 0x0600);
  Configuration c = step(l.m, step(l.m, l.c));
  CHECK(c.R[PC] == 0x0600);
  CHECK(c.R[SR] == 0x0002);
  CHECK(c.R[SP] == 0x3000);
  CHECK(c.t == 2 + 5);
}

TEST_CASE("run outcomes") {
  auto h = load(prog("HLT"));
  auto out = run(h.m, h.c, 10);
  CHECK(out.kind == RunOutcome::Terminated);
  CHECK(out.steps == 1);
  CHECK(out.last.t == 0);  // the halting configuration carries no time
  CHECK(out.last.halted);

  auto loop = load(prog("JMP pc"));
  CHECK(run(loop.m, loop.c, 50).kind == RunOutcome::OutOfFuel);
  auto z = run(loop.m, loop.c, 0);
  CHECK(z.kind == RunOutcome::OutOfFuel);
  CHECK(z.steps == 0);
}

TEST_CASE("IN without a read edge is stuck") {
  auto dev = std::make_shared<TableDevice>(1, 0);
  dev->set_tick(0, Tick::Eps, 0);
  auto l = load(prog("IN r4"), dev);
  auto out = run(l.m, l.c, 10);
  CHECK(out.kind == RunOutcome::Stuck);
  CHECK(out.last.R[PC] == 0x0400);
  CHECK_THROWS_AS(step(l.m, l.c), Error);
}

TEST_CASE("traps") {
  SUBCASE("decode failure takes no time") {
    auto l = load(prog(".word 0xff00"));
    l.c.t = 7;
    Configuration c = step(l.m, l.c);
    CHECK(c.t == 7);
    CHECK(c.R[PC] == 0x0400);
    CHECK_FALSE(status_flag(c.R, Flag::GIE));
  }
  SUBCASE("HLT in the enclave is a soft reset") {
    auto l = load(prog("MOVI 0x8000 r4\nJMP r4"));
    auto c = step(l.m, step(l.m, step(l.m, l.c)));
    CHECK(c.R[PC] == 0x0400);
    CHECK_FALSE(c.halted);
    CHECK(c.t == 2 + 2 + 1);
  }
  SUBCASE("jumping past the entry point is a violation") {
    auto l = load(prog("MOVI 0x8002 r4\nJMP r4", "NOP\nNOP\nHLT"));
    auto c = step(l.m, step(l.m, step(l.m, l.c)));
    CHECK(c.R[PC] == 0x0400);
    CHECK(c.t == 2 + 2 + 1);
  }
}

TEST_CASE("SL dispatch from the enclave pads to MAX_TIME") {
  Machine m{{0x8000, 0x8100, 0x9000, 0x9100, 0x5000}, make_timer(), Policy::SL};
  Configuration c;
  c.R.r[PC] = 0x8004;
  c.R.r[SR] = kFlagGIE;
  c.R.r[7] = 0x4242;
  c.pcold = 0x8000;
  c.t = 20;
  c.t_a = 18;
  RegisterFile before = c.R;
  interrupt_logic(m, c);
  CHECK(c.B.kind == Backup::Full);
  CHECK(c.B.t_pad == 2);
  CHECK(c.B.R == before);
  CHECK(c.B.pcold == 0x8000);
  RegisterFile isr;
  isr.r[PC] = 0x5000;
  CHECK(c.R == isr);
  CHECK(c.t == 20 + 6 + 4);
  CHECK_FALSE(c.t_a);
}

TEST_CASE("no dispatch with GIE cleared") {
  Machine m{{0x8000, 0x8100, 0x9000, 0x9100, 0x5000}, make_timer(), Policy::SL};
  Configuration c;
  c.R.r[PC] = 0x8004;
  c.pcold = 0x8000;
  c.t = 9;
  c.t_a = 5;
  Configuration before = c;
  interrupt_logic(m, c);
  CHECK(c == before);
}

TEST_CASE("UM dispatch pushes pc and sr") {
  Machine m{{0x8000, 0x8100, 0x9000, 0x9100, 0x5000}, make_timer(), Policy::SL};
  Configuration c;
  c.R.r[PC] = 0x0402;
  c.R.r[SP] = 0x3000;
  c.R.r[SR] = kFlagGIE | kFlagZ;
  c.pcold = 0x0400;
  c.t = 4;
  c.t_a = 3;
  interrupt_logic(m, c);
  CHECK(c.M.read_word(0x2FFE) == 0x0402);
  CHECK(c.M.read_word(0x2FFC) == (kFlagGIE | kFlagZ));
  CHECK(c.R[SP] == 0x2FFC);
  CHECK(c.R[SR] == 0);
  CHECK(c.R[PC] == 0x5000);
  CHECK(c.t == 10);
  CHECK(c.B.kind == Backup::None);
}

TEST_CASE("UM dispatch pushes are not access-checked") {
  // Follows the interrupt rule literally: an attacker sp inside enclave data gets written.
  Machine m{{0x8000, 0x8100, 0x9000, 0x9100, 0x5000}, make_timer(), Policy::SL};
  Configuration c;
  c.R.r[PC] = 0x0402;
  c.R.r[SP] = 0x9010;
  c.R.r[SR] = kFlagGIE;
  c.pcold = 0x0400;
  c.t_a = 0;
  interrupt_logic(m, c);
  CHECK(c.M.read_word(0x900E) == 0x0402);
}

TEST_CASE("SL keeps ISR entry at arrival + 12 and compensates on return") {
  // MOVS takes 4 cycles; try every arrival offset inside it.
  const std::string src = std::string(kPrelude) +
                          ".section code\nMOVI 0x9000 r5\nMOVS r4 r5\nNOP\nJMP r9\n"
                          ".section unprot\n.org 0x0400\nmain:\nMOVI 0x3000 sp\nMOVI exit r9\nMOVI 0x8000 r4\nJMP r4\n"
                          "exit:\nHLT\n.org 0x5000\nRETI\n";
  for (std::uint64_t off = 0; off < 4; ++off) {
    // main takes 2+2+2+2 = 8 cycles, MOVI in the enclave 2 more; MOVS spans [10,14).
    std::uint64_t ta = 10 + off;
    auto l = testsup::load(src, make_timer({ta}), Policy::SL);
    auto tr = run_traced(l.m, l.c, 100);
    REQUIRE(tr.outcome == RunOutcome::Terminated);
    std::optional<std::uint64_t> isr_at, resumed_at;
    for (const auto& s : tr.steps) {
      if (s.obs.kind == FineObs::Handle) isr_at = s.post.t;
      if (s.rule == Rule::RetiPad) resumed_at = s.post.t;
    }
    CAPTURE(off);
    REQUIRE(isr_at);
    CHECK(*isr_at == ta + 12);
    // RETI (5 cycles) plus the remaining pad lands the resume a fixed time after ISR entry.
    REQUIRE(resumed_at);
    CHECK(*resumed_at - *isr_at == 5 + (14 - ta));
  }
}

TEST_CASE("checkpoint roundtrip") {
  auto l = load(prog("NOP\nNOP\nHLT"), make_timer({1}));
  auto c = step(l.m, step(l.m, l.c));
  auto bytes = serialize(c);
  CHECK(deserialize(bytes) == c);
  bytes[0] = 'X';
  CHECK_THROWS_AS(deserialize(bytes), Error);
}
