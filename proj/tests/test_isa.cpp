#include "doctest.h"
#include "encsim/isa.hpp"

using namespace encsim;

TEST_CASE("cycle table") {
  // Frozen from the instruction table.
  const int expect[kNumOps] = {5, 1, 1, 2, 2, 2, 1, 2, 2, 1, 2, 4, 2, 1, 1, 1};
  const int words[kNumOps] = {1, 1, 1, 2, 1, 1, 1, 1, 1, 1, 1, 2, 2, 1, 1, 1};
  for (int i = 0; i < kNumOps; ++i) {
    CAPTURE(mnemonic(op_from_index(i)));
    CHECK(cycles(op_from_index(i)) == expect[i]);
    CHECK(size_words(op_from_index(i)) == words[i]);
  }
  CHECK(cycles(Op::RETI) == 5);
  CHECK(cycles(Op::MOVS) == 4);
  CHECK(cycles(Op::NOP) == 1);
}

TEST_CASE("encode") {
  auto nop = encode(Instruction{Op::NOP});
  REQUIRE(nop.size() == 1);
  CHECK(nop[0] == 0x0200);
  auto movi = encode(Instruction{Op::MOVI, 0, 5, 0x1234});
  REQUIRE(movi.size() == 2);
  CHECK(movi[0] == 0x0D05);
  CHECK(movi[1] == 0x1234);
  CHECK(encode(Instruction{Op::SUB, 4, 3})[0] == 0x0F43);
}

TEST_CASE("decode") {
  MemoryImage M;
  M.write_word(0x1000, 0x0D05);
  M.write_word(0x1002, 0xBEEF);
  auto i = decode(M, 0x1000);
  REQUIRE(i);
  CHECK(*i == Instruction{Op::MOVI, 0, 5, 0xBEEF});
  M.write_word(0x2000, 0xFF00);
  CHECK_FALSE(decode(M, 0x2000));
  M.write_word(0x2002, 0x0000);
  CHECK_FALSE(decode(M, 0x2002));
  CHECK_FALSE(decode(M, 0xFFFF));
  M.write_word(0xFFFE, 0x0D01);
  CHECK_FALSE(decode(M, 0xFFFE));  // immediate would lie past the end of memory
  M.write_word(0xFFFE, 0x0200);
  CHECK(decode(M, 0xFFFE) == Instruction{Op::NOP});
}

TEST_CASE("mnemonics roundtrip") {
  for (int i = 0; i < kNumOps; ++i) CHECK(op_from_mnemonic(mnemonic(op_from_index(i))) == op_from_index(i));
  CHECK_FALSE(op_from_mnemonic("FOO"));
}
