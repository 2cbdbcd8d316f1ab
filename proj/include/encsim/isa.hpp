#pragma once

#include <optional>
#include <string>
#include <vector>

#include "encsim/memory.hpp"

namespace encsim {

// Opcode bytes follow the row order of the instruction table.
enum class Op : std::uint8_t {
  RETI = 0x01,
  NOP = 0x02,
  HLT = 0x03,
  NOT = 0x04,
  IN = 0x05,
  OUT = 0x06,
  AND = 0x07,
  JMP = 0x08,
  JZ = 0x09,
  MOV = 0x0A,
  MOVL = 0x0B,
  MOVS = 0x0C,
  MOVI = 0x0D,
  ADD = 0x0E,
  SUB = 0x0F,
  CMP = 0x10,
};

constexpr int kNumOps = 16;
constexpr int MAX_TIME = 6;

// Single-operand instructions keep their register in r2; r1 stays 0.
struct Instruction {
  Op op = Op::NOP;
  std::uint8_t r1 = 0;
  std::uint8_t r2 = 0;
  Word imm = 0;

  bool operator==(const Instruction&) const = default;
};

enum class Operands { None, One, Two, ImmReg };

int cycles(Op op);
inline int cycles(const Instruction& i) { return cycles(i.op); }
int size_words(Op op);
inline int size_words(const Instruction& i) { return size_words(i.op); }
Operands operand_shape(Op op);
const char* mnemonic(Op op);
std::optional<Op> op_from_mnemonic(const std::string& m);
Op op_from_index(int i);

std::vector<Word> encode(const Instruction& i);
std::optional<Instruction> decode(const MemoryImage& M, Addr l);

std::string to_string(const Instruction& i);

}  // namespace encsim
