#include "encsim/isa.hpp"

#include <cstdio>

namespace encsim {

namespace {

struct Row {
  const char* name;
  int cycles;
  int size;
  Operands shape;
};

const Row kTable[kNumOps] = {
    {"RETI", 5, 1, Operands::None}, {"NOP", 1, 1, Operands::None},  {"HLT", 1, 1, Operands::None},
    {"NOT", 2, 2, Operands::One},   {"IN", 2, 1, Operands::One},    {"OUT", 2, 1, Operands::One},
    {"AND", 1, 1, Operands::Two},   {"JMP", 2, 1, Operands::One},   {"JZ", 2, 1, Operands::One},
    {"MOV", 1, 1, Operands::Two},   {"MOVL", 2, 1, Operands::Two},  {"MOVS", 4, 2, Operands::Two},
    {"MOVI", 2, 2, Operands::ImmReg}, {"ADD", 1, 1, Operands::Two}, {"SUB", 1, 1, Operands::Two},
    {"CMP", 1, 1, Operands::Two},
};

const Row& row(Op op) { return kTable[static_cast<int>(op) - 1]; }

}  // namespace

int cycles(Op op) { return row(op).cycles; }
int size_words(Op op) { return row(op).size; }
Operands operand_shape(Op op) { return row(op).shape; }
const char* mnemonic(Op op) { return row(op).name; }
Op op_from_index(int i) { return static_cast<Op>(i + 1); }

std::optional<Op> op_from_mnemonic(const std::string& m) {
  for (int i = 0; i < kNumOps; ++i)
    if (m == kTable[i].name) return op_from_index(i);
  return std::nullopt;
}

std::vector<Word> encode(const Instruction& i) {
  Word w0 = static_cast<Word>(static_cast<int>(i.op) << 8 | (i.r1 & 0xF) << 4 | (i.r2 & 0xF));
  if (size_words(i.op) == 1) return {w0};
  return {w0, i.op == Op::MOVI ? i.imm : Word{0}};
}

std::optional<Instruction> decode(const MemoryImage& M, Addr l) {
  if (l == 0xFFFF) return std::nullopt;
  Word w0 = M.read_word(l);
  int opc = w0 >> 8;
  if (opc < 1 || opc > kNumOps) return std::nullopt;
  Instruction i;
  i.op = static_cast<Op>(opc);
  switch (operand_shape(i.op)) {
    case Operands::None: break;
    case Operands::One:
    case Operands::ImmReg: i.r2 = w0 & 0xF; break;
    case Operands::Two:
      i.r1 = (w0 >> 4) & 0xF;
      i.r2 = w0 & 0xF;
      break;
  }
  if (i.op == Op::MOVI) {
    if (l >= 0xFFFD) return std::nullopt;
    i.imm = M.read_word(static_cast<std::uint32_t>(l) + 2);
  }
  return i;
}

std::string to_string(const Instruction& i) {
  char buf[48];
  switch (operand_shape(i.op)) {
    case Operands::None: return mnemonic(i.op);
    case Operands::One: std::snprintf(buf, sizeof buf, "%s r%d", mnemonic(i.op), i.r2); break;
    case Operands::Two: std::snprintf(buf, sizeof buf, "%s r%d r%d", mnemonic(i.op), i.r1, i.r2); break;
    case Operands::ImmReg: std::snprintf(buf, sizeof buf, "%s 0x%04x r%d", mnemonic(i.op), i.imm, i.r2); break;
  }
  return buf;
}

}  // namespace encsim
