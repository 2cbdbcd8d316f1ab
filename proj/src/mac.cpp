#include "encsim/mac.hpp"

namespace encsim {

namespace {

enum class Region { Entry, Code, Data, Other };

Region classify(const Layout& L, Addr a) {
  if (a == L.ts) return Region::Entry;
  if (L.in_code(a)) return Region::Code;
  if (L.in_data(a)) return Region::Data;
  return Region::Other;
}

Addr plus(Addr a, int k) { return static_cast<Addr>(a + k); }

// Bytes of the instruction starting at ts share the entry point's rights, otherwise
// the second byte of the entry instruction would be unreachable from outside.
bool fetch_ok(const Layout& L, Addr pcold, Addr pc, int nbytes) {
  for (int k = 0; k < nbytes; ++k) {
    Addr t = pc == L.ts ? L.ts : plus(pc, k);
    if (!mac_cell(L, pcold, Right::X, t)) return false;
  }
  return true;
}

bool access_ok(const Layout& L, Addr from, Right rght, Addr base, int nbytes) {
  for (int k = 0; k < nbytes; ++k)
    if (!mac_cell(L, from, rght, plus(base, k))) return false;
  return true;
}

bool mac_plain(const Layout& L, const Instruction& i, Addr pcold, const RegisterFile& R) {
  Addr pc = R[PC];
  switch (i.op) {
    case Op::RETI: {
      Addr sp = R[SP];
      return sp != 0xFFFF && plus(sp, 2) != 0xFFFF && fetch_ok(L, pcold, pc, 2) &&
             access_ok(L, pc, Right::R, sp, 4);
    }
    case Op::NOP:
    case Op::AND:
    case Op::ADD:
    case Op::SUB:
    case Op::CMP:
    case Op::MOV:
    case Op::JMP:
    case Op::JZ:
      return fetch_ok(L, pcold, pc, 2);
    case Op::NOT:
    case Op::MOVI:
      return fetch_ok(L, pcold, pc, 4);
    case Op::IN:
    case Op::OUT:
      return mode_of(L, pc) == Mode::UM && fetch_ok(L, pcold, pc, 2);
    case Op::MOVL: {
      Addr src = R[i.r1];
      return src != 0xFFFF && access_ok(L, pc, Right::R, src, 2) && fetch_ok(L, pcold, pc, 2);
    }
    case Op::MOVS: {
      Addr dst = R[i.r2];
      return dst != 0xFFFF && access_ok(L, pc, Right::W, dst, 2) && fetch_ok(L, pcold, pc, 4);
    }
    case Op::HLT:
      return false;  // HLT is resolved before the access control
  }
  return false;
}

}  // namespace

bool mac_cell(const Layout& L, Addr f, Right rght, Addr t) {
  bool from_inside = L.in_code(f);
  Region to = classify(L, t);
  if (from_inside) {
    switch (to) {
      case Region::Entry:
      case Region::Code: return rght != Right::W;
      case Region::Data: return rght != Right::X;
      case Region::Other: return rght == Right::X;
    }
  } else {
    switch (to) {
      case Region::Entry: return rght == Right::X;
      case Region::Code:
      case Region::Data: return false;
      case Region::Other: return true;
    }
  }
  return false;
}

bool mac_ok(const Layout& L, const Instruction& i, Addr pcold, const RegisterFile& R, bool backup_present) {
  if (!backup_present) return mac_plain(L, i, pcold, R);
  if (i.op == Op::RETI) return true;
  return mac_plain(L, i, pcold, R) && !status_flag(R, Flag::GIE) && R[PC] != L.ts;
}

}  // namespace encsim
