#include "encsim/regfile.hpp"

#include <cstdio>

namespace encsim {

Mode mode_of(const Layout& L, Addr pc) {
  if (L.in_code(pc)) return Mode::PM;
  if (L.in_data(pc)) return Mode::Neither;
  return Mode::UM;
}

void reg_set(RegisterFile& R, int r, Word w, Mode m) {
  auto& slot = R.r[static_cast<std::size_t>(r & 0xF)];
  if (r == PC || r == SP)
    slot = w & 0xFFFE;
  else if (r == SR && m == Mode::PM)
    slot = static_cast<Word>((w & 0xFFF7) | (slot & kFlagGIE));
  else
    slot = w;
}

RegisterFile reg_write(RegisterFile R, int r, Word w, Mode m) {
  reg_set(R, r, w, m);
  return R;
}

bool status_flag(const RegisterFile& R, Flag f) {
  Word sr = R[SR];
  switch (f) {
    case Flag::C: return sr & kFlagC;
    case Flag::Z: return sr & kFlagZ;
    case Flag::N: return sr & kFlagN;
    case Flag::GIE: return sr & kFlagGIE;
    case Flag::V: return sr & kFlagV;
  }
  return false;
}

RegisterFile make_r0() { return {}; }

RegisterFile make_rinit(const MemoryImage& M) {
  RegisterFile R;
  R.r[PC] = M.read_word(0xFFFE) & 0xFFFE;
  R.r[SR] = kFlagGIE;
  return R;
}

std::pair<RegisterFile, RegisterFile> special_register_files(const MemoryImage& M) {
  return {make_r0(), make_rinit(M)};
}

std::string format_registers(const RegisterFile& R) {
  std::string s;
  char buf[16];
  for (int i = 0; i < 16; ++i) {
    std::snprintf(buf, sizeof buf, "%sr%d=%04x", i ? " " : "", i, R[i]);
    s += buf;
  }
  return s;
}

}  // namespace encsim
