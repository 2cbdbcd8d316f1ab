#pragma once

#include <array>
#include <string>
#include <utility>

#include "encsim/memory.hpp"

namespace encsim {

constexpr int PC = 0;
constexpr int SP = 1;
constexpr int SR = 2;

constexpr Word kFlagC = 0x0001;
constexpr Word kFlagZ = 0x0002;
constexpr Word kFlagN = 0x0004;
constexpr Word kFlagGIE = 0x0008;
constexpr Word kFlagV = 0x0100;

enum class Flag { C, Z, N, GIE, V };

// A pc inside the data section is neither PM nor UM.
enum class Mode { PM, UM, Neither };

Mode mode_of(const Layout& L, Addr pc);

struct RegisterFile {
  std::array<Word, 16> r{};

  Word operator[](int i) const { return r[static_cast<std::size_t>(i)]; }
  bool operator==(const RegisterFile&) const = default;
};

RegisterFile reg_write(RegisterFile R, int r, Word w, Mode m);
// In-place variant used by the CPU.
void reg_set(RegisterFile& R, int r, Word w, Mode m);

bool status_flag(const RegisterFile& R, Flag f);

RegisterFile make_r0();
RegisterFile make_rinit(const MemoryImage& M);
std::pair<RegisterFile, RegisterFile> special_register_files(const MemoryImage& M);

std::string format_registers(const RegisterFile& R);

}  // namespace encsim
