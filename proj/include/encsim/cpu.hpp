#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "encsim/device.hpp"
#include "encsim/isa.hpp"
#include "encsim/mac.hpp"
#include "encsim/regfile.hpp"

namespace encsim {

struct Backup {
  enum Kind : std::uint8_t { None, Full, PadOnly } kind = None;
  RegisterFile R;
  Addr pcold = 0;
  std::uint32_t t_pad = 0;

  bool operator==(const Backup&) const = default;
};

struct Configuration {
  bool halted = false;
  Backup B;
  DevState dev = 0;
  std::uint64_t t = 0;
  std::optional<std::uint64_t> t_a;
  MemoryImage M;
  RegisterFile R;
  Addr pcold = 0xFFFE;

  bool operator==(const Configuration&) const = default;
};

// SL and SH follow the paper's rules. Naive and ConstLatency are attack strawmen and
// must never be used as a secure reference.
enum class Policy { SH, SL, Naive, ConstLatency };

const char* policy_name(Policy p);
std::optional<Policy> policy_from_name(const std::string& s);

struct Machine {
  Layout L;
  DevicePtr D;
  Policy policy = Policy::SL;
};

enum class Rule : std::uint8_t {
  RetiPad,
  DecodeFail,
  HaltUM,
  HaltPM,
  Violation,
  Reti,
  RetiChain,
  RetiPrePad,
  Exec,
  Stuck,
};

Configuration init_config(const MemoryImage& M, const DevicePtr& D);
Configuration init_config(const PartialMemory& ctx, const PartialMemory& mod, const Layout& L, const DevicePtr& D);
Configuration except_config(const Configuration& c);

// Applies the policy's interrupt logic at an instruction boundary; c.pcold is the pc of
// the instruction that just completed.
void interrupt_logic(const Machine& m, Configuration& c);

// One transition in place. Returns Rule::Stuck (configuration untouched) when IN finds no
// enabled read. Precondition: !c.halted.
Rule step_inplace(const Machine& m, Configuration& c);

// Pure form; throws StuckConfiguration.
Configuration step(const Machine& m, const Configuration& c);

struct RunOutcome {
  enum Kind { Terminated, OutOfFuel, Stuck } kind = OutOfFuel;
  Configuration last;
  std::uint64_t steps = 0;
};

RunOutcome run(const Machine& m, Configuration c, std::uint64_t fuel);

// Checkpoint record, little-endian: "ENCK", u16 version, flags, backup, device state,
// t, t_a, pcold, registers, then the 65536 memory bytes.
std::vector<std::uint8_t> serialize(const Configuration& c);
Configuration deserialize(const std::vector<std::uint8_t>& bytes);

}  // namespace encsim
