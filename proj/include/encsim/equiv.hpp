#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "encsim/assembler.hpp"
#include "encsim/cpu.hpp"
#include "encsim/trace.hpp"

namespace encsim {

struct Module {
  std::string name;
  PartialMemory mem;
  Layout L;
};

// Builds a module from the protected part of assembler output; unprotected bytes in the same
// file are ignored. Throws LayoutViolation if there is no layout.
Module module_from_asm(const std::string& name, const AsmResult& a);

struct Context {
  std::string id;
  PartialMemory mem;
  DevicePtr D;
};

enum class Convergence { Yes, No, Unknown };  // No = stuck, Unknown = out of fuel
const char* convergence_name(Convergence c);

Convergence converges(const Context& C, const Module& M, Policy p, std::uint64_t fuel);

enum class Divergence { Register, Pc, Timing, ConvVsJmpOut, JmpOutVsEmpty, Impossible };
const char* divergence_name(Divergence d);

// β̄ and β̄' split at the first differing action. b / b2 are nullopt for EMPTY.
struct DistinguishingTraces {
  std::vector<CoarseObs> prefix;
  std::optional<CoarseObs> b, b2;
  std::vector<CoarseObs> full, full2;
};

DistinguishingTraces split_traces(const std::vector<CoarseObs>& a, const std::vector<CoarseObs>& b);

struct DivergenceShape {
  Divergence kind = Divergence::Impossible;
  int reg = -1;       // Register case
  bool x_is_first = true;  // which side lacks the jmpOut in the two term-dependent cases
};

DivergenceShape classify_divergence(const DistinguishingTraces& d);

struct BuiltContextMemory {
  PartialMemory mem;
  Addr a_halt = 0, a_loop = 0, a_jin = 0, a_ep = 0, a_rdiff = 0;
  std::optional<Addr> joutd, joutd2;
  // The divergent exits that land on the exception handler in the built context.
  bool exc = false, exc2 = false;
};

// reset_target is the address stored at 0xFFFE by the distinguishing context; a jmpOut to it
// with all other registers zero is taken to be an exception, which the built context routes
// to A_EP. Throws AnchorCollision.
BuiltContextMemory build_mem(const DistinguishingTraces& d, const Layout& L, Addr reset_target);

// Facts about the final in-enclave spans, measured under the stripped device.
struct SpanFacts {
  Convergence term = Convergence::Unknown, term2 = Convergence::Unknown;
  std::optional<std::uint64_t> ticks, ticks2;  // device steps from the last jmpIn to the next jmpOut
};

// nullptr stands for ⊥.
std::shared_ptr<const TableDevice> build_device(const BuiltContextMemory& bm, const DistinguishingTraces& d,
                                                const SpanFacts& f);

struct FaOptions {
  std::size_t budget = 4000;   // contexts
  std::uint64_t fuel = 4000;   // steps per run
  Policy low = Policy::SL;
  std::vector<Word> guesses;   // values passed in r15; module data words are added
};

struct DistinguisherRecord {
  std::string context_id;
  Divergence kind = Divergence::Impossible;    // first difference of the low-level traces
  Divergence gadget = Divergence::Impossible;  // difference of the interrupt-free continuations
  std::vector<CoarseObs> trace, trace2;
  Convergence low = Convergence::Unknown, low2 = Convergence::Unknown;
  SpanFacts facts;
  bool built = false;  // build_device returned a device
  std::string build_error;
  Convergence sh = Convergence::Unknown, sh2 = Convergence::Unknown;
  bool confirmed = false;  // exactly one module converges in the built SH context
};

struct FaVerdict {
  enum Outcome { EquivalentWithinBudget, Confirmed, Counterexample, LowOnly } outcome = EquivalentWithinBudget;
  Policy low = Policy::SL;
  std::size_t contexts = 0;
  bool low_distinguished = false;
  bool sh_distinguished = false;
  std::vector<DistinguisherRecord> records;
};

const char* outcome_name(FaVerdict::Outcome o);

// Template contexts used by the search.
std::vector<Context> enumerate_contexts(const Module& a, const Module& b, const FaOptions& o);

FaVerdict check_fa_instance(const Module& a, const Module& b, const FaOptions& o);

// Runs the backtranslation for one low-level distinguisher and replays it under SH.
DistinguisherRecord backtranslate(const Context& C, const Module& a, const Module& b, const FaOptions& o);

std::string format_verdict_csv(const FaVerdict& v);
std::string format_verdict_text(const FaVerdict& v);

}  // namespace encsim
