#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "encsim/cpu.hpp"

namespace encsim {

struct FineObs {
  enum Kind : std::uint8_t { Xi, Tau, Conv, JmpIn, JmpOut, Handle, Reti } kind = Xi;
  std::uint64_t k = 0;
  RegisterFile R;

  bool operator==(const FineObs&) const = default;
};

struct CoarseObs {
  enum Kind : std::uint8_t { Conv, JmpIn, JmpOut } kind = Conv;
  std::uint64_t dt = 0;
  RegisterFile R;

  bool operator==(const CoarseObs&) const = default;
};

// The part of a configuration the observation rules look at.
struct Snapshot {
  bool halted = false;
  Backup::Kind bkind = Backup::None;
  RegisterFile R;
  std::uint64_t t = 0;
  std::uint32_t ilen = 0;
};

Snapshot snapshot(const Layout& L, const Configuration& c);

// cycles of the current instruction when executing protected code with no backup, else 0.
std::uint32_t ilen(const Layout& L, const Configuration& c);

// Throws UnclassifiableStep.
FineObs observe_step(const Layout& L, const Snapshot& pre, const Snapshot& post);

struct StepRecord {
  Snapshot pre;
  Snapshot post;
  Rule rule;
  FineObs obs;
};

struct TracedRun {
  RunOutcome::Kind outcome = RunOutcome::OutOfFuel;
  std::vector<StepRecord> steps;
  Configuration last;
  // Configurations right after each jmpIn step, in order.
  std::vector<Configuration> after_jmpin;
};

TracedRun run_traced(const Machine& m, Configuration c, std::uint64_t fuel, bool keep_jmpin_configs = false);

std::vector<FineObs> fine_trace(const TracedRun& r);

// Throws MalformedFineTrace. An unterminated final span is dropped.
std::vector<CoarseObs> coarse_trace(const std::vector<FineObs>& fine);

struct InterruptSegment {
  std::size_t i, j;
};
std::vector<InterruptSegment> interrupt_segments(const std::vector<FineObs>& fine, std::size_t from = 0,
                                                 std::size_t to = SIZE_MAX);

bool equal_up_to_timings(const std::vector<CoarseObs>& a, const std::vector<CoarseObs>& b);

// Per completed in-enclave span: Δt, Σ ilen and the number of complete segments.
struct SpanTiming {
  std::uint64_t dt = 0;
  std::uint64_t ilen_sum = 0;
  std::size_t segments = 0;
};
std::vector<SpanTiming> span_timings(const TracedRun& r);

std::string format_fine(const FineObs& o);
std::string format_coarse(const CoarseObs& o);

}  // namespace encsim
