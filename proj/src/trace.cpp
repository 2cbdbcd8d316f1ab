#include "encsim/trace.hpp"

#include <cstdio>

namespace encsim {

namespace {

bool is_pm(const Layout& L, const RegisterFile& R) { return mode_of(L, R[PC]) == Mode::PM; }

std::uint64_t time_of(const FineObs& o) {
  switch (o.kind) {
    case FineObs::Tau:
    case FineObs::Handle:
    case FineObs::Reti:
    case FineObs::JmpOut: return o.k;
    default: return 0;
  }
}

}  // namespace

std::uint32_t ilen(const Layout& L, const Configuration& c) {
  if (c.halted || c.B.kind != Backup::None || !is_pm(L, c.R)) return 0;
  auto i = decode(c.M, c.R[PC]);
  return i ? static_cast<std::uint32_t>(cycles(*i)) : 0;
}

Snapshot snapshot(const Layout& L, const Configuration& c) {
  return {c.halted, c.B.kind, c.R, c.t, ilen(L, c)};
}

FineObs observe_step(const Layout& L, const Snapshot& pre, const Snapshot& post) {
  FineObs o;
  o.k = post.t - pre.t;
  auto with_regs = [&](FineObs::Kind kind) {
    o.kind = kind;
    o.R = post.R;
    return o;
  };
  auto plain = [&](FineObs::Kind kind) {
    o.kind = kind;
    if (kind == FineObs::Xi || kind == FineObs::Conv) o.k = 0;
    return o;
  };
  if (pre.halted) throw Error(Errc::UnclassifiableStep, "step from HALT");
  if (post.halted) return plain(FineObs::Conv);
  bool pm = is_pm(L, pre.R), pm2 = is_pm(L, post.R);
  if (pre.bkind != Backup::Full && post.bkind == Backup::Full && !pm2) return plain(FineObs::Handle);
  if (pre.bkind == Backup::Full && post.bkind == Backup::PadOnly) return plain(FineObs::Reti);
  if (pre.bkind == Backup::PadOnly && post.bkind == Backup::None)
    return pm2 ? plain(FineObs::Tau) : with_regs(FineObs::JmpOut);
  if (pre.bkind == Backup::Full && !pm && !pm2) return plain(FineObs::Xi);
  if (pre.bkind == Backup::None && post.bkind == Backup::None) {
    if (pm && pm2) return plain(FineObs::Tau);
    if (!pm && pm2) return with_regs(FineObs::JmpIn);
    if (pm && !pm2) return with_regs(FineObs::JmpOut);
    return plain(FineObs::Xi);
  }
  throw Error(Errc::UnclassifiableStep, "no observation rule matches");
}

TracedRun run_traced(const Machine& m, Configuration c, std::uint64_t fuel, bool keep_jmpin_configs) {
  TracedRun out;
  std::uint64_t steps = 0;
  while (!c.halted && steps < fuel) {
    Snapshot pre = snapshot(m.L, c);
    Rule rule = step_inplace(m, c);
    if (rule == Rule::Stuck) {
      out.outcome = RunOutcome::Stuck;
      out.last = std::move(c);
      return out;
    }
    ++steps;
    Snapshot post = snapshot(m.L, c);
    FineObs obs = observe_step(m.L, pre, post);
    if (keep_jmpin_configs && obs.kind == FineObs::JmpIn) out.after_jmpin.push_back(c);
    out.steps.push_back({pre, post, rule, obs});
  }
  out.outcome = c.halted ? RunOutcome::Terminated : RunOutcome::OutOfFuel;
  out.last = std::move(c);
  return out;
}

std::vector<FineObs> fine_trace(const TracedRun& r) {
  std::vector<FineObs> out;
  out.reserve(r.steps.size());
  for (auto& s : r.steps) out.push_back(s.obs);
  return out;
}

std::vector<CoarseObs> coarse_trace(const std::vector<FineObs>& fine) {
  std::vector<CoarseObs> out;
  bool inside = false;
  std::uint64_t acc = 0;
  for (auto& o : fine) {
    switch (o.kind) {
      case FineObs::Xi: break;
      case FineObs::Conv:  // may end an open span when an ISR halts
        out.push_back({CoarseObs::Conv, 0, {}});
        return out;
      case FineObs::JmpIn:
        if (inside) throw Error(Errc::MalformedFineTrace, "jmpIn inside the enclave");
        inside = true;
        acc = 0;
        out.push_back({CoarseObs::JmpIn, 0, o.R});
        break;
      case FineObs::JmpOut:
        if (!inside) throw Error(Errc::MalformedFineTrace, "jmpOut outside the enclave");
        inside = false;
        out.push_back({CoarseObs::JmpOut, acc + o.k, o.R});
        break;
      case FineObs::Tau:
      case FineObs::Handle:
      case FineObs::Reti:
        if (!inside) throw Error(Errc::MalformedFineTrace, "enclave observable outside the enclave");
        acc += time_of(o);
        break;
    }
  }
  return out;
}

std::vector<InterruptSegment> interrupt_segments(const std::vector<FineObs>& fine, std::size_t from, std::size_t to) {
  std::vector<InterruptSegment> out;
  to = std::min(to, fine.size());
  for (std::size_t i = from; i < to; ++i) {
    if (fine[i].kind != FineObs::Handle) continue;
    std::size_t j = i + 1;
    while (j < to && fine[j].kind == FineObs::Xi) ++j;
    if (j < to && fine[j].kind == FineObs::Reti) out.push_back({i, j});
  }
  return out;
}

bool equal_up_to_timings(const std::vector<CoarseObs>& a, const std::vector<CoarseObs>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].kind != b[i].kind || !(a[i].R == b[i].R)) return false;
  }
  return true;
}

std::vector<SpanTiming> span_timings(const TracedRun& r) {
  std::vector<SpanTiming> out;
  auto fine = fine_trace(r);
  std::size_t start = SIZE_MAX;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    if (fine[i].kind == FineObs::JmpIn) {
      start = i;
    } else if (fine[i].kind == FineObs::JmpOut && start != SIZE_MAX) {
      SpanTiming s;
      for (std::size_t j = start + 1; j <= i; ++j) {
        s.dt += time_of(fine[j]);
        s.ilen_sum += r.steps[j].pre.ilen;
      }
      s.segments = interrupt_segments(fine, start + 1, i + 1).size();
      out.push_back(s);
      start = SIZE_MAX;
    }
  }
  return out;
}

std::string format_fine(const FineObs& o) {
  switch (o.kind) {
    case FineObs::Xi: return "XI";
    case FineObs::Tau: return "TAU " + std::to_string(o.k);
    case FineObs::Conv: return "CONV";
    case FineObs::JmpIn: return "JMPIN " + format_registers(o.R);
    case FineObs::JmpOut: return "JMPOUT k=" + std::to_string(o.k) + " " + format_registers(o.R);
    case FineObs::Handle: return "HANDLE " + std::to_string(o.k);
    case FineObs::Reti: return "RETI " + std::to_string(o.k);
  }
  return "?";
}

std::string format_coarse(const CoarseObs& o) {
  switch (o.kind) {
    case CoarseObs::Conv: return "CONV";
    case CoarseObs::JmpIn: return "JMPIN " + format_registers(o.R);
    case CoarseObs::JmpOut: return "JMPOUT dt=" + std::to_string(o.dt) + " " + format_registers(o.R);
  }
  return "?";
}

}  // namespace encsim
