#include "encsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <thread>

#include "encsim/assembler.hpp"
#include "encsim/trace.hpp"

namespace encsim {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::uint64_t number(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used, 0);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": bad number '" + s + "'");
}

std::pair<std::string, Word> binding(const std::string& s, int line) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(Errc::ParseError, "line " + std::to_string(line) + ": expected NAME=value, got '" + s + "'");
  return {s.substr(0, eq), static_cast<Word>(number(s.substr(eq + 1), line))};
}

struct Prepared {
  AsmResult a;
  Layout L;
};

Prepared prepare(const Scenario& s, const std::string& secret) {
  std::map<std::string, Word> syms = s.symbols;
  for (const auto& [id, b] : s.secrets)
    if (id == secret)
      for (const auto& [k, v] : b) syms[k] = v;
  Prepared p{assemble(s.program, syms), {}};
  if (!p.a.layout) throw Error(Errc::LayoutViolation, s.name + ": program has no .layout");
  p.L = *p.a.layout;
  return p;
}

TracedRun run_with(const Scenario& s, const Prepared& p, std::set<std::uint64_t> ints) {
  ScheduleDevice::Params dp;
  dp.timer = true;
  dp.int_times = std::move(ints);
  dp.rearm = s.rearm;
  DevicePtr D = make_device(dp);
  Machine m{p.L, D, s.policy};
  return run_traced(m, init_config(p.a.ctx, p.a.mod, p.L, D), s.fuel);
}

std::uint64_t arrival(const Scenario& s, const Prepared& p, const std::string& at) {
  auto w = split_ws(at);
  if (w.size() == 2 && w[0] == "after") {
    auto it = p.a.labels.find(w[1]);
    if (it == p.a.labels.end()) throw Error(Errc::LabelUndefined, s.name + ": no label '" + w[1] + "'");
    auto r = run_with(s, p, {});
    for (const auto& st : r.steps)
      if (st.pre.R[PC] == it->second) return st.post.t;
    throw Error(Errc::ParseError, s.name + ": label '" + w[1] + "' is never executed");
  }
  if (w.size() == 1) return number(w[0], 0);
  throw Error(Errc::ParseError, s.name + ": bad arrival '" + at + "'");
}

std::int64_t isr_entry_latency(const Scenario& s, const Prepared& p, std::uint64_t a) {
  auto r = run_with(s, p, {a});
  for (const auto& st : r.steps)
    if (st.post.R[PC] == p.L.isr && st.pre.R[PC] != p.L.isr && !st.post.halted)
      return static_cast<std::int64_t>(st.post.t - a);
  return -1;
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::RetiPad: return "reti-pad";
    case Rule::DecodeFail: return "decode-fail";
    case Rule::HaltUM: return "halt";
    case Rule::HaltPM: return "halt-pm";
    case Rule::Violation: return "violation";
    case Rule::Reti: return "reti";
    case Rule::RetiChain: return "reti-chain";
    case Rule::RetiPrePad: return "reti-prepad";
    case Rule::Exec: return "exec";
    case Rule::Stuck: return "stuck";
  }
  return "?";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
  return o + "\"";
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir, const std::string& name) {
  Scenario s;
  s.name = name;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  auto fail = [&](const std::string& m) { throw Error(Errc::ParseError, name + ":" + std::to_string(no) + ": " + m); };
  while (std::getline(in, raw)) {
    ++no;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    auto w = split_ws(raw);
    if (w.empty()) continue;
    if (w.size() >= 3 && w[1] == "=") {
      const std::string& v = w[2];
      if (w[0] == "program") {
        std::filesystem::path p(v);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        s.program = read_text_file(p.string());
      } else if (w[0] == "policy") {
        auto p = policy_from_name(v);
        if (!p) fail("unknown policy '" + v + "'");
        s.policy = *p;
      } else if (w[0] == "fuel") {
        s.fuel = number(v, no);
      } else if (w[0] == "horizon") {
        s.horizon = number(v, no);
      } else if (w[0] == "rearm") {
        s.rearm = number(v, no);
      } else {
        fail("unknown key '" + w[0] + "'");
      }
      continue;
    }
    const std::string& d = w[0];
    if (d == "symbol") {
      for (std::size_t i = 1; i < w.size(); ++i) s.symbols.insert(binding(w[i], no));
    } else if (d == "secret") {
      if (w.size() < 2) fail("secret needs an id");
      std::map<std::string, Word> b;
      for (std::size_t i = 2; i < w.size(); ++i) b.insert(binding(w[i], no));
      s.secrets.emplace_back(w[1], b);
    } else if (d == "probe") {
      if (w.size() < 2) fail("probe needs a kind");
      ProbeSpec p;
      std::vector<std::string> args(w.begin() + 2, w.end());
      if (args.size() >= 2 && args[args.size() - 2] == "as") {
        p.name = args.back();
        args.resize(args.size() - 2);
      }
      std::string joined;
      for (auto& a : args) joined += (joined.empty() ? "" : " ") + a;
      const std::string& k = w[1];
      if (k == "start_to_end") {
        p.kind = ProbeSpec::StartToEnd;
      } else if (k == "latency") {
        p.kind = ProbeSpec::Latency;
      } else if (k == "latency_sweep") {
        p.kind = ProbeSpec::LatencySweep;
      } else if (k == "resume_to_end") {
        p.kind = ProbeSpec::ResumeToEnd;
      } else if (k == "int_count") {
        p.kind = ProbeSpec::IntCount;
      } else if (k == "mem") {
        p.kind = ProbeSpec::Mem;
        if (args.size() != 1) fail("mem needs an address");
        p.addr = static_cast<Addr>(number(args[0], no));
      } else {
        fail("unknown probe '" + k + "'");
      }
      bool needs_at = p.kind == ProbeSpec::Latency || p.kind == ProbeSpec::ResumeToEnd || p.kind == ProbeSpec::IntCount;
      if (needs_at) {
        if (args.empty()) fail(k + " needs an arrival");
        p.at = joined;
      }
      if (p.name.empty()) p.name = k;
      for (const auto& q : s.probes)
        if (q.name == p.name) fail("duplicate probe name '" + p.name + "'");
      s.probes.push_back(p);
    } else if (d == "expect" || d == "expect_diff" || d == "expect_same") {
      Expectation e;
      e.text = raw.substr(raw.find_first_not_of(" \t"));
      while (!e.text.empty() && (e.text.back() == ' ' || e.text.back() == '\t')) e.text.pop_back();
      if (d == "expect") {
        if (w.size() != 4) fail("expect <probe> <secret> <value>");
        e.kind = Expectation::Value;
        e.probe = w[1];
        e.secret = w[2];
        e.value = static_cast<std::int64_t>(number(w[3], no));
      } else if (d == "expect_diff") {
        if (w.size() != 3) fail("expect_diff <probe> <value>");
        e.kind = Expectation::Diff;
        e.probe = w[1];
        e.value = static_cast<std::int64_t>(number(w[2], no));
      } else {
        if (w.size() != 2) fail("expect_same <probe>");
        e.kind = Expectation::Same;
        e.probe = w[1];
      }
      s.expects.push_back(e);
    } else {
      fail("unknown directive '" + d + "'");
    }
  }
  if (s.program.empty()) fail("no program");
  if (s.secrets.empty()) s.secrets.emplace_back("default", std::map<std::string, Word>{});
  for (const auto& e : s.expects)
    if (std::none_of(s.probes.begin(), s.probes.end(), [&](const ProbeSpec& p) { return p.name == e.probe; }))
      throw Error(Errc::ParseError, name + ": expectation on unknown probe '" + e.probe + "'");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::filesystem::path p(path);
  return parse_scenario(read_text_file(path), p.parent_path().string(), p.stem().string());
}

std::int64_t probe_value(const Scenario& s, const std::string& secret, const ProbeSpec& probe) {
  Prepared p = prepare(s, secret);
  switch (probe.kind) {
    case ProbeSpec::StartToEnd: {
      auto r = run_with(s, p, {});
      for (const auto& o : coarse_trace(fine_trace(r)))
        if (o.kind == CoarseObs::JmpOut) return static_cast<std::int64_t>(o.dt);
      return -1;
    }
    case ProbeSpec::Latency: return isr_entry_latency(s, p, arrival(s, p, probe.at));
    case ProbeSpec::LatencySweep: {
      auto r = run_with(s, p, {});
      std::optional<std::int64_t> common;
      for (const auto& st : r.steps) {
        if (mode_of(p.L, st.pre.R[PC]) != Mode::PM || st.pre.bkind != Backup::None) continue;
        for (std::uint64_t a = st.pre.t; a < st.post.t; ++a) {
          auto v = isr_entry_latency(s, p, a);
          if (common && *common != v) return -1;
          common = v;
        }
      }
      return common.value_or(-1);
    }
    case ProbeSpec::ResumeToEnd: {
      auto r = run_with(s, p, {arrival(s, p, probe.at)});
      std::optional<std::uint64_t> resumed;
      for (const auto& st : r.steps) {
        if (!resumed && st.obs.kind == FineObs::Reti) resumed = st.post.t;
        if (resumed && st.obs.kind == FineObs::JmpOut) return static_cast<std::int64_t>(st.post.t - *resumed);
      }
      return -1;
    }
    case ProbeSpec::IntCount: {
      std::uint64_t a = arrival(s, p, probe.at);
      auto r = run_with(s, p, {a});
      bool inside = false;
      std::int64_t n = 0;
      for (const auto& st : r.steps) {
        if (st.post.t > a + s.horizon) return n;
        if (st.obs.kind == FineObs::JmpIn) inside = true;
        if (!inside) continue;
        if (st.obs.kind == FineObs::Handle) ++n;
        if (st.obs.kind == FineObs::JmpOut) return n;
      }
      return r.outcome == RunOutcome::OutOfFuel ? -1 : n;
    }
    case ProbeSpec::Mem: {
      auto r = run_with(s, p, {});
      if (r.outcome != RunOutcome::Terminated) return -1;
      return r.last.M.read_word(probe.addr);
    }
  }
  return -1;
}

bool Report::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.ok; });
}

Report run_scenario(const Scenario& s) {
  Report rep;
  rep.scenario = s.name;
  std::map<std::string, std::vector<std::int64_t>> by_probe;
  for (const auto& probe : s.probes) {
    for (const auto& [id, b] : s.secrets) {
      std::int64_t v = probe_value(s, id, probe);
      rep.rows.push_back({s.name, id, probe.name, v});
      by_probe[probe.name].push_back(v);
    }
  }
  auto value_of = [&](const std::string& probe, const std::string& secret) -> std::optional<std::int64_t> {
    for (const auto& r : rep.rows)
      if (r.probe == probe && r.secret == secret) return r.value;
    return std::nullopt;
  };
  for (const auto& e : s.expects) {
    CheckResult c{e.text, false, ""};
    const auto& vals = by_probe[e.probe];
    switch (e.kind) {
      case Expectation::Value: {
        auto v = value_of(e.probe, e.secret);
        if (!v) {
          c.detail = "no secret '" + e.secret + "'";
        } else {
          c.ok = *v == e.value;
          c.detail = "got " + std::to_string(*v);
        }
        break;
      }
      case Expectation::Diff:
        if (vals.size() < 2) {
          c.detail = "needs two secrets";
        } else {
          std::int64_t d = vals[0] > vals[1] ? vals[0] - vals[1] : vals[1] - vals[0];
          c.ok = d == e.value && vals[0] >= 0 && vals[1] >= 0;
          c.detail = "got " + std::to_string(vals[0]) + " vs " + std::to_string(vals[1]);
        }
        break;
      case Expectation::Same:
        c.ok = !vals.empty() && vals[0] >= 0 && std::all_of(vals.begin(), vals.end(), [&](auto v) { return v == vals[0]; });
        c.detail = "got";
        for (auto v : vals) c.detail += " " + std::to_string(v);
        break;
    }
    rep.checks.push_back(c);
  }
  return rep;
}

std::vector<Report> run_scenarios(const std::vector<Scenario>& ss, unsigned workers) {
  std::vector<Report> out(ss.size());
  std::vector<std::string> errors(ss.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(ss.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < ss.size();) {
      try {
        out[i] = run_scenario(ss[i]);
      } catch (const std::exception& e) {
        out[i].scenario = ss[i].name;
        out[i].checks.push_back({"run", false, e.what()});
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

std::string report_csv(const std::vector<Report>& rs) {
  std::ostringstream o;
  o << "scenario,secret,probe,value\n";
  for (const auto& r : rs)
    for (const auto& row : r.rows)
      o << csv_field(row.scenario) << ',' << csv_field(row.secret) << ',' << csv_field(row.probe) << ',' << row.value
        << '\n';
  return o.str();
}

std::string report_text(const std::vector<Report>& rs) {
  std::ostringstream o;
  for (const auto& r : rs) {
    o << r.scenario << ": " << (r.ok() ? "ok" : "FAILED") << '\n';
    for (const auto& row : r.rows) o << "  " << row.probe << '[' << row.secret << "] = " << row.value << '\n';
    for (const auto& c : r.checks) o << "  " << (c.ok ? "pass " : "FAIL ") << c.text << " (" << c.detail << ")\n";
  }
  return o.str();
}

std::string trace_csv(const Scenario& s) {
  std::ostringstream o;
  o << "secret,step,rule,obs,k,t,pc\n";
  for (const auto& [id, b] : s.secrets) {
    Prepared p = prepare(s, id);
    std::set<std::uint64_t> ints;
    if (!s.probes.empty() && !s.probes[0].at.empty()) ints.insert(arrival(s, p, s.probes[0].at));
    auto r = run_with(s, p, ints);
    std::size_t n = 0;
    for (const auto& st : r.steps) {
      std::string obs = format_fine(st.obs);
      char pc[8];
      std::snprintf(pc, sizeof pc, "%04x", st.post.R[PC]);
      o << csv_field(id) << ',' << n++ << ',' << rule_name(st.rule) << ',' << csv_field(obs) << ',' << st.obs.k << ','
        << st.post.t << ',' << pc << '\n';
    }
  }
  return o.str();
}

}  // namespace encsim
