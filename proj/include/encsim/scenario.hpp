#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "encsim/cpu.hpp"

namespace encsim {

struct ProbeSpec {
  enum Kind { StartToEnd, Latency, LatencySweep, ResumeToEnd, IntCount, Mem } kind = StartToEnd;
  std::string name;
  std::string at;  // "after <label>" or a cycle number; Latency, ResumeToEnd, IntCount
  Addr addr = 0;   // Mem
};

struct Expectation {
  enum Kind { Value, Diff, Same } kind = Value;
  std::string probe;
  std::string secret;  // Value only
  std::int64_t value = 0;
  std::string text;
};

// Text format, one directive per line, `#` comments:
//   program = <file.asm>          relative to the scenario file
//   policy = sh|sl|naive|constlat
//   fuel = <steps>                default 10000
//   rearm = <steps>               schedule raises int? this long after each device write
//   horizon = <cycles>            int_count window after the arrival, default 1000
//   symbol NAME=<value>           shared by all secrets
//   secret <id> NAME=<value> ...
//   probe start_to_end | latency <at> | latency_sweep | resume_to_end <at> | int_count <at> | mem <addr>
//         [as <name>]             <at> is `after <label>` or a cycle number
//   expect <probe> <secret> <value>
//   expect_diff <probe> <value>   |v(first secret) - v(second secret)|
//   expect_same <probe>
struct Scenario {
  std::string name;
  std::string program;  // source text
  Policy policy = Policy::SH;
  std::uint64_t fuel = 10000;
  std::optional<std::uint64_t> rearm;
  std::uint64_t horizon = 1000;  // int_count stops counting this many cycles after the arrival
  std::map<std::string, Word> symbols;
  std::vector<std::pair<std::string, std::map<std::string, Word>>> secrets;
  std::vector<ProbeSpec> probes;
  std::vector<Expectation> expects;
};

Scenario parse_scenario(const std::string& text, const std::string& base_dir, const std::string& name);
Scenario load_scenario(const std::string& path);

struct ReportRow {
  std::string scenario, secret, probe;
  std::int64_t value = -1;  // -1 when the probe saw nothing
};

struct CheckResult {
  std::string text;
  bool ok = false;
  std::string detail;
};

struct Report {
  std::string scenario;
  std::vector<ReportRow> rows;
  std::vector<CheckResult> checks;
  bool ok() const;
};

Report run_scenario(const Scenario& s);
// Independent scenarios on a small worker pool; results keep input order.
std::vector<Report> run_scenarios(const std::vector<Scenario>& ss, unsigned workers = 0);

std::int64_t probe_value(const Scenario& s, const std::string& secret, const ProbeSpec& p);

std::string report_csv(const std::vector<Report>& rs);
std::string report_text(const std::vector<Report>& rs);

// Fine trace of every secret under the first probe's interrupt setup, as CSV.
std::string trace_csv(const Scenario& s);

}  // namespace encsim
