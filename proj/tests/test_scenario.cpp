#include "doctest.h"
#include "encsim/scenario.hpp"
#include "support.hpp"

using namespace encsim;

namespace {

const std::string kDir = testsup::corpus("scenarios");

Scenario inline_scenario(const std::string& body) {
  return parse_scenario("program = ../examples/ex1.asm\nsymbol GUESS=0x42\nsecret ok PWD=0x42\nsecret fail PWD=0x17\n" + body,
                        kDir, "inline");
}

}  // namespace

TEST_CASE("start-to-end probe on the password check") {
  Scenario s = inline_scenario("policy = sh\nprobe start_to_end\nprobe mem 0x0204 as delta\nexpect start_to_end ok 18\n");
  Report r = run_scenario(s);
  REQUIRE(r.rows.size() == 4);  // two secrets per probe
  CHECK(r.rows[0].value == 18);
  CHECK(r.rows[1].value == 16);
  // The context measures with IN before and after the call: 4 extra cycles.
  CHECK(r.rows[2].value == 22);
  CHECK(r.rows[3].value == 20);
  CHECK(r.ok());
}

TEST_CASE("failed expectations are reported") {
  Scenario s = inline_scenario("probe start_to_end\nexpect start_to_end ok 17\nexpect_same start_to_end\nexpect_diff start_to_end 2\n");
  Report r = run_scenario(s);
  REQUIRE(r.checks.size() == 3);
  CHECK_FALSE(r.checks[0].ok);
  CHECK_FALSE(r.checks[1].ok);
  CHECK(r.checks[2].ok);
  CHECK_FALSE(r.ok());
  CHECK(report_text({r}).find("FAIL") != std::string::npos);
}

TEST_CASE("csv report") {
  Scenario s = inline_scenario("probe start_to_end\n");
  std::string csv = report_csv({run_scenario(s)});
  CHECK(csv == "scenario,secret,probe,value\ninline,ok,start_to_end,18\ninline,fail,start_to_end,16\n");
}

TEST_CASE("latency probes") {
  auto s = load_scenario(testsup::corpus("scenarios/ex2_latency_naive.scn"));
  CHECK(s.policy == Policy::Naive);
  auto lat = std::find_if(s.probes.begin(), s.probes.end(), [](auto& p) { return p.kind == ProbeSpec::Latency; });
  REQUIRE(lat != s.probes.end());
  CHECK(probe_value(s, "ok", *lat) == 10);
  CHECK(probe_value(s, "fail", *lat) == 7);
  s.policy = Policy::SL;
  CHECK(probe_value(s, "ok", *lat) == 12);
  CHECK(probe_value(s, "fail", *lat) == 12);
}

TEST_CASE("all bundled scenarios pass") {
  std::vector<Scenario> ss;
  for (const char* n : {"ex1_start_to_end", "ex2_latency_naive", "ex2_latency_sl", "ex3_resume_constlat", "ex3_resume_sl",
                        "ex4_count_naive", "ex4_count_sl"})
    ss.push_back(load_scenario(testsup::corpus(std::string("scenarios/") + n + ".scn")));
  auto reports = run_scenarios(ss, 4);
  REQUIRE(reports.size() == ss.size());
  for (const auto& r : reports) {
    CAPTURE(report_text({r}));
    CHECK(r.ok());
  }
}

TEST_CASE("trace csv") {
  Scenario s = inline_scenario("policy = sh\n");
  std::string csv = trace_csv(s);
  CHECK(csv.rfind("secret,step,rule,obs,k,t,pc\n", 0) == 0);
  CHECK(csv.find("ok,") != std::string::npos);
  CHECK(csv.find("fail,") != std::string::npos);
}

TEST_CASE("scenario parse errors") {
  auto bad = [](const std::string& body) {
    try {
      parse_scenario(body, kDir, "bad");
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::IoError;
  };
  CHECK(bad("secret ok PWD=1\n") == Errc::ParseError);  // no program
  CHECK(bad("program = ../examples/ex1.asm\npolicy = fast\n") == Errc::ParseError);
  CHECK(bad("program = ../examples/ex1.asm\nprobe teleport\n") == Errc::ParseError);
  CHECK(bad("program = ../examples/ex1.asm\nprobe start_to_end\nexpect nothing ok 1\n") == Errc::ParseError);
  CHECK(bad("program = ../examples/ex1.asm\nwibble\n") == Errc::ParseError);
  CHECK(bad("program = ../examples/missing.asm\n") == Errc::IoError);
  CHECK_THROWS_AS(load_scenario("/nonexistent.scn"), Error);
}
