#include "doctest.h"
#include "support.hpp"

using namespace encsim;

namespace {

FineObs fo(FineObs::Kind k, std::uint64_t t = 0, Word r4 = 0) {
  FineObs o;
  o.kind = k;
  o.k = t;
  o.R.r[4] = r4;
  return o;
}

CoarseObs out(std::uint64_t dt, Word r4) {
  CoarseObs o;
  o.kind = CoarseObs::JmpOut;
  o.dt = dt;
  o.R.r[4] = r4;
  return o;
}

const Layout L{0x8000, 0x8100, 0x9000, 0x9100, 0x5000};

const std::string kEnclave =
    ".layout 0x8000 0x8100 0x9000 0x9100 0x5000\n.resetvec main\n"
    ".section code\nMOVI 0x9000 r5\nMOVS r4 r5\nNOP\nJMP r9\n"
    ".section unprot\n.org 0x0400\nmain:\nMOVI 0x3000 sp\nMOVI exit r9\nMOVI 0x8000 r4\nJMP r4\n"
    "exit:\nHLT\n.org 0x5000\nNOP\nRETI\n";

}  // namespace

TEST_CASE("coarse trace sums the time inside a span") {
  std::vector<FineObs> fine{fo(FineObs::Xi), fo(FineObs::Xi), fo(FineObs::JmpIn, 0, 1), fo(FineObs::Tau, 2),
                            fo(FineObs::Tau, 1), fo(FineObs::JmpOut, 2, 9)};
  auto c = coarse_trace(fine);
  REQUIRE(c.size() == 2);
  CHECK(c[0].kind == CoarseObs::JmpIn);
  CHECK(c[0].R[4] == 1);
  CHECK(c[1] == out(5, 9));

  auto h = coarse_trace({fo(FineObs::Xi), fo(FineObs::Conv)});
  REQUIRE(h.size() == 1);
  CHECK(h[0].kind == CoarseObs::Conv);

  // An unterminated span is dropped.
  CHECK(coarse_trace({fo(FineObs::JmpIn), fo(FineObs::Tau, 3)}).size() == 1);
  CHECK_THROWS_AS(coarse_trace({fo(FineObs::Tau, 1)}), Error);
}

TEST_CASE("equal up to timings") {
  std::vector<CoarseObs> a{out(5, 1)}, b{out(9, 1)}, c{out(5, 2)};
  CHECK(equal_up_to_timings(a, a));
  CHECK(equal_up_to_timings(a, b));
  CHECK_FALSE(equal_up_to_timings(a, c));
  CHECK_FALSE(equal_up_to_timings(a, {}));
}

TEST_CASE("ilen") {
  auto l = testsup::load(kEnclave);
  Configuration c = l.c;
  c.R.r[PC] = 0x8004;  // MOVS
  CHECK(ilen(L, c) == 4);
  c.B.kind = Backup::Full;
  CHECK(ilen(L, c) == 0);
  c.B.kind = Backup::None;
  c.R.r[PC] = 0x0400;
  CHECK(ilen(L, c) == 0);
}

TEST_CASE("observations along an uninterrupted run") {
  auto l = testsup::load(kEnclave);
  auto tr = run_traced(l.m, l.c, 100);
  REQUIRE(tr.outcome == RunOutcome::Terminated);
  auto fine = fine_trace(tr);
  std::vector<FineObs::Kind> kinds;
  for (auto& o : fine) kinds.push_back(o.kind);
  using K = FineObs::Kind;
  CHECK(kinds == std::vector<K>{K::Xi, K::Xi, K::Xi, K::JmpIn, K::Tau, K::Tau, K::Tau, K::JmpOut, K::Conv});
  CHECK(fine[3].R[PC] == 0x8000);
  CHECK(fine[3].R[9] == tr.steps[3].post.R[9]);
  auto coarse = coarse_trace(fine);
  REQUIRE(coarse.size() == 3);
  CHECK(coarse[1].dt == 2 + 4 + 1 + 2);
}

TEST_CASE("an interrupted enclave instruction is observed as handle") {
  // MOVS runs over cycles [10,14); the arrival at 11 leaves x = 3 and a pad of 3.
  auto l = testsup::load(kEnclave, make_timer({11}), Policy::SL);
  auto tr = run_traced(l.m, l.c, 100);
  auto fine = fine_trace(tr);
  auto it = std::find_if(fine.begin(), fine.end(), [](auto& o) { return o.kind == FineObs::Handle; });
  REQUIRE(it != fine.end());
  CHECK(it->k == 4 + 3 + 6);
  auto segs = interrupt_segments(fine);
  REQUIRE(segs.size() == 1);
  CHECK(fine[segs[0].j].kind == FineObs::Reti);
  CHECK(fine[segs[0].j].k == 5);
  auto spans = span_timings(tr);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].segments == 1);
  CHECK(spans[0].ilen_sum == 2 + 4 + 1 + 2);
  CHECK(spans[0].dt == spans[0].ilen_sum + 17);
}
