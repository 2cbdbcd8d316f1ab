#include "doctest.h"
#include "encsim/device.hpp"

using namespace encsim;

namespace {

// Ticks: state 0 -ε-> 1 -int?-> 2 -ε-> 2.
TableDevice one_interrupt() {
  TableDevice d(3, 0);
  d.set_tick(0, Tick::Eps, 1);
  d.set_tick(1, Tick::Int, 2);
  d.set_tick(2, Tick::Eps, 2);
  d.set_read(2, 0x77, 2);
  d.set_write_other(0, 0);
  return d;
}

}  // namespace

TEST_CASE("dwrap records the first arrival") {
  TableDevice d = one_interrupt();
  auto r = dwrap(d, 3, 0, 10, std::nullopt);
  CHECK(r.state == 2);
  CHECK(r.t == 13);
  REQUIRE(r.t_a);
  CHECK(*r.t_a == 11);
}

TEST_CASE("dwrap keeps a pending arrival when nothing new arrives") {
  TableDevice d = one_interrupt();
  auto r = dwrap(d, 4, 2, 10, 7);
  CHECK(r.t == 14);
  CHECK(r.t_a == std::optional<std::uint64_t>(7));
  // A fresh arrival inside the window replaces it.
  CHECK(dwrap(d, 4, 0, 10, 7).t_a == std::optional<std::uint64_t>(11));
}

TEST_CASE("dwrap with k = 0 is the identity") {
  TableDevice d = one_interrupt();
  CHECK(dwrap(d, 0, 1, 5, std::nullopt) == WrapResult{1, 5, std::nullopt});
  CHECK(dwrap(d, 0, 2, 5, 3) == WrapResult{2, 5, 3});
}

TEST_CASE("reads and writes") {
  TableDevice d = one_interrupt();
  CHECK(device_read(d, 2).w == 0x77);
  CHECK(device_write(d, 0, 0x1234) == 0);
  try {
    device_read(d, 0);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoReadEnabled);
  }
  // Undefined moves go to the sink, which only ticks into itself.
  CHECK(device_write(d, 1, 5) == d.sink());
  CHECK(d.tick(d.sink()) == std::make_pair(Tick::Eps, d.sink()));
}

TEST_CASE("timer reads its step counter") {
  DevicePtr t = make_timer();
  auto w = dwrap(*t, 42, t->init(), 0, std::nullopt);
  CHECK(device_read(*t, w.state).w == 42);
  w = dwrap(*t, 58, w.state, w.t, w.t_a);
  CHECK(device_read(*t, w.state).w == 100);
  CHECK_FALSE(w.t_a);
}

TEST_CASE("schedule arrival times") {
  DevicePtr s = make_schedule({5});
  auto w = dwrap(*s, 10, s->init(), 0, std::nullopt);
  CHECK(w.t_a == std::optional<std::uint64_t>(5));
  auto early = dwrap(*s, 5, s->init(), 0, std::nullopt);
  CHECK_FALSE(early.t_a);
  CHECK(device_read(*make_schedule({}, {{3, 0xAB}}), 3).w == 0xAB);
}

TEST_CASE("rearm raises an interrupt after each write") {
  ScheduleDevice::Params p;
  p.rearm = 4;
  DevicePtr d = make_device(p);
  DevState s = d->write(d->init(), 0);
  auto w = dwrap(*d, 10, s, 100, std::nullopt);
  CHECK(w.t_a == std::optional<std::uint64_t>(104));
  CHECK_FALSE(dwrap(*d, 10, d->init(), 0, std::nullopt).t_a);
}

TEST_CASE("device script") {
  auto p = parse_device_script("kind timer\n# comment\nint_at 12\nint_at 30\nread_response 4 0x1f\nrearm 7\n");
  CHECK(p.timer);
  CHECK(p.int_times == std::set<std::uint64_t>{12, 30});
  CHECK(p.responses.at(4) == 0x1f);
  CHECK(p.rearm == std::optional<std::uint64_t>(7));
  CHECK_THROWS_AS(parse_device_script("int_at x"), Error);
  CHECK_THROWS_AS(parse_device_script("frobnicate 1"), Error);
}

TEST_CASE("strip relabels int? as ε") {
  TableDevice d = one_interrupt();
  TableDevice s = strip_interrupts(d);
  CHECK(s.tick(1) == std::make_pair(Tick::Eps, DevState{2}));
  CHECK(s.at(2) == d.at(2));
  TableDevice plain(1, 0);
  plain.set_tick(0, Tick::Eps, 0);
  CHECK(strip_interrupts(plain) == plain);
  DevicePtr sched = strip_interrupts(make_timer({1, 2, 3}));
  CHECK_FALSE(dwrap(*sched, 10, sched->init(), 0, std::nullopt).t_a);
}

TEST_CASE("limit_interrupts") {
  DevicePtr t = make_timer({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

  SUBCASE("empty prefix strips everything") {
    auto u = limit_interrupts(t, {}, 6);
    CHECK_FALSE(dwrap(*u, 6, u->init(), 0, std::nullopt).t_a);
  }
  SUBCASE("beyond the bound the device is a sink") {
    auto u = limit_interrupts(t, {}, 3);
    // Depth-n nodes exist but have no edges; the next move falls into the sink.
    auto w = dwrap(*u, 3, u->init(), 0, std::nullopt);
    CHECK_FALSE(u->read(w.state));
    CHECK(u->tick(w.state).second == u->sink());
    CHECK(u->write(w.state, 0) == u->sink());
  }
  SUBCASE("interrupts before the prefix completes are kept") {
    std::vector<Action> prefix{{Action::Int}, {Action::Int}};
    auto u = limit_interrupts(t, prefix, 8);
    // Two int? steps on the prefix, then only ε.
    DevState s = u->init();
    int ints = 0;
    for (int i = 0; i < 8; ++i) {
      auto [a, n] = u->tick(s);
      ints += a == Tick::Int;
      s = n;
    }
    CHECK(ints == 2);
    // A read leaves the prefix, so that subtree keeps the original labels.
    DevState off = u->read(u->init())->second;
    CHECK(u->tick(off).first == Tick::Int);
  }
  SUBCASE("node budget") { CHECK_THROWS_AS(limit_interrupts(t, {}, 40, 16), Error); }
}
