#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "encsim/memory.hpp"

namespace encsim {

using DevState = std::uint64_t;

enum class Tick : std::uint8_t { Eps, Int };

// Deterministic I/O automaton. Every state enables exactly one of ε / int?, at most
// one rd(w), and any wr(w); undefined moves go to a sink owned by the device.
class Device {
 public:
  virtual ~Device() = default;

  virtual DevState init() const = 0;
  virtual std::pair<Tick, DevState> tick(DevState s) const = 0;
  virtual std::optional<std::pair<Word, DevState>> read(DevState s) const = 0;
  virtual DevState write(DevState s, Word w) const = 0;

  // Words whose wr edge may differ from the one shared by all other words.
  virtual std::vector<Word> distinguished_writes(DevState) const { return {}; }
  // Representative of "all other words" for enumeration; nullopt when every word is distinguished.
  virtual std::optional<Word> other_write(DevState s) const;
};

using DevicePtr = std::shared_ptr<const Device>;

struct WrapResult {
  DevState state;
  std::uint64_t t;
  std::optional<std::uint64_t> t_a;

  bool operator==(const WrapResult&) const = default;
};

WrapResult dwrap(const Device& D, std::uint64_t k, DevState s, std::uint64_t t, std::optional<std::uint64_t> t_a);

struct ReadResult {
  Word w;
  DevState next;
};

// Throws NoReadEnabled when no rd edge leaves s.
ReadResult device_read(const Device& D, DevState s);
DevState device_write(const Device& D, DevState s, Word w);

// Explicit state table; state ids are 0..size()-1 and sink() == size().
class TableDevice : public Device {
 public:
  struct State {
    Tick tick = Tick::Eps;
    std::optional<DevState> tick_to;  // nullopt routes to the sink
    std::optional<std::pair<Word, DevState>> rd;
    std::map<Word, DevState> wr;
    std::optional<DevState> wr_other;
    bool operator==(const State&) const = default;
  };

  explicit TableDevice(std::size_t n = 0, DevState init = 0) : states_(n), init_(init) {}

  std::size_t size() const { return states_.size(); }
  DevState sink() const { return states_.size(); }
  DevState add_state();
  void ensure(std::size_t n);

  State& at(DevState s) { return states_.at(s); }
  const State& at(DevState s) const { return states_.at(s); }

  void set_tick(DevState s, Tick a, DevState to);
  void set_read(DevState s, Word w, DevState to);
  void set_write(DevState s, Word w, DevState to);
  void set_write_other(DevState s, DevState to);

  DevState init() const override { return init_; }
  std::pair<Tick, DevState> tick(DevState s) const override;
  std::optional<std::pair<Word, DevState>> read(DevState s) const override;
  DevState write(DevState s, Word w) const override;
  std::vector<Word> distinguished_writes(DevState s) const override;

  bool operator==(const TableDevice& o) const { return states_ == o.states_ && init_ == o.init_; }

 private:
  std::vector<State> states_;
  DevState init_;
};

// Builtin timer / interrupt schedule. The state is the elapsed step count (saturating
// at 2^32-1) plus an optional re-arm countdown.
class ScheduleDevice : public Device {
 public:
  struct Params {
    bool timer = false;  // rd answers the step counter mod 2^16 when no response is scripted
    std::set<std::uint64_t> int_times;
    std::map<std::uint64_t, Word> responses;
    std::optional<std::uint64_t> rearm;  // raise int? this many steps after each wr
  };

  explicit ScheduleDevice(Params p) : p_(std::move(p)) {}
  const Params& params() const { return p_; }

  DevState init() const override { return 0; }
  std::pair<Tick, DevState> tick(DevState s) const override;
  std::optional<std::pair<Word, DevState>> read(DevState s) const override;
  DevState write(DevState s, Word w) const override;

  static std::uint64_t step_of(DevState s) { return s & 0xFFFFFFFFu; }

 private:
  Params p_;
};

DevicePtr make_timer(std::set<std::uint64_t> int_times = {});
DevicePtr make_schedule(std::set<std::uint64_t> int_times, std::map<std::uint64_t, Word> responses = {});

// Script lines: `kind timer|schedule`, `int_at <cycle>`, `read_response <cycle> <hex>`,
// `rearm <steps>`; `#` starts a comment.
ScheduleDevice::Params parse_device_script(const std::string& text);
DevicePtr make_device(const ScheduleDevice::Params& p);

DevicePtr strip_interrupts(const DevicePtr& D);
TableDevice strip_interrupts(const TableDevice& D);

struct Action {
  enum Kind : std::uint8_t { Eps, Int, Rd, Wr, WrOther } kind = Eps;
  Word w = 0;
  bool operator==(const Action&) const = default;
};

// Tree unrolling to depth n; node ids are insertion indices. int? leaving any node whose
// action string extends `prefix` becomes ε.
std::shared_ptr<const TableDevice> limit_interrupts(const DevicePtr& D, const std::vector<Action>& prefix,
                                                   std::size_t n, std::size_t node_budget = 1u << 20);

}  // namespace encsim
