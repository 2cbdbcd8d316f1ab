#include "encsim/device.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace encsim {

std::optional<Word> Device::other_write(DevState s) const {
  auto d = distinguished_writes(s);
  if (d.size() >= 0x10000) return std::nullopt;
  std::sort(d.begin(), d.end());
  Word w = 0;
  for (Word x : d) {
    if (x != w) break;
    ++w;
  }
  return w;
}

WrapResult dwrap(const Device& D, std::uint64_t k, DevState s, std::uint64_t t, std::optional<std::uint64_t> t_a) {
  std::optional<std::uint64_t> first;
  for (std::uint64_t j = 0; j < k; ++j) {
    auto [a, next] = D.tick(s);
    if (a == Tick::Int && !first) first = t + j;
    s = next;
  }
  return {s, t + k, first ? first : t_a};
}

ReadResult device_read(const Device& D, DevState s) {
  auto r = D.read(s);
  if (!r) throw Error(Errc::NoReadEnabled, "no rd edge in device state " + std::to_string(s));
  return {r->first, r->second};
}

DevState device_write(const Device& D, DevState s, Word w) { return D.write(s, w); }

// ---- TableDevice

DevState TableDevice::add_state() {
  states_.emplace_back();
  return states_.size() - 1;
}

void TableDevice::ensure(std::size_t n) {
  if (states_.size() < n) states_.resize(n);
}

void TableDevice::set_tick(DevState s, Tick a, DevState to) {
  ensure(std::max<std::size_t>(s, to) + 1);
  states_[s].tick = a;
  states_[s].tick_to = to;
}

void TableDevice::set_read(DevState s, Word w, DevState to) {
  ensure(std::max<std::size_t>(s, to) + 1);
  states_[s].rd = std::make_pair(w, to);
}

void TableDevice::set_write(DevState s, Word w, DevState to) {
  ensure(std::max<std::size_t>(s, to) + 1);
  states_[s].wr[w] = to;
}

void TableDevice::set_write_other(DevState s, DevState to) {
  ensure(std::max<std::size_t>(s, to) + 1);
  states_[s].wr_other = to;
}

std::pair<Tick, DevState> TableDevice::tick(DevState s) const {
  if (s >= states_.size()) return {Tick::Eps, sink()};
  const State& st = states_[s];
  if (!st.tick_to) return {Tick::Eps, sink()};
  return {st.tick, *st.tick_to};
}

std::optional<std::pair<Word, DevState>> TableDevice::read(DevState s) const {
  if (s >= states_.size()) return std::nullopt;
  return states_[s].rd;
}

DevState TableDevice::write(DevState s, Word w) const {
  if (s >= states_.size()) return sink();
  const State& st = states_[s];
  if (auto it = st.wr.find(w); it != st.wr.end()) return it->second;
  return st.wr_other ? *st.wr_other : sink();
}

std::vector<Word> TableDevice::distinguished_writes(DevState s) const {
  std::vector<Word> out;
  if (s < states_.size())
    for (auto& [w, to] : states_[s].wr) out.push_back(w);
  return out;
}

// ---- ScheduleDevice

namespace {
constexpr std::uint64_t kStepMask = 0xFFFFFFFFu;
constexpr std::uint64_t kNoCountdown = 0;
}  // namespace

std::pair<Tick, DevState> ScheduleDevice::tick(DevState s) const {
  std::uint64_t step = s & kStepMask;
  std::uint64_t cd = s >> 32;  // 0 = idle, otherwise countdown + 1
  bool irq = p_.int_times.count(step) > 0;
  if (cd != kNoCountdown) {
    if (cd == 1) {
      irq = true;
      cd = kNoCountdown;
    } else {
      --cd;
    }
  }
  std::uint64_t next = step == kStepMask ? step : step + 1;
  return {irq ? Tick::Int : Tick::Eps, cd << 32 | next};
}

std::optional<std::pair<Word, DevState>> ScheduleDevice::read(DevState s) const {
  std::uint64_t step = s & kStepMask;
  if (auto it = p_.responses.find(step); it != p_.responses.end()) return std::make_pair(it->second, s);
  if (p_.timer) return std::make_pair(static_cast<Word>(step & 0xFFFF), s);
  return std::make_pair(Word{0}, s);
}

DevState ScheduleDevice::write(DevState s, Word) const {
  if (!p_.rearm) return s;
  return (*p_.rearm + 1) << 32 | (s & kStepMask);
}

DevicePtr make_device(const ScheduleDevice::Params& p) { return std::make_shared<ScheduleDevice>(p); }

DevicePtr make_timer(std::set<std::uint64_t> int_times) {
  ScheduleDevice::Params p;
  p.timer = true;
  p.int_times = std::move(int_times);
  return make_device(p);
}

DevicePtr make_schedule(std::set<std::uint64_t> int_times, std::map<std::uint64_t, Word> responses) {
  ScheduleDevice::Params p;
  p.int_times = std::move(int_times);
  p.responses = std::move(responses);
  return make_device(p);
}

ScheduleDevice::Params parse_device_script(const std::string& text) {
  ScheduleDevice::Params p;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw Error(Errc::ParseError, "device script line " + std::to_string(lineno) + ": " + why);
  };
  auto number = [&](const std::string& s, int base) -> std::uint64_t {
    try {
      std::size_t used = 0;
      auto v = std::stoull(s, &used, base);
      if (used != s.size()) fail("bad number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + s + "'");
    }
    return 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string a, b;
    if (key == "kind") {
      if (!(ls >> a)) fail("kind needs a value");
      if (a == "timer")
        p.timer = true;
      else if (a == "schedule")
        p.timer = false;
      else
        fail("unknown kind '" + a + "'");
    } else if (key == "int_at") {
      if (!(ls >> a)) fail("int_at needs a cycle");
      p.int_times.insert(number(a, 10));
    } else if (key == "read_response") {
      if (!(ls >> a >> b)) fail("read_response needs a cycle and a word");
      auto w = number(b, 16);
      if (w > 0xFFFF) fail("response word out of range");
      p.responses[number(a, 10)] = static_cast<Word>(w);
    } else if (key == "rearm") {
      if (!(ls >> a)) fail("rearm needs a delay");
      p.rearm = number(a, 10);
    } else {
      fail("unknown directive '" + key + "'");
    }
    if (ls >> a) fail("trailing tokens");
  }
  return p;
}

// ---- transforms

namespace {

class StrippedDevice : public Device {
 public:
  explicit StrippedDevice(DevicePtr inner) : inner_(std::move(inner)) {}
  DevState init() const override { return inner_->init(); }
  std::pair<Tick, DevState> tick(DevState s) const override { return {Tick::Eps, inner_->tick(s).second}; }
  std::optional<std::pair<Word, DevState>> read(DevState s) const override { return inner_->read(s); }
  DevState write(DevState s, Word w) const override { return inner_->write(s, w); }
  std::vector<Word> distinguished_writes(DevState s) const override { return inner_->distinguished_writes(s); }

 private:
  DevicePtr inner_;
};

}  // namespace

TableDevice strip_interrupts(const TableDevice& D) {
  TableDevice out = D;
  for (std::size_t s = 0; s < out.size(); ++s) out.at(s).tick = Tick::Eps;
  return out;
}

DevicePtr strip_interrupts(const DevicePtr& D) {
  if (dynamic_cast<const StrippedDevice*>(D.get())) return D;
  if (auto* t = dynamic_cast<const TableDevice*>(D.get())) return std::make_shared<TableDevice>(strip_interrupts(*t));
  if (auto* s = dynamic_cast<const ScheduleDevice*>(D.get())) {
    auto p = s->params();
    p.int_times.clear();
    p.rearm.reset();
    // Keep the re-arm countdown out of the state so the stripped device stays ε-only.
    return make_device(p);
  }
  return std::make_shared<StrippedDevice>(D);
}

std::shared_ptr<const TableDevice> limit_interrupts(const DevicePtr& D, const std::vector<Action>& prefix,
                                                   std::size_t n, std::size_t node_budget) {
  if (n < prefix.size()) throw Error(Errc::UnrollTooLarge, "depth bound shorter than the prefix");
  struct Node {
    DevState u;
    std::size_t depth;
    std::size_t matched;
    bool on_prefix;
  };
  auto out = std::make_shared<TableDevice>();
  std::vector<Node> nodes;
  auto add = [&](const Node& nd) -> DevState {
    if (nodes.size() >= node_budget) throw Error(Errc::UnrollTooLarge, "unrolled tree exceeds node budget");
    nodes.push_back(nd);
    out->ensure(nodes.size());
    return nodes.size() - 1;
  };
  add({D->init(), 0, 0, true});
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    Node nd = nodes[id];
    if (nd.depth == n) continue;  // beyond the bound: sink
    bool extends = nd.on_prefix && nd.matched == prefix.size();
    auto distinguished = D->distinguished_writes(nd.u);
    auto child = [&](const Action& a, DevState u2) -> DevState {
      Node c{u2, nd.depth + 1, nd.matched, nd.on_prefix};
      if (nd.on_prefix && nd.matched < prefix.size()) {
        Action want = prefix[nd.matched];
        if (want.kind == Action::Wr &&
            std::find(distinguished.begin(), distinguished.end(), want.w) == distinguished.end())
          want = {Action::WrOther, 0};
        if (want == a)
          ++c.matched;
        else
          c.on_prefix = false;
      }
      return add(c);
    };
    auto [tk, tnext] = D->tick(nd.u);
    Tick label = extends ? Tick::Eps : tk;
    Action ta{tk == Tick::Int ? Action::Int : Action::Eps, 0};
    DevState tc = child(ta, tnext);
    out->set_tick(id, label, tc);
    if (auto r = D->read(nd.u)) out->set_read(id, r->first, child({Action::Rd, r->first}, r->second));
    for (Word w : distinguished) out->set_write(id, w, child({Action::Wr, w}, D->write(nd.u, w)));
    if (auto ow = D->other_write(nd.u)) out->set_write_other(id, child({Action::WrOther, 0}, D->write(nd.u, *ow)));
  }
  return out;
}

}  // namespace encsim
