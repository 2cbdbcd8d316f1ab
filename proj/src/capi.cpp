#include "encsim/encsim.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "encsim/assembler.hpp"
#include "encsim/equiv.hpp"
#include "encsim/scenario.hpp"
#include "encsim/trace.hpp"

struct encsim_program {
  encsim::AsmResult a;
};

struct encsim_device {
  encsim::DevicePtr D;
};

struct encsim_machine {
  encsim::Machine m;
  encsim::Configuration c;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <class F>
int guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const encsim::Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ENCSIM_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ENCSIM_E_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::map<std::string, encsim::Word> symbols(const char* const* names, const uint16_t* values, size_t n) {
  std::map<std::string, encsim::Word> out;
  for (size_t i = 0; i < n; ++i) out[names[i]] = values[i];
  return out;
}

std::optional<encsim::Policy> policy_of(int p) {
  switch (p) {
    case ENCSIM_POLICY_SH: return encsim::Policy::SH;
    case ENCSIM_POLICY_SL: return encsim::Policy::SL;
    case ENCSIM_POLICY_NAIVE: return encsim::Policy::Naive;
    case ENCSIM_POLICY_CONSTLAT: return encsim::Policy::ConstLatency;
    default: return std::nullopt;
  }
}

#define REQUIRE(cond) \
  if (!(cond)) return fail(ENCSIM_E_INVALID_ARGUMENT, "invalid argument: " #cond)

}  // namespace

extern "C" {

const char* encsim_last_error(void) { return g_last_error.c_str(); }

const char* encsim_status_name(int status) {
  if (status == ENCSIM_OK) return "Ok";
  if (status == ENCSIM_E_INVALID_ARGUMENT) return "InvalidArgument";
  if (status == ENCSIM_E_INTERNAL) return "Internal";
  if (status >= ENCSIM_E_ADDRESS_OVERFLOW && status <= ENCSIM_E_IO) return encsim::errc_name(static_cast<encsim::Errc>(status));
  return "Unknown";
}

int encsim_policy_from_name(const char* name, int* policy) {
  REQUIRE(name && policy);
  auto p = encsim::policy_from_name(name);
  if (!p) return fail(ENCSIM_E_INVALID_ARGUMENT, std::string("unknown policy '") + name + "'");
  *policy = static_cast<int>(*p);  // enum order matches the ENCSIM_POLICY_* values
  return ENCSIM_OK;
}

void encsim_string_free(char* s) { std::free(s); }
void encsim_buffer_free(uint8_t* b) { std::free(b); }

int encsim_program_assemble(const char* text, const char* const* names, const uint16_t* values, size_t n,
                            encsim_program** out) {
  REQUIRE(text && out && (n == 0 || (names && values)));
  return guarded([&]() -> int {
    *out = new encsim_program{encsim::assemble(text, symbols(names, values, n))};
    return ENCSIM_OK;
  });
}

int encsim_program_assemble_file(const char* path, const char* const* names, const uint16_t* values, size_t n,
                                 encsim_program** out) {
  REQUIRE(path && out && (n == 0 || (names && values)));
  return guarded([&]() -> int {
    *out = new encsim_program{encsim::assemble_file(path, symbols(names, values, n))};
    return ENCSIM_OK;
  });
}

void encsim_program_free(encsim_program* p) { delete p; }

int encsim_program_layout(const encsim_program* p, uint16_t out[5]) {
  REQUIRE(p && out);
  if (!p->a.layout) return fail(ENCSIM_E_LAYOUT, "program has no .layout");
  const auto& L = *p->a.layout;
  out[0] = L.ts;
  out[1] = L.te;
  out[2] = L.ds;
  out[3] = L.de;
  out[4] = L.isr;
  return ENCSIM_OK;
}

int encsim_program_label(const encsim_program* p, const char* name, uint16_t* addr) {
  REQUIRE(p && name && addr);
  auto it = p->a.labels.find(name);
  if (it == p->a.labels.end()) return fail(ENCSIM_E_LABEL, std::string("no label '") + name + "'");
  *addr = it->second;
  return ENCSIM_OK;
}

int encsim_program_image(const encsim_program* p, uint8_t out[65536]) {
  REQUIRE(p && out);
  return guarded([&]() -> int {
    if (!p->a.layout) return fail(ENCSIM_E_LAYOUT, "program has no .layout");
    auto M = encsim::assemble_whole_program(p->a.ctx, p->a.mod, *p->a.layout);
    std::memcpy(out, M.data(), encsim::MemoryImage::kSize);
    return ENCSIM_OK;
  });
}

int encsim_program_disassemble(const encsim_program* p, uint16_t from, uint32_t to, char** text) {
  REQUIRE(p && text && to <= 0x10000 && from <= to);
  return guarded([&]() -> int {
    encsim::MemoryImage M;
    for (const auto* part : {&p->a.ctx, &p->a.mod})
      for (auto [a, b] : *part) M.set_byte(a, b);
    *text = dup(encsim::disassemble(M, from, to));
    return ENCSIM_OK;
  });
}

int encsim_device_parse(const char* script, encsim_device** out) {
  REQUIRE(script && out);
  return guarded([&]() -> int {
    *out = new encsim_device{encsim::make_device(encsim::parse_device_script(script))};
    return ENCSIM_OK;
  });
}

int encsim_device_timer(const uint64_t* int_times, size_t n, encsim_device** out) {
  REQUIRE(out && (n == 0 || int_times));
  return guarded([&]() -> int {
    *out = new encsim_device{encsim::make_timer(std::set<std::uint64_t>(int_times, int_times + n))};
    return ENCSIM_OK;
  });
}

void encsim_device_free(encsim_device* d) { delete d; }

int encsim_machine_new(const encsim_program* p, const encsim_device* d, int policy, encsim_machine** out) {
  REQUIRE(p && d && out);
  auto pol = policy_of(policy);
  REQUIRE(pol.has_value());
  return guarded([&]() -> int {
    if (!p->a.layout) return fail(ENCSIM_E_LAYOUT, "program has no .layout");
    encsim::Machine m{*p->a.layout, d->D, *pol};
    *out = new encsim_machine{m, encsim::init_config(p->a.ctx, p->a.mod, m.L, d->D)};
    return ENCSIM_OK;
  });
}

void encsim_machine_free(encsim_machine* m) { delete m; }

int encsim_machine_step(encsim_machine* m) {
  REQUIRE(m);
  if (m->c.halted) return ENCSIM_OK;
  return guarded([&]() -> int {
    if (encsim::step_inplace(m->m, m->c) == encsim::Rule::Stuck) return fail(ENCSIM_E_STUCK, "no read enabled for IN");
    return ENCSIM_OK;
  });
}

int encsim_machine_run(encsim_machine* m, uint64_t fuel, int* outcome, uint64_t* steps) {
  REQUIRE(m);
  return guarded([&]() -> int {
    auto r = encsim::run(m->m, m->c, fuel);
    m->c = std::move(r.last);
    if (outcome)
      *outcome = r.kind == encsim::RunOutcome::Terminated ? ENCSIM_RUN_TERMINATED
               : r.kind == encsim::RunOutcome::Stuck      ? ENCSIM_RUN_STUCK
                                                          : ENCSIM_RUN_OUT_OF_FUEL;
    if (steps) *steps = r.steps;
    return ENCSIM_OK;
  });
}

int encsim_machine_registers(const encsim_machine* m, uint16_t out[16]) {
  REQUIRE(m && out);
  for (int i = 0; i < 16; ++i) out[i] = m->c.R[i];
  return ENCSIM_OK;
}

int encsim_machine_time(const encsim_machine* m, uint64_t* t) {
  REQUIRE(m && t);
  *t = m->c.t;
  return ENCSIM_OK;
}

int encsim_machine_halted(const encsim_machine* m, int* halted) {
  REQUIRE(m && halted);
  *halted = m->c.halted ? 1 : 0;
  return ENCSIM_OK;
}

int encsim_machine_read_word(const encsim_machine* m, uint16_t addr, uint16_t* w) {
  REQUIRE(m && w);
  return guarded([&]() -> int {
    *w = m->c.M.read_word(addr);
    return ENCSIM_OK;
  });
}

int encsim_machine_checkpoint(const encsim_machine* m, uint8_t** buf, size_t* len) {
  REQUIRE(m && buf && len);
  return guarded([&]() -> int {
    auto bytes = encsim::serialize(m->c);
    auto* p = static_cast<uint8_t*>(std::malloc(bytes.size()));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, bytes.data(), bytes.size());
    *buf = p;
    *len = bytes.size();
    return ENCSIM_OK;
  });
}

int encsim_machine_restore(encsim_machine* m, const uint8_t* buf, size_t len) {
  REQUIRE(m && buf);
  return guarded([&]() -> int {
    m->c = encsim::deserialize(std::vector<uint8_t>(buf, buf + len));
    return ENCSIM_OK;
  });
}

int encsim_machine_trace(encsim_machine* m, uint64_t fuel, char** text) {
  REQUIRE(m && text);
  return guarded([&]() -> int {
    auto r = encsim::run_traced(m->m, m->c, fuel);
    m->c = r.last;
    std::ostringstream o;
    for (const auto& s : r.steps) o << encsim::format_fine(s.obs) << '\n';
    *text = dup(o.str());
    return ENCSIM_OK;
  });
}

int encsim_scenarios_run(const char* const* paths, size_t n, int csv, char** report, int* all_ok) {
  REQUIRE(paths && report && all_ok);
  return guarded([&]() -> int {
    std::vector<encsim::Scenario> ss;
    for (size_t i = 0; i < n; ++i) ss.push_back(encsim::load_scenario(paths[i]));
    auto rs = encsim::run_scenarios(ss);
    bool ok = true;
    for (const auto& r : rs) ok = ok && r.ok();
    *report = dup(csv ? encsim::report_csv(rs) : encsim::report_text(rs));
    *all_ok = ok ? 1 : 0;
    return ENCSIM_OK;
  });
}

int encsim_scenario_trace_csv(const char* path, char** csv) {
  REQUIRE(path && csv);
  return guarded([&]() -> int {
    *csv = dup(encsim::trace_csv(encsim::load_scenario(path)));
    return ENCSIM_OK;
  });
}

int encsim_fa_check(const encsim_program* a, const encsim_program* b, int low_policy, size_t budget, uint64_t fuel,
                    int csv, char** report, int* outcome) {
  REQUIRE(a && b && report && outcome);
  auto pol = policy_of(low_policy);
  REQUIRE(pol.has_value() && *pol != encsim::Policy::SH);
  return guarded([&]() -> int {
    encsim::FaOptions o;
    o.budget = budget;
    o.fuel = fuel;
    o.low = *pol;
    auto v = encsim::check_fa_instance(encsim::module_from_asm("a", a->a), encsim::module_from_asm("b", b->a), o);
    switch (v.outcome) {
      case encsim::FaVerdict::EquivalentWithinBudget: *outcome = ENCSIM_FA_EQUIVALENT; break;
      case encsim::FaVerdict::Confirmed: *outcome = ENCSIM_FA_CONFIRMED; break;
      case encsim::FaVerdict::Counterexample: *outcome = ENCSIM_FA_COUNTEREXAMPLE; break;
      case encsim::FaVerdict::LowOnly: *outcome = ENCSIM_FA_LOW_ONLY; break;
    }
    *report = dup(csv ? encsim::format_verdict_csv(v) : encsim::format_verdict_text(v));
    return ENCSIM_OK;
  });
}

}  // extern "C"
