#pragma once
#include <map>
#include <string>

#include "encsim/assembler.hpp"
#include "encsim/cpu.hpp"
#include "encsim/equiv.hpp"
#include "encsim/trace.hpp"

namespace testsup {

inline std::string corpus(const std::string& rel) { return std::string(ENCSIM_CORPUS_DIR) + "/" + rel; }

inline encsim::Layout small_layout() { return {0x8000, 0x8100, 0x9000, 0x9100, 0x5000}; }

struct Loaded {
  encsim::AsmResult a;
  encsim::Machine m;
  encsim::Configuration c;
};

inline Loaded load(const std::string& src, encsim::DevicePtr D = encsim::make_timer(),
                   encsim::Policy p = encsim::Policy::SL, const std::map<std::string, encsim::Word>& syms = {}) {
  Loaded l;
  l.a = encsim::assemble(src, syms);
  l.m.L = l.a.layout ? *l.a.layout : small_layout();
  l.m.D = std::move(D);
  l.m.policy = p;
  l.c = encsim::init_config(l.a.ctx, l.a.mod, l.m.L, l.m.D);
  return l;
}

inline Loaded load_file(const std::string& rel, encsim::DevicePtr D, encsim::Policy p,
                        const std::map<std::string, encsim::Word>& syms) {
  return load(encsim::read_text_file(corpus(rel)), std::move(D), p, syms);
}

inline encsim::Module module_file(const std::string& rel, const std::map<std::string, encsim::Word>& syms = {}) {
  return encsim::module_from_asm(rel, encsim::assemble_file(corpus(rel), syms));
}

}  // namespace testsup
