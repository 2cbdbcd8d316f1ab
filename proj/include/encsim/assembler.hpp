#pragma once

#include <map>
#include <optional>
#include <string>

#include "encsim/isa.hpp"
#include "encsim/memory.hpp"

namespace encsim {

struct AsmResult {
  PartialMemory mod;  // bytes inside [ts,te) and [ds,de)
  PartialMemory ctx;  // everything else
  std::optional<Layout> layout;
  std::map<std::string, Addr> labels;
};

// Directives: .org, .word, .equ, .section code|data|unprot, .layout ts te ds de isr,
// .resetvec <label>. `symbols` predefines names usable in any expression.
AsmResult assemble(const std::string& text, const std::map<std::string, Word>& symbols = {});
AsmResult assemble_file(const std::string& path, const std::map<std::string, Word>& symbols = {});

// [from, to) as reassemblable text; words that do not re-encode identically print as .word.
std::string disassemble(const MemoryImage& M, Addr from, std::uint32_t to);

std::string read_text_file(const std::string& path);

}  // namespace encsim
