#include "encsim/assembler.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace encsim {

namespace {

enum class Section { Code, Data, Unprot };

struct Line {
  int no;
  std::vector<std::string> labels;
  std::string head;  // mnemonic or directive, upper/lower as written
  std::vector<std::string> args;
};

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    for (const char* c : {";", "//"})
      if (auto p = raw.find(c); p != std::string::npos) raw.erase(p);
    std::string s = trim(raw);
    Line ln{no, {}, {}, {}};
    for (;;) {
      auto colon = s.find(':');
      if (colon == std::string::npos) break;
      std::string lab = trim(s.substr(0, colon));
      bool ident = !lab.empty();
      for (char ch : lab) ident = ident && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.');
      if (!ident) break;
      ln.labels.push_back(lab);
      s = trim(s.substr(colon + 1));
    }
    for (auto& ch : s)
      if (ch == ',') ch = ' ';
    std::istringstream ls(s);
    std::string tok;
    if (ls >> tok) ln.head = tok;
    while (ls >> tok) ln.args.push_back(tok);
    if (!ln.labels.empty() || !ln.head.empty()) out.push_back(std::move(ln));
  }
  return out;
}

[[noreturn]] void fail(Errc e, int line, const std::string& why) {
  throw Error(e, "line " + std::to_string(line) + ": " + why);
}

std::optional<long> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::string t = s;
  bool neg = false;
  if (t[0] == '-') {
    neg = true;
    t = t.substr(1);
  }
  if (t.empty() || !std::isdigit(static_cast<unsigned char>(t[0]))) return std::nullopt;
  try {
    std::size_t used = 0;
    long v = std::stol(t, &used, 0);
    if (used != t.size()) return std::nullopt;
    return neg ? -v : v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int parse_reg(const std::string& s, int line) {
  std::string u = upper(s);
  if (u == "PC") return 0;
  if (u == "SP") return 1;
  if (u == "SR") return 2;
  if (u.size() >= 2 && u[0] == 'R') {
    auto n = parse_number(u.substr(1));
    if (n && *n >= 0 && *n <= 15 && u.substr(1).find_first_not_of("0123456789") == std::string::npos)
      return static_cast<int>(*n);
  }
  fail(Errc::ParseError, line, "expected a register, got '" + s + "'");
}

struct Assembler {
  const std::map<std::string, Word>& symbols;
  std::map<std::string, Addr> labels;
  std::map<std::string, Word> equs;
  std::optional<Layout> layout;

  long eval(const std::string& expr, int line, bool allow_labels) const {
    std::string e = expr;
    if (!e.empty() && e[0] == '#') e = e.substr(1);
    long total = 0;
    std::size_t i = 0;
    int sign = 1;
    bool any = false;
    while (i <= e.size()) {
      std::size_t j = i;
      while (j < e.size() && e[j] != '+' && !(e[j] == '-' && j > i)) ++j;
      std::string term = e.substr(i, j - i);
      if (term.empty()) fail(Errc::ParseError, line, "bad expression '" + expr + "'");
      long v;
      if (auto n = parse_number(term)) {
        v = *n;
      } else if (auto it = equs.find(term); it != equs.end()) {
        v = it->second;
      } else if (auto it2 = symbols.find(term); it2 != symbols.end()) {
        v = it2->second;
      } else if (auto it3 = labels.find(term); allow_labels && it3 != labels.end()) {
        v = it3->second;
      } else {
        fail(Errc::LabelUndefined, line, "undefined symbol '" + term + "'");
      }
      total += sign * v;
      any = true;
      if (j >= e.size()) break;
      sign = e[j] == '+' ? 1 : -1;
      i = j + 1;
    }
    if (!any) fail(Errc::ParseError, line, "empty expression");
    return total;
  }

  Word word_of(const std::string& expr, int line, bool allow_labels) const {
    long v = eval(expr, line, allow_labels);
    if (v < -0x8000 || v > 0xFFFF) fail(Errc::ParseError, line, "value out of range '" + expr + "'");
    return static_cast<Word>(v & 0xFFFF);
  }

  void check_section(Section s, std::uint32_t addr, std::uint32_t len, int line) const {
    if (addr + len > 0x10000) fail(Errc::SectionOverflow, line, "past the end of memory");
    if (!layout) {
      if (s != Section::Unprot) fail(Errc::SectionOverflow, line, "protected section used without .layout");
      return;
    }
    for (std::uint32_t a = addr; a < addr + len; ++a) {
      Addr x = static_cast<Addr>(a);
      bool ok = s == Section::Code ? layout->in_code(x) : s == Section::Data ? layout->in_data(x) : !layout->is_protected(x);
      if (!ok) fail(Errc::SectionOverflow, line, "byte outside its section");
    }
  }

  Instruction parse_insn(const Line& ln, Op op, bool final) const {
    Instruction i;
    i.op = op;
    auto need = [&](std::size_t n) {
      if (ln.args.size() != n)
        fail(Errc::ParseError, ln.no, std::string(mnemonic(op)) + " takes " + std::to_string(n) + " operand(s)");
    };
    switch (operand_shape(op)) {
      case Operands::None: need(0); break;
      case Operands::One:
        need(1);
        i.r2 = static_cast<std::uint8_t>(parse_reg(ln.args[0], ln.no));
        break;
      case Operands::Two:
        need(2);
        i.r1 = static_cast<std::uint8_t>(parse_reg(ln.args[0], ln.no));
        i.r2 = static_cast<std::uint8_t>(parse_reg(ln.args[1], ln.no));
        break;
      case Operands::ImmReg:
        need(2);
        i.imm = final ? word_of(ln.args[0], ln.no, true) : 0;
        i.r2 = static_cast<std::uint8_t>(parse_reg(ln.args[1], ln.no));
        break;
    }
    return i;
  }

  // Two passes over the same walk; the first only records label addresses.
  AsmResult walk(const std::vector<Line>& lines, bool final) {
    AsmResult res;
    Section sec = Section::Unprot;
    std::uint32_t loc[3] = {0, 0, 0};
    bool placed[3] = {false, false, false};
    std::map<std::string, int> seen;
    auto cur = [&]() -> std::uint32_t& { return loc[static_cast<int>(sec)]; };
    auto emit = [&](std::uint32_t addr, std::uint8_t b) {
      Addr a = static_cast<Addr>(addr);
      bool prot = layout && layout->is_protected(a);
      auto& dst = prot ? res.mod : res.ctx;
      if (res.mod.count(a) || res.ctx.count(a)) throw Error(Errc::OverlapError, "byte " + std::to_string(a) + " emitted twice");
      dst[a] = b;
    };
    auto emit_word = [&](std::uint32_t addr, Word w) {
      emit(addr, static_cast<std::uint8_t>(w & 0xFF));
      emit(addr + 1, static_cast<std::uint8_t>(w >> 8));
    };
    for (const Line& ln : lines) {
      for (auto& lab : ln.labels) {
        if (!final) {
          if (seen.count(lab) || symbols.count(lab) || equs.count(lab))
            fail(Errc::LabelUndefined, ln.no, "duplicate label '" + lab + "'");
          seen[lab] = ln.no;
          labels[lab] = static_cast<Addr>(cur());
        }
      }
      if (ln.head.empty()) continue;
      std::string h = upper(ln.head);
      if (h == ".LAYOUT") {
        if (ln.args.size() != 5) fail(Errc::ParseError, ln.no, ".layout needs ts te ds de isr");
        Layout L;
        L.ts = word_of(ln.args[0], ln.no, false);
        L.te = word_of(ln.args[1], ln.no, false);
        L.ds = word_of(ln.args[2], ln.no, false);
        L.de = word_of(ln.args[3], ln.no, false);
        L.isr = word_of(ln.args[4], ln.no, false);
        validate_layout(L);
        if (layout && !(*layout == L)) fail(Errc::ParseError, ln.no, "conflicting .layout");
        layout = L;
        if (!placed[0]) loc[0] = L.ts;
        if (!placed[1]) loc[1] = L.ds;
      } else if (h == ".SECTION") {
        if (ln.args.size() != 1) fail(Errc::ParseError, ln.no, ".section needs a name");
        std::string s = upper(ln.args[0]);
        if (s == "CODE")
          sec = Section::Code;
        else if (s == "DATA")
          sec = Section::Data;
        else if (s == "UNPROT")
          sec = Section::Unprot;
        else
          fail(Errc::ParseError, ln.no, "unknown section '" + ln.args[0] + "'");
      } else if (h == ".ORG") {
        if (ln.args.size() != 1) fail(Errc::ParseError, ln.no, ".org needs an address");
        cur() = word_of(ln.args[0], ln.no, false);
        placed[static_cast<int>(sec)] = true;
      } else if (h == ".EQU") {
        if (ln.args.size() != 2) fail(Errc::ParseError, ln.no, ".equ needs a name and a value");
        if (!final) {
          if (equs.count(ln.args[0]) || labels.count(ln.args[0]))
            fail(Errc::LabelUndefined, ln.no, "duplicate symbol '" + ln.args[0] + "'");
          equs[ln.args[0]] = word_of(ln.args[1], ln.no, false);
        }
      } else if (h == ".WORD") {
        if (ln.args.empty()) fail(Errc::ParseError, ln.no, ".word needs a value");
        for (auto& a : ln.args) {
          check_section(sec, cur(), 2, ln.no);
          if (final) emit_word(cur(), word_of(a, ln.no, true));
          cur() += 2;
        }
      } else if (h == ".RESETVEC") {
        if (ln.args.size() != 1) fail(Errc::ParseError, ln.no, ".resetvec needs a label");
        if (final) emit_word(0xFFFE, word_of(ln.args[0], ln.no, true));
      } else if (h[0] == '.') {
        fail(Errc::ParseError, ln.no, "unknown directive '" + ln.head + "'");
      } else {
        auto op = op_from_mnemonic(h);
        if (!op) fail(Errc::UnknownMnemonic, ln.no, "'" + ln.head + "'");
        if (cur() & 1) fail(Errc::OddAddress, ln.no, "instruction at odd address");
        Instruction i = parse_insn(ln, *op, final);
        auto words = encode(i);
        if (static_cast<int>(words.size()) != size_words(i)) fail(Errc::ParseError, ln.no, "size mismatch");
        check_section(sec, cur(), static_cast<std::uint32_t>(2 * words.size()), ln.no);
        if (final)
          for (std::size_t k = 0; k < words.size(); ++k) emit_word(cur() + 2 * static_cast<std::uint32_t>(k), words[k]);
        cur() += static_cast<std::uint32_t>(2 * words.size());
      }
    }
    res.layout = layout;
    res.labels = labels;
    return res;
  }
};

}  // namespace

AsmResult assemble(const std::string& text, const std::map<std::string, Word>& symbols) {
  auto lines = split_lines(text);
  Assembler a{symbols, {}, {}, {}};
  a.walk(lines, false);
  a.layout.reset();
  return a.walk(lines, true);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AsmResult assemble_file(const std::string& path, const std::map<std::string, Word>& symbols) {
  return assemble(read_text_file(path), symbols);
}

std::string disassemble(const MemoryImage& M, Addr from, std::uint32_t to) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, ".org 0x%04x\n", from);
  out << buf;
  std::uint32_t a = from;
  auto raw = [&](std::uint32_t at) {
    if (at + 1 < 0x10000) {
      std::snprintf(buf, sizeof buf, "    .word 0x%04x\n", M.read_word(at));
      out << buf;
      return 2u;
    }
    std::snprintf(buf, sizeof buf, "    ; trailing byte 0x%02x\n", M.byte(static_cast<Addr>(at)));
    out << buf;
    return 1u;
  };
  while (a < to) {
    if (a + 1 >= to || (a & 1)) {
      a += raw(a);
      continue;
    }
    auto i = decode(M, static_cast<Addr>(a));
    bool canonical = false;
    std::vector<Word> words;
    if (i) {
      words = encode(*i);
      canonical = a + 2 * words.size() <= to;
      for (std::size_t k = 0; canonical && k < words.size(); ++k)
        canonical = M.read_word(a + 2 * static_cast<std::uint32_t>(k)) == words[k];
    }
    if (!canonical) {
      a += raw(a);
      continue;
    }
    out << "    " << to_string(*i) << "\n";
    a += static_cast<std::uint32_t>(2 * words.size());
  }
  return out.str();
}

}  // namespace encsim
