#include "encsim/memory.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace encsim {

const char* errc_name(Errc e) {
  switch (e) {
    case Errc::AddressOverflow: return "AddressOverflow";
    case Errc::OverlapError: return "OverlapError";
    case Errc::LayoutViolation: return "LayoutViolation";
    case Errc::NoReadEnabled: return "NoReadEnabled";
    case Errc::StuckConfiguration: return "StuckConfiguration";
    case Errc::UnclassifiableStep: return "UnclassifiableStep";
    case Errc::MalformedFineTrace: return "MalformedFineTrace";
    case Errc::UnrollTooLarge: return "UnrollTooLarge";
    case Errc::AnchorCollision: return "AnchorCollision";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::UnknownMnemonic: return "UnknownMnemonic";
    case Errc::OddAddress: return "OddAddress";
    case Errc::LabelUndefined: return "LabelUndefined";
    case Errc::SectionOverflow: return "SectionOverflow";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

Word MemoryImage::read_word(std::uint32_t l) const {
  if (l >= 0xFFFF) throw Error(Errc::AddressOverflow, "word access at 0xFFFF");
  return static_cast<Word>(cells_[l + 1] << 8 | cells_[l]);
}

void MemoryImage::write_word(std::uint32_t l, Word w) {
  if (l >= 0xFFFF) throw Error(Errc::AddressOverflow, "word access at 0xFFFF");
  cells_[l] = static_cast<std::uint8_t>(w & 0xFF);
  cells_[l + 1] = static_cast<std::uint8_t>(w >> 8);
}

Word read_word(const MemoryImage& M, std::uint32_t l) { return M.read_word(l); }

MemoryImage write_word(MemoryImage M, std::uint32_t l, Word w) {
  M.write_word(l, w);
  return M;
}

void validate_layout(const Layout& L) {
  if (L.ts >= L.te) throw Error(Errc::LayoutViolation, "empty code section");
  if (L.ds > L.de) throw Error(Errc::LayoutViolation, "inverted data section");
  if (L.ts & 1) throw Error(Errc::LayoutViolation, "odd entry point");
  if (L.isr & 1) throw Error(Errc::LayoutViolation, "odd isr");
  if (L.ds < L.de && L.ts < L.de && L.ds < L.te) throw Error(Errc::LayoutViolation, "overlap");
  if (L.is_protected(0xFFFE) || L.is_protected(0xFFFF))
    throw Error(Errc::LayoutViolation, "reset-vector-in-protected");
  if (L.is_protected(L.isr)) throw Error(Errc::LayoutViolation, "isr-in-protected");
}

Layout parse_layout(const std::string& text) {
  Layout L;
  bool seen[5] = {};
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(Errc::ParseError, "layout token '" + tok + "'");
    std::string key = tok.substr(0, eq);
    unsigned long v = 0;
    try {
      v = std::stoul(tok.substr(eq + 1), nullptr, 16);
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "layout value '" + tok + "'");
    }
    if (v > 0xFFFF) throw Error(Errc::ParseError, "layout value out of range '" + tok + "'");
    static const char* names[] = {"ts", "te", "ds", "de", "isr"};
    Addr* slots[] = {&L.ts, &L.te, &L.ds, &L.de, &L.isr};
    bool known = false;
    for (int i = 0; i < 5; ++i) {
      if (key == names[i]) {
        *slots[i] = static_cast<Addr>(v);
        seen[i] = known = true;
      }
    }
    if (!known) throw Error(Errc::ParseError, "unknown layout key '" + key + "'");
  }
  for (bool s : seen)
    if (!s) throw Error(Errc::ParseError, "layout sidecar is missing a field");
  return L;
}

std::string format_layout(const Layout& L) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "ts=%04x te=%04x ds=%04x de=%04x isr=%04x", L.ts, L.te, L.ds, L.de, L.isr);
  return buf;
}

MemoryImage assemble_whole_program(const PartialMemory& ctx, const PartialMemory& mod, const Layout& L) {
  MemoryImage M;
  for (auto [a, b] : mod) {
    if (!L.is_protected(a)) throw Error(Errc::LayoutViolation, "module byte outside the enclave");
    M.set_byte(a, b);
  }
  for (auto [a, b] : ctx) {
    if (mod.count(a)) throw Error(Errc::OverlapError, "address defined by context and module");
    if (L.is_protected(a)) throw Error(Errc::LayoutViolation, "context byte inside the enclave");
    M.set_byte(a, b);
  }
  return M;
}

MemoryImage load_raw_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != MemoryImage::kSize) throw Error(Errc::IoError, path + ": image must be 65536 bytes");
  MemoryImage M;
  for (std::size_t i = 0; i < bytes.size(); ++i) M.set_byte(static_cast<Addr>(i), static_cast<std::uint8_t>(bytes[i]));
  return M;
}

void save_raw_image(const MemoryImage& M, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(M.data()), MemoryImage::kSize);
}

}  // namespace encsim
