#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace encsim {

using Word = std::uint16_t;
using Addr = std::uint16_t;

enum class Errc {
  AddressOverflow = 1,
  OverlapError,
  LayoutViolation,
  NoReadEnabled,
  StuckConfiguration,
  UnclassifiableStep,
  MalformedFineTrace,
  UnrollTooLarge,
  AnchorCollision,
  BudgetExhausted,
  UnknownMnemonic,
  OddAddress,
  LabelUndefined,
  SectionOverflow,
  ParseError,
  IoError,
};

const char* errc_name(Errc e);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const { return code_; }

 private:
  Errc code_;
};

class MemoryImage {
 public:
  static constexpr std::size_t kSize = 0x10000;

  MemoryImage() : cells_(kSize, 0) {}

  std::uint8_t byte(Addr l) const { return cells_[l]; }
  void set_byte(Addr l, std::uint8_t b) { cells_[l] = b; }

  // Both throw AddressOverflow for l = 0xFFFF.
  Word read_word(std::uint32_t l) const;
  void write_word(std::uint32_t l, Word w);

  const std::uint8_t* data() const { return cells_.data(); }
  std::uint8_t* data() { return cells_.data(); }

  bool operator==(const MemoryImage& o) const { return cells_ == o.cells_; }

 private:
  std::vector<std::uint8_t> cells_;
};

Word read_word(const MemoryImage& M, std::uint32_t l);
MemoryImage write_word(MemoryImage M, std::uint32_t l, Word w);

struct Layout {
  Addr ts = 0, te = 0, ds = 0, de = 0, isr = 0;

  bool in_code(Addr a) const { return a >= ts && a < te; }
  bool in_data(Addr a) const { return a >= ds && a < de; }
  bool is_protected(Addr a) const { return in_code(a) || in_data(a); }
  bool operator==(const Layout&) const = default;
};

void validate_layout(const Layout& L);

// Sidecar format: `ts=<hex> te=<hex> ds=<hex> de=<hex> isr=<hex>`.
Layout parse_layout(const std::string& text);
std::string format_layout(const Layout& L);

using PartialMemory = std::map<Addr, std::uint8_t>;

MemoryImage assemble_whole_program(const PartialMemory& ctx, const PartialMemory& mod, const Layout& L);

MemoryImage load_raw_image(const std::string& path);
void save_raw_image(const MemoryImage& M, const std::string& path);

}  // namespace encsim
