#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "encsim/memory.hpp"

using namespace encsim;

TEST_CASE("read_word is little-endian") {
  MemoryImage M;
  M.set_byte(0x0100, 0x34);
  M.set_byte(0x0101, 0x12);
  CHECK(read_word(M, 0x0100) == 0x1234);
  CHECK(read_word(MemoryImage{}, 0x0000) == 0x0000);
}

TEST_CASE("word access at 0xFFFF overflows") {
  MemoryImage M;
  CHECK_THROWS_AS(read_word(M, 0xFFFF), Error);
  try {
    M.write_word(0xFFFF, 1);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AddressOverflow);
  }
  CHECK_NOTHROW(read_word(M, 0xFFFE));
}

TEST_CASE("write_word stores low byte first, unaligned writes overlap") {
  MemoryImage M = write_word(MemoryImage{}, 0x0200, 0xBEEF);
  CHECK(M.byte(0x0200) == 0xEF);
  CHECK(M.byte(0x0201) == 0xBE);
  M = write_word(M, 0x0201, 0x1234);
  CHECK(M.byte(0x0200) == 0xEF);
  CHECK(M.byte(0x0201) == 0x34);
  CHECK(M.byte(0x0202) == 0x12);
}

TEST_CASE("assemble_whole_program") {
  Layout L{0x8000, 0x8100, 0x9000, 0x9100, 0x5000};
  PartialMemory ctx{{0xFFFE, 0x00}, {0xFFFF, 0x04}};
  PartialMemory mod{{0x8000, 0x02}};
  MemoryImage M = assemble_whole_program(ctx, mod, L);
  CHECK(M.read_word(0xFFFE) == 0x0400);
  CHECK(M.byte(0x8000) == 0x02);
  std::size_t nonzero = 0;
  for (std::size_t a = 0; a < MemoryImage::kSize; ++a) nonzero += M.data()[a] != 0;
  CHECK(nonzero == 2);

  SUBCASE("module byte outside the enclave") {
    PartialMemory bad{{0x7FFF, 1}};
    try {
      assemble_whole_program(ctx, bad, L);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::LayoutViolation);
    }
  }
  SUBCASE("overlap") {
    PartialMemory both{{0x8000, 1}};
    try {
      assemble_whole_program(both, mod, L);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::OverlapError);
    }
  }
}

static Errc layout_error(const Layout& L) {
  try {
    validate_layout(L);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::IoError;  // sentinel for "no error"
}

TEST_CASE("validate_layout") {
  CHECK_NOTHROW(validate_layout({0x6000, 0x7000, 0x7000, 0x8000, 0x4000}));
  CHECK(layout_error({0x6000, 0x7000, 0x6800, 0x8000, 0x4000}) == Errc::LayoutViolation);
  CHECK(layout_error({0x6000, 0x7000, 0x7000, 0x8000, 0x6000}) == Errc::LayoutViolation);
  CHECK(layout_error({0x6000, 0x6000, 0x7000, 0x8000, 0x4000}) == Errc::LayoutViolation);
  CHECK(layout_error({0x6001, 0x7000, 0x7000, 0x8000, 0x4000}) == Errc::LayoutViolation);
  CHECK(layout_error({0xF000, 0xFFFF, 0x7000, 0x8000, 0x4000}) == Errc::LayoutViolation);
  // An empty data section is allowed.
  CHECK_NOTHROW(validate_layout({0x6000, 0x7000, 0x7000, 0x7000, 0x4000}));
}

TEST_CASE("layout sidecar roundtrip") {
  Layout L{0x8000, 0x801e, 0x9000, 0x9004, 0x5000};
  CHECK(parse_layout(format_layout(L)) == L);
  CHECK_THROWS_AS(parse_layout("ts=8000 te=9000"), Error);
  CHECK_THROWS_AS(parse_layout("ts=8000 te=9000 ds=1 de=2 isr=3 bogus=4"), Error);
}

TEST_CASE("raw image save and load") {
  MemoryImage M;
  M.write_word(0x1234, 0xCAFE);
  M.write_word(0xFFFE, 0x0400);
  auto path = std::filesystem::temp_directory_path() / "encsim_image_test.bin";
  save_raw_image(M, path.string());
  CHECK(load_raw_image(path.string()) == M);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_raw_image("/nonexistent/encsim.bin"), Error);
}
