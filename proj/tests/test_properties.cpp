#include "doctest.h"
#include "properties.hpp"

namespace {

constexpr std::size_t kCases = 10000;

void expect_clean(const props::Result& r) {
  CAPTURE(r.first_failure);
  CHECK(r.cases == kCases);
  CHECK(r.failures == 0);
}

}  // namespace

TEST_CASE("dwrap determinism") { expect_clean(props::dwrap_determinism(11, kCases)); }
TEST_CASE("pc and sp stay even") { expect_clean(props::pc_sp_masking(12, kCases)); }
TEST_CASE("GIE is fixed while in protected mode") { expect_clean(props::pm_gie_immutability(13, kCases)); }
TEST_CASE("backup contents are invisible") { expect_clean(props::backup_invisibility(14, kCases)); }
TEST_CASE("unprotected code cannot write protected memory") { expect_clean(props::um_cannot_write_protected(15, kCases)); }
TEST_CASE("encode and decode are inverse") { expect_clean(props::encode_decode_roundtrip(16, kCases)); }
