#pragma once
#include <cstdint>
#include <string>
#include <vector>

// Randomized invariant checks shared by the property suite and the acceptance binary.
namespace props {

struct Result {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;
};

Result dwrap_determinism(std::uint64_t seed, std::size_t n);
Result pc_sp_masking(std::uint64_t seed, std::size_t n);
Result pm_gie_immutability(std::uint64_t seed, std::size_t n);
Result backup_invisibility(std::uint64_t seed, std::size_t n);
Result um_cannot_write_protected(std::uint64_t seed, std::size_t n);
Result encode_decode_roundtrip(std::uint64_t seed, std::size_t n);

std::vector<Result> all(std::uint64_t seed, std::size_t n);

}  // namespace props
