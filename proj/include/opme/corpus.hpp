#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace opme {
namespace corpus {

enum class Format { Text, Binary };

// Text: whitespace-separated decimal unsigned integers.
// Binary: raw 64-bit little-endian unsigned integers.
std::vector<uint64_t> read_file(const std::string& path, Format fmt);
void write_file(const std::string& path, const std::vector<uint64_t>& values, Format fmt);

// Deterministic pseudo-random corpus. ties=true draws uniformly from
// [1, sigma]; ties=false produces distinct values (requires sigma >= n).
std::vector<uint64_t> generate(uint64_t n, uint64_t sigma, uint64_t seed, bool ties);

}  // namespace corpus
}  // namespace opme
