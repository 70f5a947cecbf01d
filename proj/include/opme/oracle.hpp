#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "opme/encoding.hpp"

namespace opme {
namespace oracle {

struct OracleResult {
    std::vector<uint64_t> positions;  // 1-based match starts, increasing
    uint64_t count() const { return positions.size(); }
};

// Every window re-encoded from scratch. Quadratic and proud of it; this is
// the ground truth the index is tested against.
OracleResult naive_matches(std::span<const uint64_t> s, std::span<const uint64_t> p);

// R[1..n]: R[i] = start of the suffix whose encoding is the i-th smallest,
// full encodings compared with the proper-prefix-smaller convention.
std::vector<uint64_t> naive_suffix_order(std::span<const uint64_t> s);

struct LbdRow {
    bool sampled = false;
    int64_t l = -1;  // -1 = flag / absent
    RankValue b{0};
    int64_t d = 0;
};

struct NaiveTables {
    std::vector<uint64_t> r;
    std::vector<bool> sampled;    // by R-position, 1-based at index p-1
    std::vector<LbdRow> rows;     // by R-position
};

// Direct-from-definition L/B/D plus the sampled set, for validating builds.
NaiveTables naive_tables(std::span<const uint64_t> s, uint64_t sample, uint64_t occ_threshold,
                         uint64_t ell);

}  // namespace oracle
}  // namespace opme
