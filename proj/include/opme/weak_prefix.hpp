#pragma once

#include <bit>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "opme/encoding.hpp"
#include "opme/fingerprint.hpp"
#include "opme/serial.hpp"

namespace opme {

struct PrefixRange {
    uint64_t lo = 0;  // 1-based dictionary indices, inclusive
    uint64_t hi = 0;

    bool operator==(const PrefixRange&) const = default;
};

// Weak prefix search over a sorted dictionary of encodings via fat binary
// search on a compacted trie. Each trie node with skip interval (s, e] is
// stored once, keyed by the fingerprint of its length-(s+1) prefix; a query
// descends with 2-fattest probes, shrinking its upper bound on misses until
// it enters the next node, then restarts the bound. If the query prefixes at
// least one dictionary key the returned range is exactly the maximal run of
// prefixed keys; otherwise the result is arbitrary and the caller verifies.
class WeakPrefixSearcher {
public:
    WeakPrefixSearcher() = default;

    // Keys must be lexicographically non-decreasing (duplicates allowed).
    // The builder retries derived seeds until fingerprints of all key
    // prefixes are collision-free, then records the seed it settled on.
    static WeakPrefixSearcher build(const std::vector<Encoding>& sorted_keys, uint64_t seed);

    PrefixRange query(std::span<const RankValue> q) const;

    uint64_t dictionary_size() const { return dict_size_; }
    uint64_t entry_count() const { return entries_.size(); }
    uint64_t seed() const { return seed_; }

    void serialize(detail::ByteWriter& w) const;
    static WeakPrefixSearcher deserialize(detail::ByteReader& r);

private:
    struct Entry {
        uint64_t fp = 0;
        uint32_t lo = 0;
        uint32_t hi = 0;
        uint32_t extent_len = 0;
    };

    uint64_t dict_size_ = 0;
    uint64_t seed_ = 0;
    uint64_t root_extent_ = 0;
    std::vector<Entry> entries_;               // sorted for serialization
    std::unordered_map<uint64_t, uint32_t> by_fp_;  // fp -> entry index, rebuilt on load

    void rebuild_map();
};

namespace detail {

// The unique value in (a, b] divisible by the largest possible power of two.
inline uint64_t two_fattest(uint64_t a, uint64_t b) {
    // a < b required
    uint64_t t = 63 - std::countl_zero(a ^ b);
    return b & ~((uint64_t(1) << t) - 1);
}

}  // namespace detail
}  // namespace opme
