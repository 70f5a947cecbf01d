#pragma once

#include <cstdint>
#include <span>

#include "opme/encoding.hpp"

namespace opme {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded polynomial fingerprints over doubled rank symbols. A fingerprint of
// a prefix extends in O(1) per appended symbol, which is what both the weak
// prefix searcher and the hash functions key on. Collisions between distinct
// strings are possible in principle; builders verify their own key sets and
// retry with a new seed, and query-side collisions only exercise the weak
// contracts of the structures involved.
class Fingerprinter {
public:
    explicit Fingerprinter(uint64_t seed)
        : mult_(splitmix64(seed) | 1), salt_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    uint64_t extend(uint64_t fp, uint32_t doubled_symbol) const {
        return (fp + doubled_symbol + 1) * mult_ + salt_;
    }

    uint64_t of(std::span<const RankValue> enc) const {
        uint64_t fp = 0;
        for (RankValue rv : enc) fp = extend(fp, rv.doubled);
        return fp;
    }

    template <typename Sym>
    uint64_t of_symbols(std::span<const Sym> symbols) const {
        uint64_t fp = 0;
        for (Sym s : symbols) fp = extend(fp, static_cast<uint32_t>(s));
        return fp;
    }

private:
    uint64_t mult_;
    uint64_t salt_;
};

}  // namespace opme
