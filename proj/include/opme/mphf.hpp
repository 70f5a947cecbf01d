#pragma once

#include <cstdint>
#include <vector>

#include "opme/bitvector.hpp"
#include "opme/encoding.hpp"
#include "opme/serial.hpp"

namespace opme {

struct BuildError : std::runtime_error {
    explicit BuildError(const std::string& what) : std::runtime_error(what) {}
};

// Minimal perfect hash over a fixed set of encodings, built on 64-bit key
// fingerprints with cascaded collision levels: keys that land alone in a
// level's bitmap are settled there, the rest retry on the next level, and a
// small sorted-fingerprint table catches whatever survives every level.
// eval() is a bijection onto [1, key_count] for build keys and returns an
// arbitrary in-range value for foreign keys.
class Mphf {
public:
    Mphf() = default;

    static Mphf build(const std::vector<Encoding>& keys, uint64_t seed);

    uint64_t eval(std::span<const RankValue> key) const;
    uint64_t eval_fp(uint64_t key_fp) const;

    uint64_t key_count() const { return key_count_; }

    void serialize(detail::ByteWriter& w) const;
    static Mphf deserialize(detail::ByteReader& r);

    // Fingerprint of a key under this function's seed.
    uint64_t key_fingerprint(std::span<const RankValue> key) const;
    uint64_t seed() const { return seed_; }

private:
    uint64_t key_count_ = 0;
    uint64_t seed_ = 0;
    std::vector<uint64_t> level_sizes_;
    std::vector<uint64_t> level_offsets_;  // rebuilt, bit offset of each level
    RankBitVector bits_;                   // all levels concatenated
    std::vector<uint64_t> fallback_;       // sorted fingerprints of unsettled keys

    void rebuild_offsets();
};

// Monotone minimal perfect hash: an Mphf plus a packed array mapping each
// key's slot to its rank in the sorted key set.
class Mmphf {
public:
    Mmphf() = default;

    // keys must be strictly increasing (lexicographic over doubled symbols).
    static Mmphf build(const std::vector<Encoding>& sorted_keys, uint64_t seed);

    // Rank in [1, key_count] for build keys; arbitrary in-range otherwise.
    uint64_t eval(std::span<const RankValue> key) const;

    uint64_t key_count() const { return mphf_.key_count(); }
    const Mphf& mphf() const { return mphf_; }

    void serialize(detail::ByteWriter& w) const;
    static Mmphf deserialize(detail::ByteReader& r);

private:
    Mphf mphf_;
    unsigned rank_width_ = 1;
    std::vector<uint8_t> ranks_;  // packed, slot -> rank

    uint64_t rank_at(uint64_t slot) const;
};

}  // namespace opme
