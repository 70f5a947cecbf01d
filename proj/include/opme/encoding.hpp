#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace opme {

// One symbol of a rank encoding. The half-integer ranks 0.5, j, j+0.5 are
// stored doubled, so every comparison is a plain integer comparison:
// value j   <-> doubled = 2j   (exact tie with an existing character)
// value j+.5 <-> doubled = 2j+1 (strictly between neighbours / new extreme)
struct RankValue {
    uint32_t doubled = 0;

    constexpr bool is_tie() const { return (doubled & 1u) == 0; }
    constexpr bool half() const { return (doubled & 1u) != 0; }
    // For doubled = 2j or 2j+1, returns j.
    constexpr uint32_t whole_part() const { return doubled / 2; }

    friend constexpr auto operator<=>(RankValue a, RankValue b) = default;
};

using Encoding = std::vector<RankValue>;

// Lexicographic comparison with the proper-prefix-is-smaller convention.
int compare_encodings(std::span<const RankValue> a, std::span<const RankValue> b);

inline bool encoding_less(const Encoding& a, const Encoding& b) {
    return compare_encodings(a, b) < 0;
}

bool is_prefix_of(std::span<const RankValue> prefix, std::span<const RankValue> s);

std::string encoding_to_string(std::span<const RankValue> e);

// Incremental half-integer ranker over a growing set of characters. Stands in
// for the constant-time dynamic set cited by the source material: a plain
// sorted array, O(size) worst-case insert, which is negligible at the
// polylogarithmic sizes it is used with. Single-owner, not thread-safe.
class OrderStatSet {
public:
    OrderStatSet() = default;
    explicit OrderStatSet(size_t capacity_hint) { distinct_.reserve(capacity_hint); }

    void clear() { distinct_.clear(); }
    size_t distinct_count() const { return distinct_.size(); }

    // Rank of x within the current distinct set, per the four-case encoding
    // definition: tie -> 2j, strictly between / extreme -> 2j+1.
    RankValue rank(uint64_t x) const;

    void insert(uint64_t x);

    // rank(x) followed by insert(x).
    RankValue rank_and_insert(uint64_t x);

private:
    std::vector<uint64_t> distinct_;
};

// E(seq): the rank of each character among the distinct characters before it.
Encoding rank_encode(std::span<const uint64_t> seq);

inline Encoding rank_encode(const std::vector<uint64_t>& seq) {
    return rank_encode(std::span<const uint64_t>(seq));
}

// True iff |a| == |b| and the two sequences have the same relative order,
// ties included.
bool order_isomorphic(std::span<const uint64_t> a, std::span<const uint64_t> b);

// E(x . prefix) where x is any character whose rank within `prefix` is b
// (integer b: equal to the b-th smallest distinct value; half b = r+0.5:
// strictly between the r-th and (r+1)-st, or beyond either extreme). The
// result does not depend on which realization is chosen.
Encoding prepend_rank(std::span<const uint64_t> prefix, RankValue b);

namespace detail {

// Remaps values to 2,4,6,... preserving order, so that a character strictly
// between any two neighbours (or beyond either extreme) is realizable as an
// odd value. Returns the remapped sequence.
std::vector<uint64_t> dense_double(std::span<const uint64_t> seq);

// The value realizing rank b among the given distinct candidates (even,
// ascending): the b-th smallest for tie ranks, an odd in-between or
// beyond-extreme value for half ranks. Throws when b is unrealizable.
uint64_t realize_rank(std::span<const uint64_t> sorted_distinct_even, RankValue b);

}  // namespace detail
}  // namespace opme
