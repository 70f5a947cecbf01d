#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "opme/encoding.hpp"
#include "opme/serial.hpp"

namespace opme {

// Three-way comparator over text positions (1-based); must answer for any
// pair at distance at most 2*ell.
using LocalComparator = std::function<int(uint64_t, uint64_t)>;

// Per-window character ranks over windows S[w..w+2*ell] starting at
// w = 1, ell+1, 2*ell+1, ... Every range of length <= ell lies inside one
// window, so E(S[i..i+m-1]) is recoverable without the original characters
// or any global comparisons. Stores only rank information: two strings with
// the same local order produce byte-identical stores.
class WindowStore {
public:
    WindowStore() = default;

    static WindowStore build(std::span<const uint64_t> s, uint64_t ell);
    static WindowStore build(const std::vector<uint64_t>& s, uint64_t ell) {
        return build(std::span<const uint64_t>(s), ell);
    }

    // Same store from comparisons alone; throws BuildError if the comparator
    // is inconsistent (non-transitive) inside any window.
    static WindowStore build_local(const LocalComparator& cmp, uint64_t n, uint64_t ell);

    // E(S[i..i+m-1]) for 1 <= i, i+m-1 <= n, 1 <= m <= ell.
    Encoding extract(uint64_t i, uint64_t m) const;

    // extract(i, |pattern|) == pattern, with early exit on the first
    // mismatching symbol.
    bool extract_matches(uint64_t i, std::span<const RankValue> pattern) const;

    uint64_t text_length() const { return n_; }
    uint64_t window_span() const { return ell_; }  // clamped to n
    uint64_t num_window_slots() const { return num_windows_; }
    unsigned bits_per_entry() const { return bits_per_entry_; }
    uint64_t payload_bits() const { return num_windows_ * (2 * ell_ + 1) * bits_per_entry_; }

    void serialize(detail::ByteWriter& w) const;
    static WindowStore deserialize(detail::ByteReader& r);

    bool operator==(const WindowStore& o) const {
        return n_ == o.n_ && ell_ == o.ell_ && packed_ == o.packed_;
    }

private:
    uint64_t n_ = 0;
    uint64_t ell_ = 0;
    uint64_t num_windows_ = 0;
    unsigned bits_per_entry_ = 0;
    std::vector<uint8_t> packed_;

    uint64_t entry(uint64_t window, uint64_t offset) const;
    void check_range(uint64_t i, uint64_t m) const;
    static WindowStore build_from_ranks(uint64_t n, uint64_t ell,
                                        const std::function<void(uint64_t, uint64_t, std::vector<uint32_t>&)>& rank_window);
};

}  // namespace opme
