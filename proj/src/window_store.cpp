#include "opme/window_store.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

#include "opme/mphf.hpp"  // BuildError

namespace opme {

namespace {

// Doubled rank of each window character among the window's distinct values.
void rank_window_values(std::span<const uint64_t> chars, std::vector<uint32_t>& out) {
    std::vector<uint64_t> sorted(chars.begin(), chars.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    out.resize(chars.size());
    for (size_t k = 0; k < chars.size(); ++k) {
        size_t r = std::lower_bound(sorted.begin(), sorted.end(), chars[k]) - sorted.begin();
        out[k] = static_cast<uint32_t>(2 * (r + 1));
    }
}

}  // namespace

WindowStore WindowStore::build_from_ranks(
    uint64_t n, uint64_t ell,
    const std::function<void(uint64_t, uint64_t, std::vector<uint32_t>&)>& rank_window) {
    if (n == 0) throw std::invalid_argument("WindowStore: empty text");
    if (ell == 0) throw std::invalid_argument("WindowStore: ell must be positive");
    WindowStore ws;
    ws.n_ = n;
    ws.ell_ = std::min(ell, n);
    ws.num_windows_ = (n + ws.ell_ - 1) / ws.ell_ + 1;
    ws.bits_per_entry_ = std::bit_width(4 * ws.ell_ + 3);
    uint64_t entries_per_window = 2 * ws.ell_ + 1;

    detail::BitWriter bw;
    std::vector<uint32_t> ranks;
    for (uint64_t w = 0; w < ws.num_windows_; ++w) {
        uint64_t start = 1 + w * ws.ell_;  // 1-based text position
        uint64_t len = start > n ? 0 : std::min(entries_per_window, n - start + 1);
        ranks.clear();
        if (len > 0) rank_window(start, len, ranks);
        assert(ranks.size() == len);
        for (uint64_t k = 0; k < entries_per_window; ++k)
            bw.put(k < len ? ranks[k] : 0, ws.bits_per_entry_);
    }
    ws.packed_ = bw.take();
    return ws;
}

WindowStore WindowStore::build(std::span<const uint64_t> s, uint64_t ell) {
    return build_from_ranks(s.size(), ell, [&](uint64_t start, uint64_t len, std::vector<uint32_t>& out) {
        rank_window_values(s.subspan(start - 1, len), out);
    });
}

WindowStore WindowStore::build_local(const LocalComparator& cmp, uint64_t n, uint64_t ell) {
    return build_from_ranks(n, ell, [&](uint64_t start, uint64_t len, std::vector<uint32_t>& out) {
        // Insertion sort tolerates an inconsistent comparator; the full
        // pairwise validation below catches any cycle it produced.
        std::vector<uint64_t> order;
        order.reserve(len);
        for (uint64_t k = 0; k < len; ++k) {
            uint64_t pos = start + k;
            auto it = order.begin();
            while (it != order.end() && cmp(*it, pos) < 0) ++it;
            order.insert(it, pos);
        }
        out.assign(len, 0);
        uint32_t next_rank = 0;
        for (size_t k = 0; k < order.size(); ++k) {
            if (k == 0 || cmp(order[k - 1], order[k]) != 0) ++next_rank;
            out[order[k] - start] = 2 * next_rank;
        }
        for (uint64_t a = 0; a < len; ++a) {
            for (uint64_t b = a + 1; b < len; ++b) {
                int got = cmp(start + a, start + b);
                int want = out[a] < out[b] ? -1 : (out[a] > out[b] ? 1 : 0);
                if ((got < 0 ? -1 : got > 0 ? 1 : 0) != want)
                    throw BuildError("WindowStore: comparator is inconsistent inside a window");
            }
        }
    });
}

uint64_t WindowStore::entry(uint64_t window, uint64_t offset) const {
    uint64_t bitpos = (window * (2 * ell_ + 1) + offset) * bits_per_entry_;
    uint64_t v = 0;
    for (unsigned i = 0; i < bits_per_entry_; ++i, ++bitpos)
        if ((packed_[bitpos >> 3] >> (bitpos & 7)) & 1u) v |= uint64_t(1) << i;
    return v;
}

void WindowStore::check_range(uint64_t i, uint64_t m) const {
    if (i < 1 || m < 1 || m > ell_ || i + m - 1 > n_)
        throw std::invalid_argument("WindowStore::extract: range out of bounds");
}

Encoding WindowStore::extract(uint64_t i, uint64_t m) const {
    check_range(i, m);
    uint64_t w = (i - 1) / ell_;
    uint64_t off = (i - 1) % ell_;
    Encoding out;
    out.reserve(m);
    OrderStatSet set(m);
    for (uint64_t k = 0; k < m; ++k) out.push_back(set.rank_and_insert(entry(w, off + k)));
    return out;
}

bool WindowStore::extract_matches(uint64_t i, std::span<const RankValue> pattern) const {
    if (pattern.empty()) return false;
    if (i < 1 || pattern.size() > ell_ || i + pattern.size() - 1 > n_) return false;
    uint64_t w = (i - 1) / ell_;
    uint64_t off = (i - 1) % ell_;
    OrderStatSet set(pattern.size());
    for (size_t k = 0; k < pattern.size(); ++k) {
        if (set.rank_and_insert(entry(w, off + k)) != pattern[k]) return false;
    }
    return true;
}

void WindowStore::serialize(detail::ByteWriter& w) const {
    w.put_u64(n_);
    w.put_u64(ell_);
    w.put_u64(bits_per_entry_);
    w.put_bytes(packed_.data(), packed_.size());
}

WindowStore WindowStore::deserialize(detail::ByteReader& r) {
    WindowStore ws;
    ws.n_ = r.get_u64();
    ws.ell_ = r.get_u64();
    uint64_t bpe = r.get_u64();
    if (ws.n_ == 0 || ws.ell_ == 0 || ws.ell_ > ws.n_) throw FormatError("WindowStore: bad dimensions");
    if (bpe != std::bit_width(4 * ws.ell_ + 3)) throw FormatError("WindowStore: bad entry width");
    ws.bits_per_entry_ = static_cast<unsigned>(bpe);
    ws.num_windows_ = (ws.n_ + ws.ell_ - 1) / ws.ell_ + 1;
    size_t nbytes = (ws.payload_bits() + 7) / 8;
    const uint8_t* p = r.get_bytes(nbytes);
    ws.packed_.assign(p, p + nbytes);
    return ws;
}

}  // namespace opme
