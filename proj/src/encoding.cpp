#include "opme/encoding.hpp"

#include <algorithm>
#include <cassert>

namespace opme {

int compare_encodings(std::span<const RankValue> a, std::span<const RankValue> b) {
    size_t k = std::min(a.size(), b.size());
    for (size_t i = 0; i < k; ++i) {
        if (a[i].doubled != b[i].doubled) return a[i].doubled < b[i].doubled ? -1 : 1;
    }
    if (a.size() == b.size()) return 0;
    return a.size() < b.size() ? -1 : 1;
}

bool is_prefix_of(std::span<const RankValue> prefix, std::span<const RankValue> s) {
    if (prefix.size() > s.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i)
        if (prefix[i].doubled != s[i].doubled) return false;
    return true;
}

std::string encoding_to_string(std::span<const RankValue> e) {
    std::string out;
    for (size_t i = 0; i < e.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(e[i].doubled / 2);
        if (e[i].doubled & 1u) out += ".5";
    }
    return out;
}

RankValue OrderStatSet::rank(uint64_t x) const {
    auto it = std::lower_bound(distinct_.begin(), distinct_.end(), x);
    uint32_t below = static_cast<uint32_t>(it - distinct_.begin());
    bool present = it != distinct_.end() && *it == x;
    return RankValue{present ? 2 * (below + 1) : 2 * below + 1};
}

void OrderStatSet::insert(uint64_t x) {
    auto it = std::lower_bound(distinct_.begin(), distinct_.end(), x);
    if (it == distinct_.end() || *it != x) distinct_.insert(it, x);
}

RankValue OrderStatSet::rank_and_insert(uint64_t x) {
    auto it = std::lower_bound(distinct_.begin(), distinct_.end(), x);
    uint32_t below = static_cast<uint32_t>(it - distinct_.begin());
    if (it != distinct_.end() && *it == x) return RankValue{2 * (below + 1)};
    distinct_.insert(it, x);
    return RankValue{2 * below + 1};
}

Encoding rank_encode(std::span<const uint64_t> seq) {
    if (seq.empty()) throw std::invalid_argument("rank_encode: empty sequence");
    Encoding out;
    out.reserve(seq.size());
    OrderStatSet set(seq.size());
    for (uint64_t v : seq) out.push_back(set.rank_and_insert(v));
    return out;
}

bool order_isomorphic(std::span<const uint64_t> a, std::span<const uint64_t> b) {
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    OrderStatSet sa(a.size()), sb(b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        if (sa.rank_and_insert(a[i]) != sb.rank_and_insert(b[i])) return false;
    }
    return true;
}

namespace detail {

std::vector<uint64_t> dense_double(std::span<const uint64_t> seq) {
    std::vector<uint64_t> sorted(seq.begin(), seq.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<uint64_t> out;
    out.reserve(seq.size());
    for (uint64_t v : seq) {
        size_t r = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        out.push_back(2 * (r + 1));
    }
    return out;
}

uint64_t realize_rank(std::span<const uint64_t> sorted_distinct_even, RankValue b) {
    // The candidate values are even and sorted, so every strictly-between and
    // beyond-extreme slot has an odd realization.
    uint64_t d = sorted_distinct_even.size();
    if (b.doubled < 1) throw std::invalid_argument("prepend_rank: rank out of range");
    if (b.is_tie()) {
        uint64_t j = b.whole_part();
        if (j < 1 || j > d) throw std::invalid_argument("prepend_rank: tie rank beyond distinct count");
        return sorted_distinct_even[j - 1];
    }
    uint64_t r = b.whole_part();  // strictly between the r-th and (r+1)-st distinct value
    if (r > d) throw std::invalid_argument("prepend_rank: gap rank beyond distinct count");
    if (r == 0) return d == 0 ? 1 : sorted_distinct_even[0] - 1;
    return sorted_distinct_even[r - 1] + 1;
}

}  // namespace detail

Encoding prepend_rank(std::span<const uint64_t> prefix, RankValue b) {
    std::vector<uint64_t> dd = detail::dense_double(prefix);
    std::vector<uint64_t> distinct = dd;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    uint64_t x = detail::realize_rank(distinct, b);
    std::vector<uint64_t> full;
    full.reserve(dd.size() + 1);
    full.push_back(x);
    full.insert(full.end(), dd.begin(), dd.end());
    return rank_encode(full);
}

}  // namespace opme
