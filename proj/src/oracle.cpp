#include "opme/oracle.hpp"

#include <algorithm>
#include <numeric>

namespace opme {
namespace oracle {

OracleResult naive_matches(std::span<const uint64_t> s, std::span<const uint64_t> p) {
    if (p.empty()) throw std::invalid_argument("naive_matches: empty pattern");
    OracleResult res;
    if (p.size() > s.size()) return res;
    Encoding ep = rank_encode(p);
    for (uint64_t j = 0; j + p.size() <= s.size(); ++j) {
        if (rank_encode(s.subspan(j, p.size())) == ep) res.positions.push_back(j + 1);
    }
    return res;
}

std::vector<uint64_t> naive_suffix_order(std::span<const uint64_t> s) {
    uint64_t n = s.size();
    std::vector<Encoding> suffix_enc(n);
    for (uint64_t j = 0; j < n; ++j) suffix_enc[j] = rank_encode(s.subspan(j));
    std::vector<uint64_t> r(n);
    std::iota(r.begin(), r.end(), uint64_t{1});
    std::sort(r.begin(), r.end(), [&](uint64_t a, uint64_t b) {
        return compare_encodings(suffix_enc[a - 1], suffix_enc[b - 1]) < 0;
    });
    return r;
}

NaiveTables naive_tables(std::span<const uint64_t> s, uint64_t sample, uint64_t occ_threshold,
                         uint64_t ell) {
    uint64_t n = s.size();
    NaiveTables t;
    t.r = naive_suffix_order(s);
    t.sampled.assign(n, false);
    t.rows.assign(n, {});
    std::vector<uint64_t> pos_of(n + 1, 0);  // text position -> R-position
    for (uint64_t p = 1; p <= n; ++p) pos_of[t.r[p - 1]] = p;

    for (uint64_t p = 1; p <= n; ++p) {
        uint64_t j = t.r[p - 1];
        t.sampled[p - 1] = (p % sample == 0) || p == 1 || j == 1 || j == n || (j % sample == 0);
    }

    for (uint64_t p = 1; p <= n; ++p) {
        if (t.sampled[p - 1]) {
            t.rows[p - 1].sampled = true;
            continue;
        }
        uint64_t j = t.r[p - 1];
        // j == 1 is always value-sampled, so j - 1 >= 1 here.
        LbdRow row;
        for (uint64_t l = 1; l + 1 <= ell && j - 1 + l <= n; ++l) {
            auto window = s.subspan(j - 2, l + 1);  // S[j-1 .. j-1+l]
            if (naive_matches(s, window).count() <= occ_threshold) {
                row.l = static_cast<int64_t>(l);
                break;
            }
        }
        if (row.l >= 0) {
            uint64_t l = static_cast<uint64_t>(row.l);
            // Rank of S[j-1] within the distinct characters of S[j..j+l-1].
            OrderStatSet set(l);
            for (uint64_t k = 0; k < l; ++k) set.insert(s[j - 1 + k]);
            row.b = set.rank(s[j - 2]);
            // Anchor: last sampled R-position whose suffix encoding, cut to
            // the extension's length, is strictly smaller. A sampled suffix
            // shorter than the extension joins only if it diverges before its
            // own end; a proper prefix has no comparable window.
            Encoding ext = rank_encode(s.subspan(j - 2, l + 1));
            uint64_t anchor = 0;
            for (uint64_t q = 1; q <= n; ++q) {
                if (!t.sampled[q - 1]) continue;
                uint64_t x = t.r[q - 1];
                uint64_t avail = std::min<uint64_t>(l + 1, n - x + 1);
                Encoding trunc = rank_encode(s.subspan(x - 1, avail));
                bool smaller = compare_encodings(trunc, ext) < 0 &&
                               !(avail < l + 1 && is_prefix_of(trunc, ext));
                if (smaller) anchor = q;
            }
            row.d = static_cast<int64_t>(pos_of[j - 1]) - static_cast<int64_t>(anchor);
        }
        t.rows[p - 1] = row;
    }
    return t;
}

}  // namespace oracle
}  // namespace opme
