#include <doctest.h>

#include <algorithm>
#include <set>

#include "opme/bitvector.hpp"
#include "opme/elias_fano.hpp"
#include "opme/fingerprint.hpp"
#include "opme/mphf.hpp"
#include "opme/oracle.hpp"
#include "opme/weak_prefix.hpp"

using namespace opme;

namespace {

Encoding enc_of(std::initializer_list<uint32_t> doubled) {
    Encoding e;
    for (uint32_t d : doubled) e.push_back(RankValue{d});
    return e;
}

const std::vector<uint64_t>& golden_string() {
    static const std::vector<uint64_t> s = {3, 9, 7, 2, 3, 5, 6, 8, 4, 3, 6, 5, 9, 5, 2,
                                            2, 0, 1, 5, 6, 0, 5, 4, 3, 1, 2, 5, 6, 7, 1};
    return s;
}

}  // namespace

TEST_CASE("bitvector rank examples") {
    std::vector<bool> bits = {1, 0, 1, 1, 0};
    RankBitVector bv(bits);
    CHECK(bv.rank1(3) == 2);
    CHECK(bv.rank1(0) == 0);
    CHECK(bv.rank1(5) == 3);
    CHECK_THROWS_AS(bv.rank1(6), std::invalid_argument);
    CHECK(bv.select1(1) == 0);
    CHECK(bv.select1(3) == 3);
    CHECK_THROWS_AS(bv.select1(4), std::invalid_argument);
    CHECK_THROWS_AS(bv.select1(0), std::invalid_argument);
}

TEST_CASE("bitvector rank/select against a naive scan") {
    uint64_t state = 99;
    auto next = [&] { return state = splitmix64(state); };
    std::vector<bool> bits(100000);
    for (size_t i = 0; i < bits.size(); ++i) bits[i] = next() % 5 == 0;
    RankBitVector bv(bits);
    uint64_t acc = 0;
    std::vector<uint64_t> pref(bits.size() + 1, 0);
    for (size_t i = 0; i < bits.size(); ++i) pref[i + 1] = acc += bits[i];
    for (int probe = 0; probe < 3000; ++probe) {
        uint64_t i = next() % (bits.size() + 1);
        CHECK(bv.rank1(i) == pref[i]);
    }
    for (uint64_t k = 1; k <= bv.ones(); k += 1 + next() % 131) {
        uint64_t pos = bv.select1(k);
        CHECK(bits[pos]);
        CHECK(pref[pos + 1] == k);
    }
    detail::ByteWriter w;
    bv.serialize(w);
    auto bytes = w.take();
    detail::ByteReader r(bytes.data(), bytes.size());
    CHECK(RankBitVector::deserialize(r) == bv);
}

TEST_CASE("elias-fano examples and round trips") {
    EliasFano ef = EliasFano::build({2, 3, 5, 7, 11});
    CHECK(ef.access(4) == 7);
    CHECK(ef.access(1) == 2);
    CHECK_THROWS_AS(ef.access(0), std::invalid_argument);
    CHECK_THROWS_AS(ef.access(6), std::invalid_argument);

    EliasFano zeros = EliasFano::build({0, 0, 0});
    CHECK(zeros.access(1) == 0);
    CHECK(zeros.access(3) == 0);

    CHECK_THROWS_AS(EliasFano::build({3, 2}), std::invalid_argument);

    uint64_t state = 5;
    auto next = [&] { return state = splitmix64(state); };
    for (int rep = 0; rep < 200; ++rep) {
        uint64_t n = next() % 400;
        std::vector<uint64_t> vals;
        uint64_t cur = next() % 17;
        for (uint64_t i = 0; i < n; ++i) {
            cur += next() % 5000;
            vals.push_back(cur);
        }
        EliasFano e = EliasFano::build(vals);
        for (uint64_t k = 1; k <= n; ++k) REQUIRE(e.access(k) == vals[k - 1]);
        detail::ByteWriter w;
        e.serialize(w);
        auto bytes = w.take();
        detail::ByteReader r(bytes.data(), bytes.size());
        EliasFano e2 = EliasFano::deserialize(r);
        for (uint64_t k = 1; k <= n; ++k) REQUIRE(e2.access(k) == vals[k - 1]);
    }
}

TEST_CASE("mphf bijectivity") {
    CHECK(Mphf::build({enc_of({1})}, 7).eval(enc_of({1})) == 1);

    std::vector<Encoding> three = {enc_of({1}), enc_of({1, 2}), enc_of({1, 3})};
    Mphf h3 = Mphf::build(three, 7);
    std::set<uint64_t> vals;
    for (const auto& k : three) vals.insert(h3.eval(k));
    CHECK(vals == std::set<uint64_t>{1, 2, 3});

    CHECK_THROWS_AS(Mphf::build({enc_of({1}), enc_of({1})}, 7), BuildError);

    uint64_t state = 31;
    auto next = [&] { return state = splitmix64(state); };
    std::set<std::vector<uint32_t>> raw;
    std::vector<Encoding> keys;
    while (keys.size() < 10000) {
        uint64_t len = 1 + next() % 10;
        std::vector<uint32_t> k;
        for (uint64_t i = 0; i < len; ++i) k.push_back(1 + next() % (2 * (i + 1) - 1));
        if (!raw.insert(k).second) continue;
        Encoding e;
        for (uint32_t d : k) e.push_back(RankValue{d});
        keys.push_back(std::move(e));
    }
    Mphf h = Mphf::build(keys, 1234);
    std::vector<bool> hit(keys.size(), false);
    for (const auto& k : keys) {
        uint64_t v = h.eval(k);
        REQUIRE(v >= 1);
        REQUIRE(v <= keys.size());
        REQUIRE_FALSE(hit[v - 1]);
        hit[v - 1] = true;
    }
    // weak contract: foreign keys still land in range
    for (int rep = 0; rep < 100; ++rep) {
        Encoding f = enc_of({1});
        for (int i = 0; i < 20; ++i) f.push_back(RankValue{static_cast<uint32_t>(1 + next() % 9)});
        uint64_t v = h.eval(f);
        CHECK(v >= 1);
        CHECK(v <= keys.size());
    }
    // serialization round trip preserves the mapping
    detail::ByteWriter w;
    h.serialize(w);
    auto bytes = w.take();
    detail::ByteReader r(bytes.data(), bytes.size());
    Mphf h2 = Mphf::deserialize(r);
    for (const auto& k : keys) REQUIRE(h2.eval(k) == h.eval(k));
}

TEST_CASE("mmphf is the sorted rank") {
    CHECK(Mmphf::build({enc_of({1})}, 3).eval(enc_of({1})) == 1);

    std::vector<Encoding> keys = {enc_of({1}), enc_of({1, 1}), enc_of({1, 2}), enc_of({1, 3}),
                                  enc_of({1, 3, 1})};
    Mmphf m = Mmphf::build(keys, 99);
    for (size_t k = 0; k < keys.size(); ++k) CHECK(m.eval(keys[k]) == k + 1);

    CHECK_THROWS_AS(Mmphf::build({enc_of({1, 2}), enc_of({1, 1})}, 3), BuildError);
    CHECK_THROWS_AS(Mmphf::build({enc_of({1}), enc_of({1})}, 3), BuildError);
}

TEST_CASE("mmphf over the golden instance extension set") {
    const auto& s = golden_string();
    auto nt = oracle::naive_tables(s, 4, 4, 10);
    std::vector<Encoding> ext;
    for (uint64_t p = 1; p <= s.size(); ++p) {
        const auto& row = nt.rows[p - 1];
        if (row.sampled || row.l < 0) continue;
        uint64_t j = nt.r[p - 1];
        ext.push_back(rank_encode(std::span<const uint64_t>(s).subspan(j - 2, row.l + 1)));
    }
    std::sort(ext.begin(), ext.end(), encoding_less);
    ext.erase(std::unique(ext.begin(), ext.end()), ext.end());
    Mmphf m = Mmphf::build(ext, 5);
    for (size_t k = 0; k < ext.size(); ++k) CHECK(m.eval(ext[k]) == k + 1);
}

TEST_CASE("weak prefix search on the golden dictionary") {
    const auto& s = golden_string();
    const uint64_t n = s.size();
    auto r = oracle::naive_suffix_order(s);
    const uint64_t ell = 10;
    std::vector<Encoding> dict;
    for (uint64_t p = 1; p <= n; ++p) {
        uint64_t j = r[p - 1];
        dict.push_back(rank_encode(std::span<const uint64_t>(s).subspan(j - 1, std::min(ell, n - j + 1))));
    }
    WeakPrefixSearcher wps = WeakPrefixSearcher::build(dict, 1);

    CHECK(wps.query(enc_of({1, 3, 1, 4})) == PrefixRange{18, 18});  // E(2 3 1 2)
    CHECK(wps.query(enc_of({1})) == PrefixRange{1, n});
    for (uint64_t d = 1; d <= n; ++d) {
        PrefixRange got = wps.query(dict[d - 1]);
        CHECK(got.lo <= d);
        CHECK(d <= got.hi);
        for (uint64_t k = got.lo; k <= got.hi; ++k)
            CHECK(is_prefix_of(dict[d - 1], dict[k - 1]));
    }

    detail::ByteWriter w;
    wps.serialize(w);
    auto bytes = w.take();
    detail::ByteReader rd(bytes.data(), bytes.size());
    WeakPrefixSearcher wps2 = WeakPrefixSearcher::deserialize(rd);
    CHECK(wps2.query(enc_of({1, 3, 1, 4})) == PrefixRange{18, 18});
}

TEST_CASE("weak prefix search exactness against explicit binary search") {
    uint64_t state = 404;
    auto next = [&] { return state = splitmix64(state); };
    for (int rep = 0; rep < 40; ++rep) {
        uint64_t n = 10 + next() % 120;
        std::vector<uint64_t> s;
        for (uint64_t i = 0; i < n; ++i) s.push_back(next() % (2 + next() % 9) + 1);
        auto r = oracle::naive_suffix_order(s);
        uint64_t cap = 1 + next() % 12;
        std::vector<Encoding> dict;
        for (uint64_t p = 1; p <= n; ++p) {
            uint64_t j = r[p - 1];
            dict.push_back(
                rank_encode(std::span<const uint64_t>(s).subspan(j - 1, std::min(cap, n - j + 1))));
        }
        WeakPrefixSearcher wps = WeakPrefixSearcher::build(dict, next());
        for (uint64_t start = 1; start <= n; ++start) {
            for (uint64_t len = 1; len <= std::min(cap, n - start + 1); ++len) {
                Encoding q = rank_encode(std::span<const uint64_t>(s).subspan(start - 1, len));
                auto lo_it = std::lower_bound(dict.begin(), dict.end(), q,
                                              [](const Encoding& a, const Encoding& b) {
                                                  return compare_encodings(a, b) < 0;
                                              });
                uint64_t lo = 0, hi = 0;
                for (auto it = lo_it; it != dict.end() && is_prefix_of(q, *it); ++it) {
                    if (!lo) lo = static_cast<uint64_t>(it - dict.begin()) + 1;
                    hi = static_cast<uint64_t>(it - dict.begin()) + 1;
                }
                REQUIRE(lo != 0);  // every substring encoding prefixes its own suffix key
                PrefixRange got = wps.query(q);
                REQUIRE(got == PrefixRange{lo, hi});
            }
        }
    }
}
