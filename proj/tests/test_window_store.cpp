#include <doctest.h>

#include <map>
#include <set>

#include "opme/fingerprint.hpp"
#include "opme/mphf.hpp"
#include "opme/window_store.hpp"

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

std::vector<uint8_t> bytes_of(const WindowStore& ws) {
    detail::ByteWriter w;
    ws.serialize(w);
    return w.take();
}

}  // namespace

TEST_CASE("extract matches the golden examples") {
    WindowStore ws = WindowStore::build(golden_string(), 8);
    CHECK(ws.extract(28, 3) == enc_of({1, 3, 1}));     // E(S[28..30]) = 0.5 1.5 0.5
    CHECK(ws.extract(19, 4) == enc_of({1, 3, 1, 4}));  // E(S[19..22]) = 0.5 1.5 0.5 2
    for (uint64_t i = 1; i <= golden_string().size(); ++i) CHECK(ws.extract(i, 1) == enc_of({1}));
}

TEST_CASE("extract errors on out-of-range requests") {
    WindowStore ws = WindowStore::build(golden_string(), 8);
    CHECK_THROWS_AS(ws.extract(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ws.extract(1, 9), std::invalid_argument);   // m > ell
    CHECK_THROWS_AS(ws.extract(29, 3), std::invalid_argument);  // past the end
    CHECK_THROWS_AS(WindowStore::build(std::vector<uint64_t>{}, 4), std::invalid_argument);
}

TEST_CASE("payload size follows the stated formula") {
    uint64_t state = 3;
    auto next = [&] { return state = splitmix64(state); };
    std::vector<uint64_t> s;
    for (int i = 0; i < 500; ++i) s.push_back(next() % 1000);
    WindowStore ws = WindowStore::build(s, 16);
    CHECK(ws.num_window_slots() == 33);  // ceil(500/16) + 1
    CHECK(ws.bits_per_entry() == 7);     // ceil(lg(4*16+3))
    CHECK(ws.payload_bits() == 33 * 33 * 7);
}

TEST_CASE("single window when ell >= n") {
    std::vector<uint64_t> s = {4, 1, 3};
    WindowStore ws = WindowStore::build(s, 100);
    CHECK(ws.window_span() == 3);  // clamped
    CHECK(ws.extract(1, 3) == enc_of({1, 1, 3}));
    CHECK(ws.extract(2, 2) == enc_of({1, 3}));
}

TEST_CASE("extract equals rank_encode on random strings") {
    uint64_t state = 1212;
    auto next = [&] { return state = splitmix64(state); };
    for (int rep = 0; rep < 200; ++rep) {
        uint64_t n = 2 + next() % 120;
        uint64_t ell = 1 + next() % 20;
        uint64_t sigma = 1 + next() % 12;
        std::vector<uint64_t> s;
        for (uint64_t i = 0; i < n; ++i) s.push_back(next() % sigma);
        WindowStore ws = WindowStore::build(s, ell);
        uint64_t span = ws.window_span();
        for (uint64_t i = 1; i <= n; ++i) {
            for (uint64_t m = 1; m <= span && i + m - 1 <= n; ++m) {
                Encoding want = rank_encode(std::span<const uint64_t>(s).subspan(i - 1, m));
                REQUIRE(ws.extract(i, m) == want);
                REQUIRE(ws.extract_matches(i, want));
            }
        }
    }
}

TEST_CASE("stores are identical under strictly monotone transforms") {
    uint64_t state = 77;
    auto next = [&] { return state = splitmix64(state); };
    for (int rep = 0; rep < 20; ++rep) {
        uint64_t n = 5 + next() % 200;
        std::vector<uint64_t> s;
        for (uint64_t i = 0; i < n; ++i) s.push_back(next() % 7);
        std::map<uint64_t, uint64_t> f;
        uint64_t cur = 0;
        for (uint64_t v : std::set<uint64_t>(s.begin(), s.end())) f[v] = (cur += 1 + next() % (1 << 28));
        std::vector<uint64_t> s2;
        for (uint64_t v : s) s2.push_back(f[v]);
        WindowStore a = WindowStore::build(s, 9);
        WindowStore b = WindowStore::build(s2, 9);
        CHECK(a == b);
        CHECK(bytes_of(a) == bytes_of(b));
    }
}

TEST_CASE("payload size is alphabet independent") {
    uint64_t state = 5150;
    auto next = [&] { return state = splitmix64(state); };
    std::vector<uint64_t> small, large;
    for (int i = 0; i < 300; ++i) {
        small.push_back(next() % 4 + 1);
        large.push_back(next() % (uint64_t(1) << 30) + 1);
    }
    WindowStore a = WindowStore::build(small, 12);
    WindowStore b = WindowStore::build(large, 12);
    CHECK(a.payload_bits() == b.payload_bits());
    CHECK(bytes_of(a).size() == bytes_of(b).size());
}

TEST_CASE("local-comparator construction is byte identical") {
    const auto& s = golden_string();
    auto cmp = [&](uint64_t i, uint64_t j) {
        return s[i - 1] < s[j - 1] ? -1 : (s[i - 1] > s[j - 1] ? 1 : 0);
    };
    WindowStore direct = WindowStore::build(s, 8);
    WindowStore local = WindowStore::build_local(cmp, s.size(), 8);
    CHECK(bytes_of(direct) == bytes_of(local));

    // a strictly monotone view of the same comparisons
    auto cmp2 = [&](uint64_t i, uint64_t j) {
        uint64_t a = s[i - 1] * 1000 + 17, b = s[j - 1] * 1000 + 17;
        return a < b ? -1 : (a > b ? 1 : 0);
    };
    CHECK(bytes_of(WindowStore::build_local(cmp2, s.size(), 8)) == bytes_of(direct));
}

TEST_CASE("cyclic comparator is rejected") {
    // 1 < 2, 2 < 3, 3 < 1 inside the first window
    auto cmp = [](uint64_t i, uint64_t j) -> int {
        if (i == j) return 0;
        bool swapped = i > j;
        if (swapped) std::swap(i, j);
        int r = (i == 1 && j == 3) ? 1 : -1;
        return swapped ? -r : r;
    };
    CHECK_THROWS_AS(WindowStore::build_local(cmp, 3, 3), BuildError);
}

TEST_CASE("window store serialization round trip") {
    WindowStore ws = WindowStore::build(golden_string(), 8);
    auto bytes = bytes_of(ws);
    detail::ByteReader r(bytes.data(), bytes.size());
    WindowStore ws2 = WindowStore::deserialize(r);
    CHECK(ws == ws2);
    CHECK(ws2.extract(19, 4) == enc_of({1, 3, 1, 4}));
}
