#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <thread>

#include "opme/fingerprint.hpp"
#include "opme/op_index.hpp"
#include "opme/oracle.hpp"

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

OpIndex golden_index(bool verify = true) {
    IndexParams::Overrides ov;
    ov.sample = 4;
    ov.occ_threshold = 4;
    IndexParams p = IndexParams::compute(golden_string().size(), 1, 1, ov);
    return OpIndex::build(golden_string(), p, {verify});
}

}  // namespace

TEST_CASE("index parameters follow the formulas") {
    IndexParams p = IndexParams::compute(1024);
    CHECK(p.ell == 20);
    CHECK(p.sample == 3);
    CHECK(p.occ_threshold == 3);
    CHECK(p.m_max == 10);
    IndexParams p30 = IndexParams::compute(30);
    CHECK(p30.ell == 10);
    CHECK(p30.sample == 2);
    IndexParams tiny = IndexParams::compute(2);
    CHECK(tiny.sample == 1);
    CHECK_THROWS_AS(IndexParams::compute(1), std::invalid_argument);

    IndexParams::Overrides bad_threshold;
    bad_threshold.sample = 4;
    bad_threshold.occ_threshold = 1;
    CHECK_THROWS_AS(IndexParams::compute(1024, 1, 1, bad_threshold), std::invalid_argument);
    IndexParams::Overrides bad_sample;
    bad_sample.sample = 1000;
    CHECK_THROWS_AS(IndexParams::compute(1024, 1, 1, bad_sample), std::invalid_argument);
    IndexParams::Overrides bad_ell;
    bad_ell.ell = 3;
    CHECK_THROWS_AS(IndexParams::compute(1024, 1, 1, bad_ell), std::invalid_argument);
}

TEST_CASE("suffix_compare orders the golden suffixes") {
    const auto& s = golden_string();
    for (uint64_t j = 1; j < 30; ++j) CHECK(suffix_compare(s, 30, j) < 0);
    CHECK(suffix_compare(s, 7, 7) == 0);
    std::vector<uint64_t> order(30);
    for (uint64_t i = 0; i < 30; ++i) order[i] = i + 1;
    std::sort(order.begin(), order.end(),
              [&](uint64_t a, uint64_t b) { return suffix_compare(s, a, b) < 0; });
    CHECK(order == oracle::naive_suffix_order(s));
}

TEST_CASE("golden build stores the sampled entries") {
    OpIndex ix = golden_index();
    CHECK(ix.sampled_positions() ==
          std::vector<uint64_t>{1, 4, 7, 8, 9, 11, 12, 16, 19, 20, 24, 28, 30});
    CHECK(ix.slot_value(8) == 28);   // R[16] = 28
    CHECK(ix.slot_value(9) == 12);   // R[19] = 12
    CHECK(ix.slot_value(1) == 30);   // R[1] = 30
    CHECK(ix.value_slot(28) == 8);
    CHECK(ix.value_slot(30) == 1);
    CHECK_FALSE(ix.value_slot(29).has_value());  // R-position 2 is not sampled

    auto row18 = ix.backstep_row(18);
    CHECK_FALSE(row18.flag);
    CHECK(row18.l == 3);
    CHECK(row18.b.doubled == 3);
    CHECK(row18.d == 5);
    auto row2 = ix.backstep_row(2);
    CHECK(row2.l == 2);
    CHECK(row2.b.doubled == 3);
    CHECK(row2.d == 4);
    CHECK_THROWS_AS(ix.backstep_row(16), std::invalid_argument);
}

TEST_CASE("golden L values match the occurrence cutoffs") {
    const auto& s = golden_string();
    // j = 29 sits at R-position 2: its length-3 left extension has 3 matches,
    // the length-2 one has 15.
    CHECK(oracle::naive_matches(s, std::vector<uint64_t>{6, 7, 1}).count() == 3);
    CHECK(oracle::naive_matches(s, std::vector<uint64_t>{6, 7}).count() == 15);
    OpIndex ix = golden_index();
    CHECK(ix.backstep_row(2).l == 2);
    CHECK(ix.backstep_row(5).l == 2);  // j = 2 at R-position 5
}

TEST_CASE("backward steps replay the worked example") {
    OpIndex ix = golden_index();
    CHECK(ix.anchor_slot_hashed(enc_of({1, 3, 5, 1})) == ix.anchor_slot_searched(enc_of({1, 3, 5, 1})));
    CHECK(ix.slot_rpos(ix.anchor_slot_hashed(enc_of({1, 3, 5, 1}))) == 20);
    CHECK(ix.backward_step(18, enc_of({1, 3, 5, 1})) == 25);       // 20 + 5
    CHECK(ix.backward_step(25, enc_of({1, 3, 5, 7, 2})) == 27);    // 24 + 3
    CHECK(ix.backward_step(27, enc_of({1, 1, 3})) == 11);          // 8 + 3
    CHECK_THROWS_AS(ix.backward_step(18, enc_of({1, 3})), std::invalid_argument);
}

TEST_CASE("count and locate on the golden instance") {
    OpIndex ix = golden_index();
    std::vector<uint64_t> p = {2, 3, 1, 2};
    CHECK(ix.count(p) == 1);
    CHECK(ix.locate_one(p) == 19);
    CHECK(ix.count(std::vector<uint64_t>{1, 2}) == 15);
    CHECK(ix.count(std::vector<uint64_t>{7}) == 30);
    auto one = ix.locate_one(std::vector<uint64_t>{1});
    REQUIRE(one.has_value());
    CHECK(*one >= 1);
    CHECK(*one <= 30);
    CHECK_THROWS_AS(ix.count(std::vector<uint64_t>{1, 2, 3, 4, 5, 6}), PatternTooLong);
    CHECK_THROWS_AS(ix.count(std::vector<uint64_t>{}), std::invalid_argument);
}

TEST_CASE("a no-match pattern needs the wider c to be queryable") {
    IndexParams::Overrides ov;
    ov.sample = 4;
    ov.occ_threshold = 4;
    IndexParams p = IndexParams::compute(golden_string().size(), 2, 1, ov);
    OpIndex ix = OpIndex::build(golden_string(), p, {true});
    std::vector<uint64_t> none = {9, 1, 2, 3, 4, 5, 6, 7, 8};
    CHECK(ix.count(none) == 0);
    CHECK_FALSE(ix.locate_one(none).has_value());
    QueryResult slow = ix.query_slow(none);
    CHECK(slow.count == 0);
    CHECK_FALSE(slow.position.has_value());
}

TEST_CASE("scan_all") {
    std::vector<uint64_t> intro = {6, 3, 9, 2, 7, 5, 4, 8, 1};
    OpIndex ix = OpIndex::build(intro, IndexParams::compute(intro.size()), {true});
    CHECK(ix.scan_all(std::vector<uint64_t>{2, 1, 3}) == std::vector<uint64_t>{1, 6});

    OpIndex fig = golden_index();
    CHECK(fig.scan_all(std::vector<uint64_t>{2, 3, 1, 2}) == std::vector<uint64_t>{19});
    CHECK(fig.scan_all(std::vector<uint64_t>{1}).size() == 30);
    CHECK_THROWS_AS(fig.scan_all(std::vector<uint64_t>(11, 1)), PatternTooLong);
}

TEST_CASE("fast and slow paths agree with the oracle on random instances") {
    uint64_t state = 2024;
    auto next = [&] { return state = splitmix64(state); };
    for (int rep = 0; rep < 60; ++rep) {
        uint64_t n = 16 + next() % 240;
        uint64_t sigma = 2 + next() % 14;
        std::vector<uint64_t> s;
        for (uint64_t i = 0; i < n; ++i) s.push_back(next() % sigma + 1);
        IndexParams prm = IndexParams::compute(n);
        OpIndex ix = OpIndex::build(s, prm, {true});
        for (int q = 0; q < 30; ++q) {
            uint64_t m = 1 + next() % std::min(prm.m_max, n);
            std::vector<uint64_t> p;
            if (next() % 2) {
                uint64_t start = next() % (n - m + 1);
                p.assign(s.begin() + start, s.begin() + start + m);
                if (next() % 3 == 0) p[next() % m] = next() % sigma + 1;
            } else {
                for (uint64_t k = 0; k < m; ++k) p.push_back(next() % sigma + 1);
            }
            auto want = oracle::naive_matches(s, p);
            QueryResult fast = ix.query_fast(p);
            QueryResult slow = ix.query_slow(p);
            REQUIRE(fast.count == want.count());
            REQUIRE(slow.count == want.count());
            REQUIRE(fast.position.has_value() == (want.count() > 0));
            REQUIRE(slow.position.has_value() == (want.count() > 0));
            if (fast.position)
                REQUIRE(std::binary_search(want.positions.begin(), want.positions.end(), *fast.position));
            if (slow.position)
                REQUIRE(std::binary_search(want.positions.begin(), want.positions.end(), *slow.position));
            REQUIRE(ix.scan_all(p) == want.positions);
        }
    }
}

TEST_CASE("repetitive and constant strings") {
    std::vector<uint64_t> periodic;
    for (int i = 0; i < 50; ++i) {
        periodic.push_back(1);
        periodic.push_back(2);
    }
    OpIndex ix = OpIndex::build(periodic, IndexParams::compute(periodic.size()), {true});
    auto want = oracle::naive_matches(periodic, std::vector<uint64_t>{1, 2, 1});
    CHECK(ix.count(std::vector<uint64_t>{1, 2, 1}) == want.count());
    CHECK(ix.query_slow(std::vector<uint64_t>{1, 2, 1}).count == want.count());

    std::vector<uint64_t> constant(40, 5);
    OpIndex cx = OpIndex::build(constant, IndexParams::compute(constant.size()), {true});
    CHECK(cx.count(std::vector<uint64_t>{3, 3, 3}) == 38);
    CHECK(cx.count(std::vector<uint64_t>{3, 4, 3}) == 0);
    CHECK(cx.query_slow(std::vector<uint64_t>{3, 3, 3}).count == 38);
}

TEST_CASE("degenerate sizes") {
    std::vector<uint64_t> two = {7, 7};
    OpIndex ix = OpIndex::build(two, IndexParams::compute(2), {true});
    CHECK(ix.count(std::vector<uint64_t>{1}) == 2);
    CHECK_THROWS_AS((void)OpIndex::build(std::vector<uint64_t>{1}, IndexParams::compute(2)),
                    std::invalid_argument);
}

TEST_CASE("serialization round trips byte-exactly") {
    OpIndex ix = golden_index(false);
    std::vector<uint8_t> bytes = ix.serialize();
    OpIndex back = OpIndex::deserialize(bytes);
    CHECK(back.serialize() == bytes);
    CHECK(back.count(std::vector<uint64_t>{2, 3, 1, 2}) == 1);
    CHECK(back.locate_one(std::vector<uint64_t>{2, 3, 1, 2}) == 19);
    CHECK(back.query_slow(std::vector<uint64_t>{1, 2}).count == 15);
    CHECK(back.sampled_positions() == ix.sampled_positions());

    auto sizes = ix.section_sizes();
    CHECK(sizes.total() == bytes.size());

    std::string path = "golden_index_roundtrip.opme";
    ix.save(path);
    OpIndex loaded = OpIndex::load(path);
    CHECK(loaded.serialize() == bytes);
    std::remove(path.c_str());
}

TEST_CASE("corrupt index bytes are rejected") {
    OpIndex ix = golden_index(false);
    std::vector<uint8_t> bytes = ix.serialize();
    CHECK_THROWS_AS((void)OpIndex::deserialize(std::span<const uint8_t>(bytes.data(), 10)), FormatError);
    std::vector<uint8_t> magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS((void)OpIndex::deserialize(magic), FormatError);
    std::vector<uint8_t> trunc(bytes.begin(), bytes.end() - 9);
    CHECK_THROWS_AS((void)OpIndex::deserialize(trunc), FormatError);
}

TEST_CASE("concurrent queries on a shared index") {
    OpIndex ix = golden_index(false);
    std::vector<std::thread> workers;
    std::atomic<int> failures{0};
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&ix, &failures] {
            for (int rep = 0; rep < 200; ++rep) {
                if (ix.count(std::vector<uint64_t>{2, 3, 1, 2}) != 1) ++failures;
                if (ix.count(std::vector<uint64_t>{1, 2}) != 15) ++failures;
                if (!ix.scan_all(std::vector<uint64_t>{2, 3, 1, 2}).size()) ++failures;
            }
        });
    }
    for (auto& w : workers) w.join();
    CHECK(failures == 0);
}

TEST_CASE("naive tables agree with the build on random instances") {
    uint64_t state = 515;
    auto next = [&] { return state = splitmix64(state); };
    for (int rep = 0; rep < 15; ++rep) {
        uint64_t n = 10 + next() % 80;
        std::vector<uint64_t> s;
        for (uint64_t i = 0; i < n; ++i) s.push_back(next() % 8 + 1);
        IndexParams prm = IndexParams::compute(n);
        OpIndex ix = OpIndex::build(s, prm, {true});
        auto nt = oracle::naive_tables(s, prm.sample, prm.occ_threshold, prm.ell);
        for (uint64_t p = 1; p <= n; ++p) {
            REQUIRE(ix.is_sampled(p) == nt.sampled[p - 1]);
            if (nt.sampled[p - 1]) continue;
            auto row = ix.backstep_row(p);
            const auto& want = nt.rows[p - 1];
            REQUIRE(row.flag == (want.l < 0));
            if (!row.flag) {
                REQUIRE(row.l == static_cast<uint64_t>(want.l));
                REQUIRE(row.b.doubled == want.b.doubled);
                REQUIRE(row.d == static_cast<uint64_t>(want.d));
            }
        }
    }
}
