#include <doctest.h>

#include <algorithm>
#include <cstdio>

#include "opme/corpus.hpp"
#include "opme/serial.hpp"

using namespace opme;

TEST_CASE("generation is deterministic and honors its knobs") {
    auto a = corpus::generate(500, 16, 99, true);
    auto b = corpus::generate(500, 16, 99, true);
    CHECK(a == b);
    CHECK(a != corpus::generate(500, 16, 100, true));

    auto constant = corpus::generate(64, 1, 5, true);
    CHECK(std::all_of(constant.begin(), constant.end(), [](uint64_t v) { return v == 1; }));

    auto distinct = corpus::generate(100, 1 << 20, 7, false);
    auto sorted = distinct;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK_THROWS_AS(corpus::generate(10, 5, 1, false), std::invalid_argument);
}

TEST_CASE("text and binary round trips") {
    auto s = corpus::generate(300, 1000, 3, true);
    for (auto fmt : {corpus::Format::Text, corpus::Format::Binary}) {
        std::string path = fmt == corpus::Format::Text ? "corpus_rt.txt" : "corpus_rt.bin";
        corpus::write_file(path, s, fmt);
        CHECK(corpus::read_file(path, fmt) == s);
        std::remove(path.c_str());
    }
    CHECK_THROWS(corpus::read_file("no_such_corpus_file", corpus::Format::Text));
}
