#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opeps/ope_engine.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace opeps;

TEST_CASE("fresh engines are empty and reject empty seeds") {
    OpeEngine engine("k1");
    CHECK(engine.size() == 0);
    CHECK(engine.rebalances() == 0);
    CHECK_THROWS_AS(OpeEngine(""), argument_error);
}

TEST_CASE("first insertion lands on the full-space midpoint") {
    OpeEngine engine("any-seed");
    const auto result = engine.encrypt(42, 1);
    CHECK(result.token == OpeEngine::full_space_midpoint());
    CHECK(result.remapped.empty());
}

TEST_CASE("same seed reproduces the token sequence") {
    OpeEngine a("seed-x"), b("seed-x");
    Rng rng = make_rng(4);
    for (uint32_t i = 1; i <= 64; ++i) {
        const int64_t v = static_cast<int64_t>(rng() % 50);
        CHECK(a.encrypt(v, i).token == b.encrypt(v, i).token);
    }
}

TEST_CASE("different seeds diverge on longer insertion sequences") {
    Rng rng = make_rng(9);
    int diverged = 0;
    for (int pair = 0; pair < 100; ++pair) {
        OpeEngine a("seed-a-" + std::to_string(pair));
        OpeEngine b("seed-b-" + std::to_string(pair));
        bool differ = false;
        for (uint32_t i = 1; i <= 8; ++i) {
            const int64_t v = static_cast<int64_t>(rng() % 1000);
            if (a.encrypt(v, i).token != b.encrypt(v, i).token)
                differ = true;
        }
        diverged += differ;
    }
    CHECK(diverged == 100);
}

TEST_CASE("the worked ciphertext ordering example") {
    OpeEngine engine("paper-example");
    const std::vector<int64_t> x{9, 40, 15, 76, 15, 76};
    const std::vector<uint32_t> gamma{1, 4, 2, 5, 3, 6};
    std::vector<u128> y;
    for (size_t i = 0; i < x.size(); ++i)
        y.push_back(engine.encrypt(x[i], gamma[i]).token);
    CHECK(y[0] < y[2]);
    CHECK(y[2] < y[4]);
    CHECK(y[4] < y[1]);
    CHECK(y[1] < y[3]);
    CHECK(y[3] < y[5]);
}

TEST_CASE("tokens follow plaintext order with rank tie-breaks") {
    OpeEngine engine("bulk");
    Rng rng = make_rng(77);
    std::vector<std::pair<int64_t, uint32_t>> inserted;
    std::vector<u128> tokens;
    std::set<std::pair<int64_t, uint32_t>> used;
    for (uint32_t i = 0; i < 1000; ++i) {
        int64_t v = static_cast<int64_t>(rng() % 100);
        uint32_t rank = static_cast<uint32_t>(rng() % 10000);
        while (used.count({v, rank}))
            rank = static_cast<uint32_t>(rng() % 10000);
        used.insert({v, rank});
        inserted.emplace_back(v, rank);
        tokens.push_back(engine.encrypt(v, rank).token);
    }
    // reference order: sort by (plaintext, rank) and compare token order
    std::vector<size_t> idx(inserted.size());
    for (size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        return inserted[a] < inserted[b];
    });
    for (size_t i = 1; i < idx.size(); ++i)
        CHECK(tokens[idx[i - 1]] < tokens[idx[i]]);
    // frequency hiding: all tokens distinct
    std::set<u128> unique(tokens.begin(), tokens.end());
    CHECK(unique.size() == tokens.size());
    // decryption round trip
    for (size_t i = 0; i < inserted.size(); ++i)
        CHECK(engine.decrypt(tokens[i]) == inserted[i].first);
}

TEST_CASE("sorting tokens recovers the supplied randomized order") {
    OpeEngine engine("leak");
    Rng rng = make_rng(13);
    const std::vector<int64_t> x{7, 7, 1, 9, 1, 7};
    const RandomizedOrder gamma = sample_randomized_order(x, rng);
    std::vector<u128> tokens;
    for (size_t i = 0; i < x.size(); ++i)
        tokens.push_back(engine.encrypt(x[i], gamma.perm[i]).token);
    // rank of each token equals the gamma value of its record
    for (size_t i = 0; i < x.size(); ++i) {
        uint32_t rank = 1;
        for (size_t j = 0; j < x.size(); ++j)
            if (tokens[j] < tokens[i])
                ++rank;
        CHECK(rank == gamma.perm[i]);
    }
}

TEST_CASE("duplicate rank for equal plaintexts is rejected") {
    OpeEngine engine("dup");
    engine.encrypt(5, 3);
    CHECK_THROWS_AS(engine.encrypt(5, 3), argument_error);
    CHECK_NOTHROW(engine.encrypt(5, 4));
    CHECK_NOTHROW(engine.encrypt(6, 3));
}

TEST_CASE("unknown tokens fail decryption") {
    OpeEngine engine("miss");
    engine.encrypt(5, 1);
    CHECK_THROWS_AS(engine.decrypt(u128{12345}), lookup_error);
}

TEST_CASE("rebalance remaps previously issued tokens consistently") {
    // A 6-bit token space forces gap exhaustion quickly.
    OpeEngine engine("tiny", 1, 62);
    std::map<u128, std::pair<int64_t, uint32_t>> issued;
    Rng rng = make_rng(3);
    for (uint32_t i = 0; i < 40; ++i) {
        const int64_t v = static_cast<int64_t>(i); // ascending worst case
        const auto result = engine.encrypt(v, i + 1);
        for (const auto &remap : result.remapped) {
            auto node = issued.extract(remap.old_token);
            REQUIRE(!node.empty());
            node.key() = remap.new_token;
            issued.insert(std::move(node));
        }
        issued.emplace(result.token, std::make_pair(v, i + 1));
    }
    CHECK(engine.rebalances() > 0);
    CHECK(issued.size() == 40);
    for (const auto &[token, record] : issued)
        CHECK(engine.decrypt(token) == record.first);
    // order still intact after remapping
    int64_t prev = -1;
    for (const auto &[token, record] : issued) {
        CHECK(record.first >= prev);
        prev = record.first;
    }
}

TEST_CASE("checkpoints round trip bit-exactly") {
    OpeEngine engine("snap");
    Rng rng = make_rng(21);
    for (uint32_t i = 1; i <= 200; ++i)
        engine.encrypt(static_cast<int64_t>(rng() % 500), i);
    const auto blob = engine.checkpoint();
    CHECK(blob[0] == 'O');
    CHECK(blob[1] == 'P');
    CHECK(blob[2] == 'E');
    CHECK(blob[3] == 'S');
    CHECK(blob.size() == 14 + 200 * 28);

    const OpeEngine restored = OpeEngine::restore(blob);
    CHECK(restored.size() == engine.size());
    CHECK(restored.checkpoint() == blob);
    for (const auto &entry : engine.entries())
        CHECK(restored.decrypt(entry.token) == entry.plaintext);
}

TEST_CASE("restore rejects corrupted snapshots") {
    OpeEngine engine("corrupt");
    engine.encrypt(1, 1);
    auto blob = engine.checkpoint();
    auto bad_magic = blob;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(OpeEngine::restore(bad_magic), error);
    auto truncated = blob;
    truncated.pop_back();
    CHECK_THROWS_AS(OpeEngine::restore(truncated), error);
    auto trailing = blob;
    trailing.push_back(0);
    CHECK_THROWS_AS(OpeEngine::restore(trailing), error);
}

TEST_CASE("restored engines accept further insertions") {
    OpeEngine engine("continue");
    engine.encrypt(10, 1);
    engine.encrypt(30, 2);
    OpeEngine restored = OpeEngine::restore(engine.checkpoint());
    const auto token = restored.encrypt(20, 3).token;
    const auto entries = restored.entries();
    REQUIRE(entries.size() == 3);
    CHECK(entries[1].plaintext == 20);
    CHECK(entries[1].token == token);
}
