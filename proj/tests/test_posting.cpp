#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dski/codec.hpp"
#include "dski/posting.hpp"

using namespace dski;

namespace {

std::vector<posting_record> random_run(std::mt19937_64& rng, size_t n) {
    std::vector<posting_record> run;
    run.reserve(n);
    uint32_t doc = 0;
    for (size_t i = 0; i < n; ++i) {
        run.push_back({doc, static_cast<uint16_t>(rng() % 1000),
                       static_cast<uint16_t>(rng() % 1000)});
        doc += 1 + rng() % 9;
    }
    return run;
}

std::vector<posting_record> decode_all(const std::vector<posting_block>& blocks) {
    std::vector<posting_record> out;
    for (const posting_block& b : blocks) {
        const auto records = decode_block(b.payload);
        out.insert(out.end(), records.begin(), records.end());
    }
    return out;
}

void check_maxima_against_bruteforce(const std::vector<posting_block>& blocks) {
    for (const posting_block& b : blocks) {
        const auto records = decode_block(b.payload);
        REQUIRE(records.size() == b.record_count);
        uint16_t max_b = 0;
        uint16_t max_l = 0;
        for (const posting_record& r : records) {
            max_b = std::max(max_b, r.w_bm25);
            max_l = std::max(max_l, r.w_learned);
        }
        CHECK(b.max_bm25 == max_b);
        CHECK(b.max_learned == max_l);
        CHECK(b.max_doc_id == records.back().doc_id);
    }
}

}  // namespace

TEST_CASE("fixed partition sizes") {
    std::mt19937_64 rng(1);
    const auto run = random_run(rng, 10);
    const auto blocks =
        partition_blocks(run, {partition_strategy::fixed, 4, 0.15});
    REQUIRE(blocks.size() == 3);
    CHECK(blocks[0].record_count == 4);
    CHECK(blocks[1].record_count == 4);
    CHECK(blocks[2].record_count == 2);
    CHECK(decode_all(blocks) == run);
}

TEST_CASE("singleton run") {
    const std::vector<posting_record> run{{7, 3, 9}};
    for (const auto strategy :
         {partition_strategy::fixed, partition_strategy::variable}) {
        const auto blocks = partition_blocks(run, {strategy, 8, 0.15});
        REQUIRE(blocks.size() == 1);
        CHECK(blocks[0].max_doc_id == 7);
        CHECK(blocks[0].max_bm25 == 3);
        CHECK(blocks[0].max_learned == 9);
    }
}

TEST_CASE("empty input yields empty sequence") {
    CHECK(partition_blocks({}, {partition_strategy::fixed, 4, 0.15}).empty());
    CHECK(partition_blocks({}, {partition_strategy::variable, 4, 0.15}).empty());
}

TEST_CASE("block maxima match brute force for both strategies") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto run = random_run(rng, 1 + rng() % 3000);
        for (const auto strategy :
             {partition_strategy::fixed, partition_strategy::variable}) {
            const auto blocks = partition_blocks(run, {strategy, 64, 0.15});
            check_maxima_against_bruteforce(blocks);
            CHECK(decode_all(blocks) == run);
        }
    }
}

TEST_CASE("variable partition mean size within 20% of target") {
    std::mt19937_64 rng(3);
    for (const uint32_t target : {32u, 128u}) {
        const auto run = random_run(rng, 10000);
        const auto blocks =
            partition_blocks(run, {partition_strategy::variable, target, 0.15});
        const double mean =
            static_cast<double>(run.size()) / static_cast<double>(blocks.size());
        CHECK(mean >= 0.8 * target);
        CHECK(mean <= 1.2 * target);
        // All blocks but the last stay within the size bounds.
        for (size_t i = 0; i + 1 < blocks.size(); ++i) {
            CHECK(blocks[i].record_count >= (target * 9 + 9) / 10);
            CHECK(blocks[i].record_count <= (target * 12) / 10);
        }
    }
}

TEST_CASE("unsorted records rejected") {
    const std::vector<posting_record> bad{{4, 1, 1}, {4, 1, 1}};
    CHECK_THROWS_AS(partition_blocks(bad, {partition_strategy::fixed, 4, 0.15}),
                    data_error);
}

TEST_CASE("zero target size rejected") {
    const std::vector<posting_record> run{{1, 1, 1}};
    CHECK_THROWS_AS(partition_blocks(run, {partition_strategy::fixed, 0, 0.15}),
                    config_error);
}
