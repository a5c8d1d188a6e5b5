#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "dski/topk.hpp"

using namespace dski;

namespace {

std::set<uint32_t> doc_set(const top_k_queue& q) {
    std::set<uint32_t> out;
    for (const topk_entry& e : q.ranked()) {
        out.insert(e.doc_id);
    }
    return out;
}

}  // namespace

TEST_CASE("queue fills before evicting, threshold zero until full") {
    top_k_queue q(3);
    CHECK(q.threshold() == 0.0);
    q.push(5.0, 1);
    q.refresh_threshold();
    CHECK(q.threshold() == 0.0);
    q.push(2.0, 2);
    q.push(9.0, 3);
    q.refresh_threshold();
    CHECK(q.threshold() == 2.0);
}

TEST_CASE("ranked output ties break by lower doc id") {
    top_k_queue q(4);
    q.push(1.0, 9);
    q.push(1.0, 2);
    q.push(3.0, 5);
    q.push(0.5, 1);
    const auto ranked = q.ranked();
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].doc_id == 5);
    CHECK(ranked[1].doc_id == 2);  // tie at 1.0: lower doc id first
    CHECK(ranked[2].doc_id == 9);
    CHECK(ranked[3].doc_id == 1);
    // Worst under the total order is the higher doc id of the tie pair
    // only after the lowest score is gone.
    CHECK(q.worst().doc_id == 1);
}

TEST_CASE("dual insert below capacity grows both queues") {
    dual_queue_state state(3);
    dual_insert(state, 1, {1.0, 2.0}, {0.9, 0.2}, view_mode::independent);
    dual_insert(state, 2, {2.0, 1.0}, {0.9, 0.2}, view_mode::independent);
    CHECK(state.q_s.size() == 2);
    CHECK(state.q_f.size() == 2);
}

TEST_CASE("dual insert x == y evicts one doc from both") {
    // alpha == beta makes both queues identical, so x == y always.
    dual_queue_state state(2);
    const mix_params mix{0.5, 0.5};
    dual_insert(state, 1, {4.0, 4.0}, mix, view_mode::independent);
    dual_insert(state, 2, {3.0, 3.0}, mix, view_mode::independent);
    dual_insert(state, 3, {5.0, 5.0}, mix, view_mode::independent);
    CHECK(doc_set(state.q_s) == std::set<uint32_t>{1, 3});
    CHECK(doc_set(state.q_f) == std::set<uint32_t>{1, 3});
}

TEST_CASE("uniform view keeps identical doc sets after every insert") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        dual_queue_state state(5);
        const mix_params mix{0.9, 0.2};
        for (uint32_t doc = 0; doc < 60; ++doc) {
            const score_pair scores{
                static_cast<double>(rng() % 1000) / 10.0,
                static_cast<double>(rng() % 1000) / 10.0};
            dual_insert(state, doc, scores, mix, view_mode::uniform);
            CHECK(doc_set(state.q_s) == doc_set(state.q_f));
            CHECK(state.q_s.size() == state.q_f.size());
        }
    }
}

TEST_CASE("uniform view evicts q_f's worst from both when x != y") {
    dual_queue_state state(2);
    const mix_params mix{1.0, 0.0};  // q_s ranks by bm25, q_f by learned
    dual_insert(state, 1, {10.0, 1.0}, mix, view_mode::uniform);
    dual_insert(state, 2, {5.0, 5.0}, mix, view_mode::uniform);
    // x would be doc 2 (worst bm25 among {10,5} is 5), y is doc 1 (worst
    // learned among {1,5} is 1); uniform evicts y=1 from both.
    dual_insert(state, 3, {7.0, 3.0}, mix, view_mode::uniform);
    CHECK(doc_set(state.q_f) == std::set<uint32_t>{2, 3});
    CHECK(doc_set(state.q_s) == std::set<uint32_t>{2, 3});
}

TEST_CASE("independent view lets queues diverge") {
    dual_queue_state state(2);
    const mix_params mix{1.0, 0.0};
    dual_insert(state, 1, {10.0, 1.0}, mix, view_mode::independent);
    dual_insert(state, 2, {5.0, 5.0}, mix, view_mode::independent);
    dual_insert(state, 3, {7.0, 3.0}, mix, view_mode::independent);
    CHECK(doc_set(state.q_s) == std::set<uint32_t>{1, 3});  // best bm25
    CHECK(doc_set(state.q_f) == std::set<uint32_t>{2, 3});  // best learned
}

TEST_CASE("thresholds never decrease under random dual inserts") {
    std::mt19937_64 rng(43);
    for (const view_mode view : {view_mode::independent, view_mode::uniform}) {
        dual_queue_state state(8);
        const mix_params mix{0.9, 0.2};
        double last_s = 0.0;
        double last_f = 0.0;
        for (uint32_t doc = 0; doc < 500; ++doc) {
            const score_pair scores{
                static_cast<double>(rng() % 10000) / 100.0,
                static_cast<double>(rng() % 10000) / 100.0};
            dual_insert(state, doc, scores, mix, view);
            CHECK(state.q_s.threshold() >= last_s);
            CHECK(state.q_f.threshold() >= last_f);
            last_s = state.q_s.threshold();
            last_f = state.q_f.threshold();
        }
        CHECK(last_s > 0.0);
        CHECK(last_f > 0.0);
    }
}

TEST_CASE("k must be positive") {
    CHECK_THROWS_AS(top_k_queue(0), config_error);
}
