#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "dski/codec.hpp"
#include "dski/index.hpp"

using namespace dski;

namespace {

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

std::vector<corpus_doc> random_corpus(std::mt19937_64& rng, size_t n_docs,
                                      size_t vocab) {
    std::vector<corpus_doc> docs;
    for (size_t d = 0; d < n_docs; ++d) {
        corpus_doc doc;
        doc.id = "doc" + std::to_string(d);
        std::map<std::string, uint32_t> tf;
        std::map<std::string, double> impact;
        const size_t n_terms = 1 + rng() % 8;
        for (size_t t = 0; t < n_terms; ++t) {
            const std::string term = "w" + std::to_string(rng() % vocab);
            tf[term] += 1 + rng() % 4;
            impact[term] = 0.5 + static_cast<double>(rng() % 100) / 10.0;
        }
        if (rng() % 4 == 0) {
            impact["x" + std::to_string(rng() % vocab)] =
                0.5 + static_cast<double>(rng() % 100) / 10.0;
        }
        doc.tf.assign(tf.begin(), tf.end());
        doc.impact.assign(impact.begin(), impact.end());
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::string corpus_json(const std::vector<corpus_doc>& docs) {
    std::ostringstream out;
    for (const corpus_doc& doc : docs) {
        out << "{\"id\":\"" << doc.id << "\",\"tf\":{";
        for (size_t i = 0; i < doc.tf.size(); ++i) {
            out << (i ? "," : "") << '"' << doc.tf[i].first
                << "\":" << doc.tf[i].second;
        }
        out << "},\"impact\":{";
        for (size_t i = 0; i < doc.impact.size(); ++i) {
            out << (i ? "," : "") << '"' << doc.impact[i].first
                << "\":" << doc.impact[i].second;
        }
        out << "}}\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("empty corpus builds an empty index") {
    const inverted_index index = build_index({});
    CHECK(index.stats.num_docs == 0);
    CHECK(index.terms.empty());
    CHECK(index.lists.empty());
    CHECK(index.num_postings() == 0);
}

TEST_CASE("one-document index matches a hand-built expectation") {
    // Document "a a b" with learned weights {a: 5, b: 2}.
    corpus_doc doc;
    doc.id = "d0";
    doc.tf = {{"a", 2}, {"b", 1}};
    doc.impact = {{"a", 5.0}, {"b", 2.0}};
    const inverted_index index = build_index({{doc}});

    REQUIRE(index.terms == std::vector<std::string>{"a", "b"});
    CHECK(index.stats.num_docs == 1);
    CHECK(index.stats.avg_doc_len == 3.0);

    // Expected weights, computed independently of the build path.
    const corpus_stats stats{1, 3.0};
    const double w_a = bm25_weight(2, 1, 3, stats, 0.9, 0.4);
    const double w_b = bm25_weight(1, 1, 3, stats, 0.9, 0.4);
    const double expected_scale = 65535.0 / 5.0;
    CHECK(index.scale == doctest::Approx(expected_scale).epsilon(1e-12));

    const posting_list* la = index.find_list("a");
    REQUIRE(la != nullptr);
    REQUIRE(la->blocks.size() == 1);
    const auto ra = decode_block(la->blocks[0].payload);
    REQUIRE(ra.size() == 1);
    CHECK(ra[0].doc_id == 0);
    CHECK(ra[0].w_bm25 == quantize_weight(w_a, index.scale));
    CHECK(ra[0].w_learned == quantize_weight(5.0, index.scale));

    const posting_list* lb = index.find_list("b");
    REQUIRE(lb != nullptr);
    const auto rb = decode_block(lb->blocks[0].payload);
    REQUIRE(rb.size() == 1);
    CHECK(rb[0].w_bm25 == quantize_weight(w_b, index.scale));
    CHECK(rb[0].w_learned == quantize_weight(2.0, index.scale));
}

TEST_CASE("expansion-only terms keep a zero bm25 weight") {
    corpus_doc doc;
    doc.id = "d0";
    doc.tf = {{"a", 1}};
    doc.impact = {{"a", 1.0}, {"zz", 4.0}};
    const inverted_index index = build_index({{doc}});
    const posting_list* list = index.find_list("zz");
    REQUIRE(list != nullptr);
    const auto records = decode_block(list->blocks[0].payload);
    REQUIRE(records.size() == 1);
    CHECK(records[0].w_bm25 == 0);
    CHECK(records[0].w_learned > 0);
}

TEST_CASE("duplicate document ids rejected") {
    corpus_doc a;
    a.id = "same";
    a.tf = {{"x", 1}};
    corpus_doc b = a;
    const std::vector<corpus_doc> docs{a, b};
    CHECK_THROWS_AS(build_index(docs), data_error);
}

TEST_CASE("malformed corpus lines name the line") {
    CHECK_THROWS_WITH_AS(parse_corpus_line("{\"tf\":{}}", 7),
                         doctest::Contains("line 7"), data_error);
    CHECK_THROWS_AS(parse_corpus_line("not json at all", 1), data_error);
    CHECK_THROWS_AS(
        parse_corpus_line("{\"id\":\"d\",\"tf\":{\"a\":-1}}", 1), data_error);
    CHECK_THROWS_AS(
        parse_corpus_line("{\"id\":\"d\",\"impact\":{\"a\":-0.5}}", 1),
        data_error);
}

TEST_CASE("terms are lowercased and merged on ingestion") {
    const corpus_doc doc =
        parse_corpus_line("{\"id\":\"d\",\"tf\":{\"Cat\":2,\"cAT\":3},"
                          "\"impact\":{\"CAT\":7.5}}",
                          1);
    REQUIRE(doc.tf.size() == 1);
    CHECK(doc.tf[0].first == "cat");
    CHECK(doc.tf[0].second == 5);
    REQUIRE(doc.impact.size() == 1);
    CHECK(doc.impact[0].first == "cat");
}

TEST_CASE("block and list maxima are sound") {
    std::mt19937_64 rng(61);
    const auto docs = random_corpus(rng, 300, 40);
    build_config config;
    config.partition.target_size = 16;
    const inverted_index index = build_index(docs, config);
    for (const posting_list& list : index.lists) {
        uint32_t count = 0;
        for (const posting_block& block : list.blocks) {
            const auto records = decode_block(block.payload);
            count += records.size();
            for (const posting_record& r : records) {
                CHECK(r.w_bm25 <= block.max_bm25);
                CHECK(r.w_learned <= block.max_learned);
                CHECK(r.doc_id <= block.max_doc_id);
            }
            CHECK(block.max_bm25 <= list.list_max_bm25);
            CHECK(block.max_learned <= list.list_max_learned);
        }
        CHECK(count == list.doc_count);
    }
}

TEST_CASE("decoded posting lists match a brute-force rebuild") {
    std::mt19937_64 rng(67);
    const auto docs = random_corpus(rng, 120, 25);
    const inverted_index index = build_index(docs);

    // Reference: accumulate per-term records straight from the raw docs.
    std::map<std::string, std::vector<uint32_t>> expected_docs;
    for (uint32_t d = 0; d < docs.size(); ++d) {
        std::map<std::string, bool> terms;
        for (const auto& [term, count] : docs[d].tf) {
            terms[term] = true;
        }
        for (const auto& [term, w] : docs[d].impact) {
            terms[term] = true;
        }
        for (const auto& [term, present] : terms) {
            expected_docs[term].push_back(d);
        }
    }
    for (const auto& [term, doc_ids] : expected_docs) {
        const posting_list* list = index.find_list(term);
        REQUIRE(list != nullptr);
        std::vector<uint32_t> actual;
        for (const posting_block& block : list->blocks) {
            for (const posting_record& r : decode_block(block.payload)) {
                actual.push_back(r.doc_id);
            }
        }
        CHECK(actual == doc_ids);
    }
}

TEST_CASE("save and load round trip deep equality") {
    std::mt19937_64 rng(71);
    const auto docs = random_corpus(rng, 200, 30);
    const inverted_index index = build_index(docs);

    std::stringstream buffer;
    save_index(index, buffer);
    const inverted_index loaded = load_index(buffer);
    CHECK(loaded == index);
}

TEST_CASE("empty index round trips") {
    const inverted_index index = build_index({});
    std::stringstream buffer;
    save_index(index, buffer);
    CHECK(load_index(buffer) == index);
}

TEST_CASE("load failures are distinct") {
    std::mt19937_64 rng(73);
    const auto docs = random_corpus(rng, 40, 10);
    const inverted_index index = build_index(docs);
    std::stringstream buffer;
    save_index(index, buffer);
    const std::string bytes = buffer.str();

    SUBCASE("bad magic") {
        std::stringstream in("XXXX" + bytes.substr(4));
        try {
            load_index(in);
            FAIL("expected load_error");
        } catch (const load_error& e) {
            CHECK(e.why == load_error::reason::bad_magic);
        }
    }
    SUBCASE("version mismatch") {
        std::string mutated = bytes;
        mutated[4] = 99;
        std::stringstream in(mutated);
        try {
            load_index(in);
            FAIL("expected load_error");
        } catch (const load_error& e) {
            CHECK(e.why == load_error::reason::bad_version);
        }
    }
    SUBCASE("truncation") {
        std::stringstream in(bytes.substr(0, bytes.size() / 2));
        try {
            load_index(in);
            FAIL("expected load_error");
        } catch (const load_error& e) {
            CHECK(e.why == load_error::reason::truncated);
        }
    }
    SUBCASE("payload corruption") {
        std::string mutated = bytes;
        mutated[mutated.size() - 2] ^= 0x5A;  // inside the last payload
        std::stringstream in(mutated);
        CHECK_THROWS_AS(load_index(in), load_error);
    }
}

TEST_CASE("builds are deterministic and byte identical") {
    std::mt19937_64 rng(79);
    const auto docs = random_corpus(rng, 150, 20);
    const std::string text = corpus_json(docs);

    const auto path = temp_path("dski_test_corpus.jsonl");
    {
        std::ofstream out(path);
        out << text;
    }
    const inverted_index a = build_index_from_file(path.string());
    const inverted_index b = build_index_from_file(path.string());
    std::stringstream sa;
    std::stringstream sb;
    save_index(a, sa);
    save_index(b, sb);
    CHECK(sa.str() == sb.str());
    std::filesystem::remove(path);
}

TEST_CASE("missing corpus file raises io_error") {
    CHECK_THROWS_AS(build_index_from_file("/nonexistent/corpus.jsonl"),
                    io_error);
}
